#include <atomic>
#include <cstdlib>
#include <cstring>

#include "cenal/errors.hpp"
#include "cenal/kernels.hpp"
#include "cenal/log.hpp"

namespace cenal::kernels {

const Ops& scalar_ops();
#if CENAL_BUILD_AVX2
const Ops& avx2_ops();
#endif

namespace {

bool cpu_has_avx2() {
#if CENAL_BUILD_AVX2
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Lane initial_lane() {
  Lane lane = cpu_has_avx2() ? Lane::avx2 : Lane::scalar;
  if (const char* env = std::getenv("CENAL_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) {
      lane = Lane::scalar;
    } else if (std::strcmp(env, "avx2") == 0) {
      if (!cpu_has_avx2()) {
        log::warn("CENAL_KERNELS=avx2 requested but unavailable; using scalar");
        lane = Lane::scalar;
      } else {
        lane = Lane::avx2;
      }
    } else if (std::strcmp(env, "auto") != 0) {
      log::warn("unknown CENAL_KERNELS value '", env, "'; using auto");
    }
  }
  return lane;
}

std::atomic<Lane>& lane_slot() {
  static std::atomic<Lane> lane{initial_lane()};
  return lane;
}

}  // namespace

bool lane_available(Lane lane) {
  switch (lane) {
    case Lane::scalar: return true;
    case Lane::avx2: return cpu_has_avx2();
  }
  return false;
}

const char* lane_name(Lane lane) {
  return lane == Lane::avx2 ? "avx2" : "scalar";
}

Lane active_lane() { return lane_slot().load(std::memory_order_relaxed); }

void select_lane(Lane lane) {
  if (!lane_available(lane)) {
    throw ConfigError(std::string("kernel lane unavailable: ") + lane_name(lane));
  }
  lane_slot().store(lane, std::memory_order_relaxed);
}

const Ops& ops(Lane lane) {
#if CENAL_BUILD_AVX2
  if (lane == Lane::avx2) return avx2_ops();
#endif
  (void)lane;
  return scalar_ops();
}

const Ops& ops() { return ops(active_lane()); }

}  // namespace cenal::kernels
