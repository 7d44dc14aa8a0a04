#include "cenal/log.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <mutex>

namespace cenal::log {

namespace {

Level level_from_env() {
  const char* v = std::getenv("CENAL_LOG");
  if (v == nullptr) return Level::warn;
  if (std::strcmp(v, "error") == 0) return Level::error;
  if (std::strcmp(v, "warn") == 0) return Level::warn;
  if (std::strcmp(v, "info") == 0) return Level::info;
  if (std::strcmp(v, "debug") == 0) return Level::debug;
  return Level::warn;
}

std::atomic<Level>& level_slot() {
  static std::atomic<Level> lv{level_from_env()};
  return lv;
}

const char* tag(Level lv) {
  switch (lv) {
    case Level::error: return "error";
    case Level::warn: return "warn";
    case Level::info: return "info";
    case Level::debug: return "debug";
  }
  return "?";
}

}  // namespace

Level level() { return level_slot().load(std::memory_order_relaxed); }
void set_level(Level lv) { level_slot().store(lv, std::memory_order_relaxed); }

void write(Level lv, const std::string& msg) {
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  std::fprintf(stderr, "[cenal %s] %s\n", tag(lv), msg.c_str());
}

}  // namespace cenal::log
