#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace cenal::rng {

/// One splitmix64 step; also the mixing function for seed derivation.
std::uint64_t splitmix64(std::uint64_t& state);

/// Derive a child seed from a parent seed and a tag path.  The chain is a
/// splitmix64 hash over the path, so sibling streams (different tags) and
/// nested streams (longer paths) never collide in practice.
std::uint64_t derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

// Fixed stream tags.  All randomness in the project flows from a master
// seed through derive() with these tags; nothing reads the clock.
namespace tag {
inline constexpr std::uint64_t dataset = 0x01;
inline constexpr std::uint64_t repetition = 0x02;
inline constexpr std::uint64_t split = 0x03;
inline constexpr std::uint64_t model = 0x04;
inline constexpr std::uint64_t init = 0x05;
inline constexpr std::uint64_t train = 0x06;
inline constexpr std::uint64_t score = 0x07;
inline constexpr std::uint64_t masks = 0x08;
inline constexpr std::uint64_t point = 0x09;
}  // namespace tag

/// Seeded stream of uniforms and normals.  The engine is mt19937_64 (the
/// output sequence is pinned by the standard) and the float conversions are
/// done here rather than with std distributions, whose algorithms are
/// implementation-defined.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform();

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);

  /// Standard normal via Box-Muller; pairs are cached so consecutive calls
  /// consume engine output deterministically.
  double normal();

  double normal(double mean, double stddev);

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace cenal::rng
