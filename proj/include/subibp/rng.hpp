#pragma once

#include <cmath>
#include <cstdint>

namespace subibp {

namespace rng_detail {

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace rng_detail

// Stream purposes keep independent parts of an experiment on disjoint
// substreams of the same master seed.
namespace purpose {
constexpr std::uint64_t kPaths = 1;
constexpr std::uint64_t kMoments = 2;
constexpr std::uint64_t kOracle = 3;
constexpr std::uint64_t kValidate = 4;
constexpr std::uint64_t kBundles = 5;
}  // namespace purpose

// Counter-based stream: the state is a key derived from
// (master seed, purpose, index) plus a draw counter, so results are a pure
// function of those three values and never depend on thread scheduling.
// The per-draw output is the SplitMix64 sequence started at the key.
class RngStream {
 public:
  RngStream(std::uint64_t master, std::uint64_t purpose, std::uint64_t index) {
    using rng_detail::mix64;
    std::uint64_t h = mix64(master + 0x9E3779B97F4A7C15ull);
    h = mix64(h ^ (purpose * 0xD1B54A32D192ED03ull + 0x8CB92BA72F3D8DD7ull));
    h = mix64(h ^ (index * 0xEB44ACCAB455D165ull + 0x2545F4914F6CDD1Dull));
    key_ = h;
  }

  std::uint64_t next_u64() {
    std::uint64_t z = key_ + (++counter_) * 0x9E3779B97F4A7C15ull;
    return rng_detail::mix64(z);
  }

  // [0, 1)
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // (0, 1)
  double uniform_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // mean-one exponential
  double exponential() { return -std::log(uniform_open()); }

  // standard normal, Box-Muller with pair caching
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform_open()));
    const double theta = 6.283185307179586476925286766559 * uniform();
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
  }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace subibp
