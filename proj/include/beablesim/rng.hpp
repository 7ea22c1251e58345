#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace beablesim {

/// Deterministic per-trial random stream.  Identical (seed, stream_id)
/// always reproduces the identical draw sequence; distinct stream ids give
/// decorrelated streams, so trials can run in parallel and still aggregate
/// to byte-identical results.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_id_(stream_id), engine_(mix(seed, stream_id)) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Exponential with the given rate via inverse CDF.
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  /// Exponential with the given rate conditioned on the value being <= hi.
  double exponential_truncated(double rate, double hi) {
    // 1 - e^{-rate*hi} = -expm1(-rate*hi); inverse CDF of the conditional law.
    return -std::log1p(uniform() * std::expm1(-rate * hi)) / rate;
  }

 private:
  static std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream_id) {
    std::uint64_t state = seed;
    std::uint64_t a = splitmix64(state);
    state ^= 0xD1B54A32D192ED03ull * (stream_id + 1);
    std::uint64_t b = splitmix64(state);
    return a ^ (b + 0x9E3779B97F4A7C15ull);
  }

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

}  // namespace beablesim
