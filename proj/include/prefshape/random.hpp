#pragma once

#include <cstdint>
#include <random>

#include "prefshape/model.hpp"

namespace prefshape {

/// Seed-addressable random stream. Every sample path in the library draws
/// from one of these, so a (seed, config) pair replays a run exactly.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform on {0, ..., n - 1}.
  Index index(Index n) {
    return std::uniform_int_distribution<Index>(0, n - 1)(engine_);
  }

  double beta(double a, double b) {
    const double x = std::gamma_distribution<double>(a, 1.0)(engine_);
    const double y = std::gamma_distribution<double>(b, 1.0)(engine_);
    return x / (x + y);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace prefshape
