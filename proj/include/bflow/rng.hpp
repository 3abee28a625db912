#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace bflow {

/// Deterministic random stream: a seeded mt19937_64 plus the variate
/// transforms used by the samplers. All draws are defined here rather than
/// through std::*_distribution so a fixed seed reproduces the same sequence
/// regardless of standard-library version.
class RandomStream {
public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0,1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via the Marsaglia polar method (second variate cached).
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double v1 = 0.0, v2 = 0.0, s = 0.0;
    do {
      v1 = 2.0 * uniform() - 1.0;
      v2 = 2.0 * uniform() - 1.0;
      s = v1 * v1 + v2 * v2;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    cached_ = v2 * f;
    has_cached_ = true;
    return v1 * f;
  }

  /// Derives an independent stream seed; used for chain restarts.
  static std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace bflow
