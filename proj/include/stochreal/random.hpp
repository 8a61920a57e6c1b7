#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace stochreal {

/// Seedable Gaussian source: std::mt19937_64 (whose output sequence is fixed
/// by the standard) feeding a Box-Muller transform. std::normal_distribution
/// is avoided because its algorithm is implementation-defined.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in (0, 1], 53-bit resolution.
  double Uniform() {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  double StandardNormal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double radius = std::sqrt(-2.0 * std::log(Uniform()));
    const double angle = 2.0 * std::numbers::pi * Uniform();
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace stochreal
