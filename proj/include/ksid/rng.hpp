// Seeded random numbers with a platform-independent stream.
//
// The engine is std::mt19937_64, whose output sequence is pinned by the
// standard. The standard *distributions* are not, so the mappings to doubles
// are done here by hand: uniform doubles take the top 53 bits of one engine
// output, Gaussians use Box-Muller on two uniforms. A fixed seed therefore
// reproduces the same uniform stream on any conforming implementation.
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace ksid {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double low, double high) {
    return low + (high - low) * uniform01();
  }

  // Standard normal deviate. Consumes two uniforms per pair; the spare is
  // cached. Note: bitwise reproducibility of this stream additionally depends
  // on the platform's log/cos/sin rounding, unlike the uniform stream.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ksid
