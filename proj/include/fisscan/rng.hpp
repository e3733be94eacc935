#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace fisscan {

// 64-bit finalizer used to key and step the streams.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Counter-based splittable stream: the state is a keyed counter derived from
// (seed, replicate, row), stepped by a fixed odd increment and passed through
// mix64. Streams for distinct keys are independent for Monte Carlo purposes
// and their draws do not depend on scheduling, so replicate r / row j always
// sees the same values no matter how work is distributed over threads.
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, std::uint64_t replicate, std::int64_t row)
      : state_(key(seed, replicate, row)) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix64(state_);
  }

  // Uniform on the open interval (0, 1); safe to pass through log().
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via the Box-Muller transform; the second variate of each
  // pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(theta);
    has_spare_ = true;
    return radius * std::cos(theta);
  }

  double exponential(double rate) { return -std::log(uniform01()) / rate; }

  // Marsaglia-Tsang gamma sampler.
  double gamma(double shape, double rate) {
    if (shape < 1.0) {
      const double u = uniform01();
      return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x;
      double v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
  }

  double student_t(double nu) {
    const double z = normal();
    const double chi2 = 2.0 * gamma(nu / 2.0, 1.0);
    return z / std::sqrt(chi2 / nu);
  }

 private:
  static std::uint64_t key(std::uint64_t seed, std::uint64_t replicate, std::int64_t row) {
    std::uint64_t k = mix64(seed ^ 0xA0761D6478BD642Full);
    k = mix64(k ^ (replicate * 0xE7037ED1A0B428DBull + 0x8EBC6AF09C88C6E3ull));
    k = mix64(k ^ (static_cast<std::uint64_t>(row) * 0x589965CC75374CC3ull + 0x1D8E4E27C47D124Full));
    return k;
  }

  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fisscan
