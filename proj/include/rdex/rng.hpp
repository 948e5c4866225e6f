#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace rdex {

// Source of all randomness used by the engine. Every stochastic step pulls
// through this interface so runs are reproducible from a single seed and
// tests can substitute a scripted sequence.
//
// Draw primitives are deliberately minimal; derived samplers (normal with
// mean/sigma, Cauchy with location/scale) are built on top of the standard
// variates so a hand trace only needs the raw draws.
class Rng {
 public:
  virtual ~Rng() = default;

  /// Uniform double in [0, 1).
  virtual double uniform01() = 0;

  /// Uniform integer in [0, n). Requires n >= 1.
  virtual std::uint64_t uniform_int(std::uint64_t n) = 0;

  /// Standard normal variate.
  virtual double normal_std() = 0;

  /// Standard Cauchy variate.
  virtual double cauchy_std() = 0;

  double normal(double mean, double sigma) { return mean + sigma * normal_std(); }
  double cauchy(double location, double scale) { return location + scale * cauchy_std(); }
};

// Mersenne Twister backed implementation. uniform01 uses the top 53 bits of
// one 64-bit word; normal_std is a non-caching Box-Muller transform (two
// uniforms per variate, always) so the draw count per operation is fixed and
// platform independent.
class Mt64Rng final : public Rng {
 public:
  explicit Mt64Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform01() override { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  std::uint64_t uniform_int(std::uint64_t n) override { return n > 1 ? gen_() % n : 0; }

  double normal_std() override {
    double u1 = 1.0 - uniform01();  // (0, 1], keeps the log finite
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

  double cauchy_std() override { return std::tan(pi * (uniform01() - 0.5)); }

 private:
  static constexpr double pi = 3.14159265358979323846;
  static constexpr double two_pi = 2.0 * pi;
  std::mt19937_64 gen_;
};

}  // namespace rdex
