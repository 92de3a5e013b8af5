#pragma once

#include <cstdint>

#include "etlqg/linalg.hpp"
#include "etlqg/model.hpp"

namespace etlqg {

// Counter-based uniform generator: output(i) = mix64(seed + (i+1)*GAMMA),
// the SplitMix64 sequence (Steele, Lea & Flood; the Java SplittableRandom
// mixer). Stateless given (seed, counter), so a stream can be replayed or
// split without touching global state, and identical seeds give identical
// draws bit for bit.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  static std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next_u64() {
    counter_ += 1;
    return mix64(seed_ + counter_ * 0x9E3779B97F4A7C15ULL);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in (0, 1]; safe as a log() argument.
  double next_double_open() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller. Draws are generated in pairs; the
  // spare is cached so the consumed-uniform count per normal is fixed.
  double next_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = next_double_open();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;  // 2*pi
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  Vector next_normal_vector(Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = next_normal();
    return v;
  }

  // Uniform integer in [0, bound) by rejection-free modulo of the high bits;
  // bias is negligible for the small bounds used here.
  std::uint64_t next_below(std::uint64_t bound) { return next_u64() % bound; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Per-episode noise source: draws x0 ~ N(x0_mean, x0_cov) first, then
// w_0, ..., w_{T-1} ~ N(0, Sigma_w) in order. The draw order is part of the
// reproducibility contract (common random numbers across policies).
class NoiseStream {
 public:
  NoiseStream(const SystemModel& model, std::uint64_t seed)
      : rng_(seed),
        seed_(seed),
        x0_mean_(model.x0_mean),
        chol_x0_(cholesky_factor(model.x0_cov)),
        chol_w_(cholesky_factor(model.Sigma_w)) {}

  std::uint64_t seed() const { return seed_; }

  Vector draw_x0() {
    return x0_mean_ + chol_x0_ * rng_.next_normal_vector(x0_mean_.size());
  }

  Vector draw_w() {
    return chol_w_ * rng_.next_normal_vector(chol_w_.rows());
  }

 private:
  CounterRng rng_;
  std::uint64_t seed_;
  Vector x0_mean_;
  Matrix chol_x0_;
  Matrix chol_w_;
};

}  // namespace etlqg
