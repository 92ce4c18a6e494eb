#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace ncbayes {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Seeded random source. Equal seeds give equal draw sequences on the same
// standard library; a stream must not be shared between threads.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  // Uniform on the open interval (0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  double exponential();
  // Gamma with the given shape and unit scale.
  double gamma(double shape);
  // Inverse gamma IG(shape, scale), density proportional to x^{-shape-1} exp(-scale/x).
  double inv_gamma(double shape, double scale);
  double chi_squared(double dof) { return 2.0 * gamma(0.5 * dof); }
  // von Mises on [0, 2pi).
  double von_mises(double mu, double kappa);
  // Uniform integer in [0, n).
  std::size_t index(std::size_t n);

  Eigen::VectorXd normal_vector(Eigen::Index n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

// SplitMix64 finalizer; derives independent per-replication seeds from a
// master seed and a counter.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t counter);

// Wraps an angle into [0, 2pi).
double wrap_angle(double x);

}  // namespace ncbayes
