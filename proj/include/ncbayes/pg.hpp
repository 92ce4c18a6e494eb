#pragma once

#include "ncbayes/random.hpp"

namespace ncbayes {

// Tilt parameter of PG(1, c). PG(1, c) and PG(1, -c) coincide, so only |c|
// is stored.
class PGTilt {
 public:
  explicit PGTilt(double c);
  double c() const { return c_; }

 private:
  double c_;
};

// One exact draw from PG(1, c) by the alternating-series rejection sampler
// (Devroye's method as adapted by Polson, Scott & Windle).
double sample_pg1(PGTilt tilt, RandomStream& rng);

// E[omega] = tanh(c/2) / (2c), with the c -> 0 limit 1/4.
double pg1_mean(PGTilt tilt);

// Var[omega] for PG(1, c); 1/24 at c = 0.
double pg1_variance(PGTilt tilt);

// log Phi(x) for the standard normal cdf, accurate in the far left tail.
double log_normal_cdf(double x);

}  // namespace ncbayes
