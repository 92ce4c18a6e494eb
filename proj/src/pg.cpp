#include "ncbayes/pg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ncbayes/errors.hpp"

namespace ncbayes {
namespace {

// Switch point between the two series representations of the J*(1, z) density.
constexpr double kTrunc = 0.64;
constexpr double kPi2 = M_PI * M_PI;

// n-th coefficient of the alternating series for the J*(1, 0) density.
double series_coef(int n, double x) {
  const double k = n + 0.5;
  if (x > kTrunc) return M_PI * k * std::exp(-0.5 * k * k * kPi2 * x);
  return M_PI * k * std::pow(2.0 / (M_PI * x), 1.5) * std::exp(-2.0 * k * k / x);
}

double log_sum_exp2(double a, double b) {
  const double m = std::max(a, b);
  if (m == -INFINITY) return m;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// log P(X < t) for X ~ IG(mu = 1/z, shape 1); z = 0 is the Levy limit.
double log_pigauss(double t, double z) {
  const double rt = std::sqrt(t);
  if (z == 0.0) return std::log(std::erfc(1.0 / (std::sqrt(2.0) * rt)));
  const double a = log_normal_cdf((t * z - 1.0) / rt);
  const double b = 2.0 * z + log_normal_cdf(-(t * z + 1.0) / rt);
  return log_sum_exp2(a, b);
}

double rinvgauss(double mu, RandomStream& rng) {
  const double nv = rng.normal();
  const double y = nv * nv;
  const double x = mu + 0.5 * mu * mu * y - 0.5 * mu * std::sqrt(4.0 * mu * y + mu * mu * y * y);
  return rng.uniform() > mu / (mu + x) ? mu * mu / x : x;
}

// IG(1/z, 1) truncated to (0, t).
double rtigauss(double z, double t, RandomStream& rng) {
  if (z == 0.0 || 1.0 / z > t) {
    for (;;) {
      double e1, e2;
      do {
        e1 = rng.exponential();
        e2 = rng.exponential();
      } while (e1 * e1 > 2.0 * e2 / t);
      const double x = t / ((1.0 + t * e1) * (1.0 + t * e1));
      if (rng.uniform() <= std::exp(-0.5 * z * z * x)) return x;
    }
  }
  for (;;) {
    const double x = rinvgauss(1.0 / z, rng);
    if (x < t) return x;
  }
}

}  // namespace

PGTilt::PGTilt(double c) : c_(std::fabs(c)) {
  if (!std::isfinite(c)) throw ValidationError("PG tilt must be finite, got " + std::to_string(c));
}

double log_normal_cdf(double x) {
  if (x > -30.0) return std::log(0.5 * std::erfc(-x / std::sqrt(2.0)));
  // Asymptotic expansion of the Mills ratio.
  const double x2 = x * x;
  const double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
  return -0.5 * x2 - std::log(-x) - 0.5 * std::log(kTwoPi) + std::log(series);
}

double sample_pg1(PGTilt tilt, RandomStream& rng) {
  // PG(1, c) = J*(1, c/2) / 4.
  const double z = 0.5 * tilt.c();
  const double t = kTrunc;
  const double fz = 0.125 * kPi2 + 0.5 * z * z;

  // Mixture weights of the exponential (right) and truncated inverse
  // Gaussian (left) proposal pieces, in log space.
  const double log_p = std::log(M_PI / (2.0 * fz)) - fz * t;
  const double log_q = std::log(2.0) - z + log_pigauss(t, z);
  const double prob_right = 1.0 / (1.0 + std::exp(log_q - log_p));

  for (;;) {
    const double x = rng.uniform() < prob_right ? t + rng.exponential() / fz : rtigauss(z, t, rng);
    double s = series_coef(0, x);
    const double y = rng.uniform() * s;
    for (int n = 1;; ++n) {
      if (n % 2 == 1) {
        s -= series_coef(n, x);
        if (y <= s) return 0.25 * x;
      } else {
        s += series_coef(n, x);
        if (y > s) break;
      }
    }
  }
}

double pg1_mean(PGTilt tilt) {
  const double c = tilt.c();
  if (c < 1e-6) return 0.25 - c * c / 48.0;
  return std::tanh(0.5 * c) / (2.0 * c);
}

double pg1_variance(PGTilt tilt) {
  const double c = tilt.c();
  if (c > 40.0) return (1.0 - 2.0 * c * std::exp(-c)) / (2.0 * c * c * c);
  const double ch = std::cosh(0.5 * c);
  if (c < 1e-2) {
    const double c2 = c * c;
    return (1.0 / 6.0 + c2 / 120.0 + c2 * c2 / 5040.0) / (4.0 * ch * ch);
  }
  return (std::sinh(c) - c) / (4.0 * c * c * c * ch * ch);
}

}  // namespace ncbayes
