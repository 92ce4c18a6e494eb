#include "ncbayes/random.hpp"

#include <algorithm>
#include <cmath>

#include "ncbayes/errors.hpp"

namespace ncbayes {

RandomStream::RandomStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

double RandomStream::uniform() {
  // 53 random bits, shifted by half an ulp so 0 is never returned.
  const std::uint64_t bits = engine_() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() { return normal_(engine_); }

double RandomStream::exponential() { return -std::log(uniform()); }

double RandomStream::gamma(double shape) {
  require(shape > 0.0 && std::isfinite(shape), "gamma shape must be positive");
  if (shape < 1.0) {
    // Boost to shape+1 and rescale by U^{1/shape}.
    return gamma(shape + 1.0) * std::pow(uniform(), 1.0 / shape);
  }
  // Marsaglia-Tsang.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double RandomStream::inv_gamma(double shape, double scale) {
  require(scale > 0.0 && std::isfinite(scale), "inverse gamma scale must be positive and finite");
  return scale / gamma(shape);
}

double RandomStream::von_mises(double mu, double kappa) {
  require(kappa >= 0.0 && std::isfinite(kappa), "von Mises concentration must be finite and >= 0");
  if (kappa < 1e-8) return kTwoPi * uniform();
  // Best & Fisher (1979).
  const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
  const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
  const double r = (1.0 + rho * rho) / (2.0 * rho);
  double f;
  for (;;) {
    const double z = std::cos(M_PI * uniform());
    f = (1.0 + r * z) / (r + z);
    const double c = kappa * (r - f);
    const double u2 = uniform();
    if (c * (2.0 - c) - u2 > 0.0) break;
    if (std::log(c / u2) + 1.0 - c >= 0.0) break;
  }
  f = std::clamp(f, -1.0, 1.0);
  const double theta = uniform() > 0.5 ? mu + std::acos(f) : mu - std::acos(f);
  return wrap_angle(theta);
}

std::size_t RandomStream::index(std::size_t n) {
  require(n > 0, "index range must be nonempty");
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
}

Eigen::VectorXd RandomStream::normal_vector(Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
  return v;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t counter) {
  std::uint64_t z = master + (counter + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double wrap_angle(double x) {
  double y = std::fmod(x, kTwoPi);
  if (y < 0.0) y += kTwoPi;
  if (y >= kTwoPi) y = 0.0;
  return y;
}

}  // namespace ncbayes
