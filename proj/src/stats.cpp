#include "ncbayes/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

#include "ncbayes/errors.hpp"

namespace ncbayes {

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log1p_exp(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double quantile_sorted(std::span<const double> sorted, double prob) {
  require(!sorted.empty(), "quantile of an empty sample");
  require(prob >= 0.0 && prob <= 1.0, "quantile probability must lie in [0, 1]");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double quantile(std::span<const double> values, double prob) {
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  return quantile_sorted(v, prob);
}

double median(std::span<const double> values) { return quantile(values, 0.5); }

double mean(std::span<const double> values) {
  require(!values.empty(), "mean of an empty sample");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values) {
  require(values.size() >= 2, "variance needs at least two values");
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return ss / static_cast<double>(values.size() - 1);
}

Eigen::VectorXd column_quantile(const Eigen::MatrixXd& draws, double prob) {
  Eigen::VectorXd out(draws.cols());
  std::vector<double> col(static_cast<std::size_t>(draws.rows()));
  for (Eigen::Index j = 0; j < draws.cols(); ++j) {
    for (Eigen::Index i = 0; i < draws.rows(); ++i) col[static_cast<std::size_t>(i)] = draws(i, j);
    std::sort(col.begin(), col.end());
    out[j] = quantile_sorted(col, prob);
  }
  return out;
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  require(!a.empty() && !b.empty(), "KS test needs nonempty samples");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size()), nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v) ++i;
    while (j < y.size() && y[j] <= v) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_one_sample(std::span<const double> a, const std::function<double(double)>& cdf) {
  require(!a.empty(), "KS test needs a nonempty sample");
  std::vector<double> x(a.begin(), a.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, std::fabs(f - static_cast<double>(i) / n), std::fabs(static_cast<double>(i + 1) / n - f)});
  }
  return d;
}

double ks_pvalue(double stat, double n_eff) {
  const double lambda = (std::sqrt(n_eff) + 0.12 + 0.11 / std::sqrt(n_eff)) * stat;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = 2.0 * ((k % 2 == 1) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::fabs(term) < 1e-12) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

double chi_squared_pvalue(double stat, double dof) {
  require(dof > 0.0, "chi-squared degrees of freedom must be positive");
  if (stat <= 0.0) return 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), stat));
}

double chi_squared_homogeneity(std::span<const double> counts_a, std::span<const double> counts_b) {
  require(counts_a.size() == counts_b.size(), "count vectors must have equal length");
  const double na = std::accumulate(counts_a.begin(), counts_a.end(), 0.0);
  const double nb = std::accumulate(counts_b.begin(), counts_b.end(), 0.0);
  require(na > 0.0 && nb > 0.0, "chi-squared test needs nonempty samples");
  double stat = 0.0;
  int bins = 0;
  for (std::size_t k = 0; k < counts_a.size(); ++k) {
    const double tot = counts_a[k] + counts_b[k];
    if (tot <= 0.0) continue;
    ++bins;
    const double ea = tot * na / (na + nb), eb = tot * nb / (na + nb);
    stat += (counts_a[k] - ea) * (counts_a[k] - ea) / ea + (counts_b[k] - eb) * (counts_b[k] - eb) / eb;
  }
  require(bins >= 2, "chi-squared test needs at least two occupied bins");
  return chi_squared_pvalue(stat, bins - 1);
}

CircularSummary circular_summary(std::span<const double> angles) {
  require(!angles.empty(), "circular summary of an empty sample");
  double c = 0.0, s = 0.0;
  for (double a : angles) {
    c += std::cos(a);
    s += std::sin(a);
  }
  const double n = static_cast<double>(angles.size());
  return {std::atan2(s, c), std::hypot(c, s) / n};
}

double autocorrelation(std::span<const double> trace, int lag) {
  require(lag >= 0 && static_cast<std::size_t>(lag) < trace.size(), "lag out of range");
  const double m = mean(trace);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    den += (trace[i] - m) * (trace[i] - m);
    if (i + static_cast<std::size_t>(lag) < trace.size()) num += (trace[i] - m) * (trace[i + static_cast<std::size_t>(lag)] - m);
  }
  return den > 0.0 ? num / den : 0.0;
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace ncbayes
