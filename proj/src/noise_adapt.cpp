#include "ncbayes/noise_adapt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ncbayes/errors.hpp"

namespace ncbayes {

TemperedDensity::TemperedDensity(const ExpFamModel& model, Domain base, Eigen::VectorXd gamma_tilde,
                                 double alpha, double log_z_alpha)
    : model_(&model),
      base_(std::move(base)),
      gamma_tilde_(std::move(gamma_tilde)),
      alpha_(alpha),
      log_z_alpha_(log_z_alpha) {}

double TemperedDensity::log_density(std::span<const double> x) const {
  if (!base_.contains(x)) return -INFINITY;
  Eigen::VectorXd z(model_->p() + 1);
  model_->design(x, {z.data(), static_cast<std::size_t>(z.size())});
  return alpha_ * z.dot(gamma_tilde_) - log_z_alpha_;
}

LogDensity TemperedDensity::as_function() const {
  return [self = *this](std::span<const double> x) { return self.log_density(x); };
}

std::vector<std::size_t> resample_indices(std::span<const double> probs, int count, RandomStream& rng,
                                          ResampleScheme scheme) {
  require(count >= 1, "resample count must be positive");
  std::vector<double> cdf(probs.size());
  std::partial_sum(probs.begin(), probs.end(), cdf.begin());
  const double total = cdf.back();
  std::vector<std::size_t> out(static_cast<std::size_t>(count));
  auto locate = [&](double u) {
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u * total);
    return std::min(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
  };
  if (scheme == ResampleScheme::systematic) {
    const double u0 = rng.uniform() / count;
    for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = locate(u0 + static_cast<double>(i) / count);
  } else {
    for (auto& idx : out) idx = locate(rng.uniform());
  }
  return out;
}

TemperedResample tempered_resample(const TemperedNoiseState& state, int m, const ExpFamModel& model,
                                   RandomStream& rng, ResampleScheme scheme) {
  require(state.alpha > 0.0 && state.alpha <= 1.0, "tempering alpha must lie in (0, 1]");
  require(m >= 1, "noise count m must be positive");
  require(state.proposals >= m, "proposal count M must be at least m");
  require(state.gamma_tilde.size() == model.p() + 1, "gamma_tilde length does not match the model");
  require(state.base.dim() == model.domain().dim(), "base distribution dimension mismatch");

  const int big_m = state.proposals;
  const double log_q0 = -state.base.log_volume();
  RowMatrix proposals = state.base.sample_uniform(big_m, rng);
  std::vector<double> log_w(static_cast<std::size_t>(big_m));
  Eigen::VectorXd z(model.p() + 1);
  for (int j = 0; j < big_m; ++j) {
    model.design(row_span(proposals, j), {z.data(), static_cast<std::size_t>(z.size())});
    log_w[static_cast<std::size_t>(j)] = state.alpha * z.dot(state.gamma_tilde) - log_q0;
  }
  const double max_lw = *std::max_element(log_w.begin(), log_w.end());
  if (!std::isfinite(max_lw)) throw NumericalError("tempered importance weights are degenerate");
  std::vector<double> w(log_w.size());
  double sum = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    w[j] = std::exp(log_w[j] - max_lw);
    sum += w[j];
  }
  if (!(sum > 0.0) || !std::isfinite(sum)) throw NumericalError("tempered importance weights are degenerate");

  TemperedNoiseState next = state;
  next.log_z_alpha = max_lw + std::log(sum / big_m);
  next.last_ess = ess(w);

  for (auto& v : w) v /= sum;
  const auto idx = resample_indices(w, m, rng, scheme);
  RowMatrix noise(m, proposals.cols());
  for (int i = 0; i < m; ++i) noise.row(i) = proposals.row(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(i)]));

  TemperedDensity density(model, state.base, state.gamma_tilde, state.alpha, next.log_z_alpha);
  return {std::move(noise), std::move(density), std::move(next)};
}

double ess(std::span<const double> weights) {
  double s = 0.0, s2 = 0.0;
  for (double w : weights) {
    require(w >= 0.0 && std::isfinite(w), "ESS weights must be finite and nonnegative");
    s += w;
    s2 += w * w;
  }
  if (!(s2 > 0.0)) throw ValidationError("ESS needs at least one positive weight");
  return s * s / s2;
}

double ess_from_log_weights(std::span<const double> log_weights) {
  require(!log_weights.empty(), "ESS of an empty weight set");
  const double mx = *std::max_element(log_weights.begin(), log_weights.end());
  std::vector<double> w(log_weights.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(log_weights[i] - mx);
  return ess(w);
}

Eigen::VectorXd update_gamma_tilde(const Eigen::MatrixXd& batch) {
  require(batch.rows() >= 1, "mini-batch must be nonempty");
  return batch.colwise().mean().transpose();
}

}  // namespace ncbayes
