#include "ncbayes/shrinkage.hpp"

#include <cmath>

#include "ncbayes/errors.hpp"

namespace ncbayes {

PriorMode parse_prior_mode(const std::string& name) {
  if (name == "gaussian") return PriorMode::gaussian;
  if (name == "hs" || name == "horseshoe") return PriorMode::horseshoe;
  if (name == "ghs" || name == "grouped") return PriorMode::grouped;
  if (name == "rghs" || name == "regularized-grouped") return PriorMode::regularized_grouped;
  throw ValidationError("unknown prior mode '" + name + "'");
}

std::string to_string(PriorMode mode) {
  switch (mode) {
    case PriorMode::gaussian: return "gaussian";
    case PriorMode::horseshoe: return "hs";
    case PriorMode::grouped: return "ghs";
    case PriorMode::regularized_grouped: return "rghs";
  }
  return "?";
}

CoefficientLayout CoefficientLayout::torus(int d) {
  require(d >= 1, "torus dimension must be positive");
  return {2 * d, d * (d - 1) / 2, 4};
}

HorseshoeState HorseshoeState::initial(PriorMode mode, CoefficientLayout layout, double slab_c) {
  require(layout.node_count >= 0 && layout.group_count >= 0 && layout.group_size >= 1, "invalid layout");
  HorseshoeState s;
  s.mode = mode;
  s.layout = layout;
  const int locals = mode == PriorMode::gaussian ? 0 : s.grouped() ? layout.node_count : layout.total();
  s.lambda2 = Eigen::VectorXd::Ones(locals);
  s.nu = Eigen::VectorXd::Ones(locals);
  if (s.grouped()) {
    s.u2 = Eigen::VectorXd::Ones(layout.group_count);
    s.t = Eigen::VectorXd::Ones(layout.group_count);
  }
  if (std::isnan(slab_c)) slab_c = mode == PriorMode::regularized_grouped ? 1.0 : std::numeric_limits<double>::infinity();
  require(slab_c > 0.0, "slab width must be positive");
  s.slab_c = slab_c;
  return s;
}

namespace {

void check_phi(const HorseshoeState& state, const Eigen::VectorXd& phi) {
  require(phi.size() == state.layout.total(), "coefficient vector does not match the shrinkage layout");
  require(phi.allFinite(), "shrinkage update received non-finite coefficients");
}

}  // namespace

void update_local(HorseshoeState& state, const Eigen::VectorXd& phi, RandomStream& rng) {
  check_phi(state, phi);
  for (Eigen::Index k = 0; k < state.lambda2.size(); ++k) {
    state.lambda2[k] = rng.inv_gamma(1.0, phi[k] * phi[k] / (2.0 * state.tau2) + 1.0 / state.nu[k]);
    state.nu[k] = rng.inv_gamma(1.0, 1.0 + 1.0 / state.lambda2[k]);
  }
}

void update_group(HorseshoeState& state, const Eigen::VectorXd& phi, RandomStream& rng) {
  require(state.grouped(), "group update requires a grouped prior mode");
  check_phi(state, phi);
  const int g = state.layout.group_size;
  const double shape = 0.5 * (g + 1);
  for (int e = 0; e < state.layout.group_count; ++e) {
    const auto block = phi.segment(state.layout.node_count + e * g, g);
    const double scale = 0.5 * block.squaredNorm() / state.tau2 + 1.0 / state.t[e];
    state.u2[e] = rng.inv_gamma(shape, scale);
    state.t[e] = rng.inv_gamma(1.0, 1.0 + 1.0 / state.u2[e]);
  }
}

void update_global(HorseshoeState& state, const Eigen::VectorXd& phi, RandomStream& rng) {
  if (state.tau_fixed) return;
  check_phi(state, phi);
  const int total = state.layout.total();
  double ss = 0.0;
  for (Eigen::Index k = 0; k < state.lambda2.size(); ++k) ss += phi[k] * phi[k] / state.lambda2[k];
  if (state.grouped()) {
    const int g = state.layout.group_size;
    for (int e = 0; e < state.layout.group_count; ++e)
      ss += phi.segment(state.layout.node_count + e * g, g).squaredNorm() / state.u2[e];
  }
  state.tau2 = rng.inv_gamma(0.5 * (total + 1), 0.5 * ss + 1.0 / state.xi);
  state.xi = rng.inv_gamma(1.0, 1.0 + 1.0 / state.tau2);
}

Eigen::VectorXd prior_precision(const HorseshoeState& state, double beta_precision, bool with_beta) {
  const int total = state.layout.total();
  Eigen::VectorXd prec(total + (with_beta ? 1 : 0));
  const double slab = std::isfinite(state.slab_c) ? 1.0 / (state.slab_c * state.slab_c) : 0.0;
  for (Eigen::Index k = 0; k < state.lambda2.size(); ++k) prec[k] = slab + 1.0 / (state.lambda2[k] * state.tau2);
  if (state.grouped()) {
    const int g = state.layout.group_size;
    for (int e = 0; e < state.layout.group_count; ++e)
      prec.segment(state.layout.node_count + e * g, g).setConstant(slab + 1.0 / (state.u2[e] * state.tau2));
  }
  if (with_beta) prec[total] = beta_precision;
  return prec;
}

double fixed_tau_value(int d, int n, int m) {
  require(d >= 1 && n >= 1 && m >= 1, "fixed tau needs d, n, m >= 1");
  const double d2 = static_cast<double>(d) * d;
  const double p0 = std::floor(1.7 * d2 + 0.5);
  if (p0 >= 2.0 * d2) throw ValidationError("fixed tau undefined: p0 >= 2 d^2 (d must be at least 2)");
  return p0 / (std::sqrt(static_cast<double>(n) + m) * (2.0 * d2 - p0));
}

ShrinkagePrior::ShrinkagePrior(HorseshoeState state, bool with_beta, double beta_variance, double gaussian_variance)
    : state_(std::move(state)),
      with_beta_(with_beta),
      beta_precision_(1.0 / beta_variance),
      gaussian_precision_(1.0 / gaussian_variance) {
  require(beta_variance > 0.0 && gaussian_variance > 0.0, "prior variances must be positive");
  const int size = state_.layout.total() + (with_beta_ ? 1 : 0);
  precision_ = Eigen::MatrixXd::Zero(size, size);
  shift_ = Eigen::VectorXd::Zero(size);
  refresh_precision();
}

void ShrinkagePrior::refresh_precision() {
  if (state_.mode == PriorMode::gaussian) {
    precision_.diagonal().setConstant(gaussian_precision_);
    if (with_beta_) precision_(state_.layout.total(), state_.layout.total()) = beta_precision_;
    return;
  }
  precision_.diagonal() = prior_precision(state_, beta_precision_, with_beta_);
}

void ShrinkagePrior::update(const Eigen::VectorXd& gamma, RandomStream& rng) {
  if (state_.mode == PriorMode::gaussian) return;
  const Eigen::VectorXd phi = gamma.head(state_.layout.total());
  update_local(state_, phi, rng);
  if (state_.grouped()) update_group(state_, phi, rng);
  update_global(state_, phi, rng);
  refresh_precision();
}

}  // namespace ncbayes
