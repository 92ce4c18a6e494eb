#include "ncbayes/hscore.hpp"

#include <cmath>
#include <string>

#include "ncbayes/errors.hpp"
#include "ncbayes/torus_graph.hpp"

namespace ncbayes {

Eigen::VectorXd ScoreMatchingMatrices::minimizer() const {
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(gamma);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw NumericalError("score-matching matrix is not positive definite");
  return ldlt.solve(h);
}

ScoreMatchingMatrices score_matrices(const RowMatrix& data) {
  require(data.rows() >= 1 && data.cols() >= 1, "score matching needs a nonempty data set");
  require(data.allFinite(), "angles must be finite");
  const int n = static_cast<int>(data.rows());
  const int d = static_cast<int>(data.cols());
  const int K = torus_coefficient_count(d);
  ScoreMatchingMatrices sm;
  sm.n = n;
  sm.d = d;
  sm.gamma = Eigen::MatrixXd::Zero(K, K);
  sm.h = Eigen::VectorXd::Zero(K);

  constexpr int kChunk = 128;
  Eigen::MatrixXd grads;
  for (int start = 0; start < n; start += kChunk) {
    const int rows = std::min(kChunk, n - start);
    grads.setZero(static_cast<Eigen::Index>(rows) * d, K);
    for (int r = 0; r < rows; ++r) {
      const auto x = data.row(start + r);
      const Eigen::Index base = static_cast<Eigen::Index>(r) * d;
      for (int j = 0; j < d; ++j) {
        const double c = std::cos(x[j]), s = std::sin(x[j]);
        grads(base + j, 2 * j) = -s;
        grads(base + j, 2 * j + 1) = c;
        sm.h[2 * j] += c;
        sm.h[2 * j + 1] += s;
      }
      for (int j = 0; j < d; ++j)
        for (int k = j + 1; k < d; ++k) {
          const Eigen::Index col = 2 * d + 4 * torus_edge_index(j, k, d);
          const double dl = x[j] - x[k], sl = x[j] + x[k];
          const double cd = std::cos(dl), sd = std::sin(dl), cs = std::cos(sl), ss = std::sin(sl);
          // Derivatives with respect to x_j, then x_k.
          grads(base + j, col) = -sd;
          grads(base + j, col + 1) = cd;
          grads(base + j, col + 2) = -ss;
          grads(base + j, col + 3) = cs;
          grads(base + k, col) = sd;
          grads(base + k, col + 1) = -cd;
          grads(base + k, col + 2) = -ss;
          grads(base + k, col + 3) = cs;
          // Minus the second derivatives, summed over x_j and x_k.
          sm.h[col] += 2.0 * cd;
          sm.h[col + 1] += 2.0 * sd;
          sm.h[col + 2] += 2.0 * cs;
          sm.h[col + 3] += 2.0 * ss;
        }
    }
    sm.gamma.selfadjointView<Eigen::Lower>().rankUpdate(grads.transpose());
  }
  sm.gamma.triangularView<Eigen::StrictlyUpper>() = sm.gamma.transpose();
  sm.gamma /= n;
  sm.h /= n;
  return sm;
}

void HBayesConfig::validate() const {
  require(w > 0.0 && std::isfinite(w), "loss scale w must be positive");
  require(gaussian_variance > 0.0, "Gaussian prior variance must be positive");
}

GaussianConditional hbayes_conditional(const ScoreMatchingMatrices& sm, const Eigen::MatrixXd& prior_precision,
                                       double w) {
  require(prior_precision.rows() == sm.gamma.rows(), "prior precision does not match 2d^2");
  GaussianConditional c;
  const double nw = sm.n * w;
  c.precision = prior_precision + nw * sm.gamma;
  c.chol = robust_cholesky(c.precision, &c.jittered);
  c.mean = c.chol.solve(nw * sm.h);
  return c;
}

HBayesFit run_hbayes(const ScoreMatchingMatrices& sm, const HBayesConfig& hc, const GibbsConfig& cfg) {
  cfg.validate();
  hc.validate();
  const int K = torus_coefficient_count(sm.d);
  ShrinkagePrior prior(HorseshoeState::initial(hc.prior, CoefficientLayout::torus(sm.d), hc.slab_c), false, 1.0,
                       hc.gaussian_variance);
  RandomStream rng(cfg.seed);
  HBayesFit out;
  out.d = sm.d;
  out.draws.column_names = torus_column_names(sm.d, false);
  out.draws.draws.resize(cfg.kept(), K);
  out.draws.log_likelihood.resize(cfg.kept());
  int row = 0;
  for (int it = 0; it < cfg.iterations; ++it) {
    const GaussianConditional cond = hbayes_conditional(sm, prior.precision(), hc.w);
    if (cond.jittered) ++out.draws.jitter_retries;
    const Eigen::VectorXd phi = cond.draw(rng);
    if (!phi.allFinite()) throw NumericalError("non-finite H-Bayes draw at iteration " + std::to_string(it + 1));
    prior.update(phi, rng);
    if (it >= cfg.burn_in && (it - cfg.burn_in) % cfg.thin == 0 && row < cfg.kept()) {
      out.draws.draws.row(row) = phi.transpose();
      out.draws.log_likelihood[row] = -sm.n * hc.w * sm.loss(phi);
      prior.record();
      ++row;
    }
  }
  if (!out.draws.draws.allFinite()) throw NumericalError("H-Bayes draws contain non-finite values");
  out.tau2_trace = prior.tau2_trace();
  return out;
}

HBayesFit run_hbayes(const RowMatrix& data, const HBayesConfig& hc, const GibbsConfig& cfg) {
  RowMatrix wrapped = data;
  wrap_phases(wrapped);
  return run_hbayes(score_matrices(wrapped), hc, cfg);
}

}  // namespace ncbayes
