#pragma once

#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "ncbayes/expfam.hpp"
#include "ncbayes/gibbs.hpp"
#include "ncbayes/shrinkage.hpp"

namespace ncbayes {

// Quadratic score-matching loss L(phi) = phi' Gamma phi / 2 - phi' H for the
// torus graph statistic (no constant entry).
struct ScoreMatchingMatrices {
  int n = 0;
  int d = 0;
  Eigen::MatrixXd gamma;  // 2d^2 x 2d^2
  Eigen::VectorXd h;      // 2d^2

  double loss(const Eigen::VectorXd& phi) const { return 0.5 * phi.dot(gamma * phi) - phi.dot(h); }
  Eigen::VectorXd minimizer() const;
};

// Gamma = n^{-1} sum_i sum_a d_a t(x_i) d_a t(x_i)',
// H     = -n^{-1} sum_i sum_a d_a^2 t(x_i).
ScoreMatchingMatrices score_matrices(const RowMatrix& data);

struct HBayesConfig {
  double w = 1.0;
  PriorMode prior = PriorMode::grouped;
  double slab_c = std::numeric_limits<double>::quiet_NaN();
  double gaussian_variance = 10.0;

  void validate() const;
};

struct HBayesFit {
  int d = 0;
  PosteriorDraws draws;  // kept x 2d^2; log_likelihood holds -n w L(phi)
  std::vector<double> tau2_trace;
};

// phi | . ~ N(B (n w H), B), B^{-1} = prior precision + n w Gamma.
GaussianConditional hbayes_conditional(const ScoreMatchingMatrices& sm, const Eigen::MatrixXd& prior_precision,
                                       double w);

HBayesFit run_hbayes(const ScoreMatchingMatrices& sm, const HBayesConfig& hc, const GibbsConfig& cfg);
HBayesFit run_hbayes(const RowMatrix& data, const HBayesConfig& hc, const GibbsConfig& cfg);

}  // namespace ncbayes
