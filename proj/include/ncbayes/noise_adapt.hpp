#pragma once

#include <span>

#include <Eigen/Dense>

#include "ncbayes/expfam.hpp"
#include "ncbayes/random.hpp"

namespace ncbayes {

enum class ResampleScheme { multinomial, systematic };

// State of the tempered noise q_alpha(x) proportional to exp{alpha z(x)' gamma_tilde},
// sampled by importance resampling from a uniform base q0.
struct TemperedNoiseState {
  Domain base;
  Eigen::VectorXd gamma_tilde;
  double alpha = 0.2;
  int proposals = 0;  // M
  double last_ess = 0.0;
  double log_z_alpha = 0.0;
};

// Normalized tempered density q_alpha(x) = exp{alpha z(x)' gamma_tilde} / Z_alpha_hat,
// zero outside the base support.
class TemperedDensity {
 public:
  TemperedDensity(const ExpFamModel& model, Domain base, Eigen::VectorXd gamma_tilde, double alpha,
                  double log_z_alpha);

  double log_density(std::span<const double> x) const;
  LogDensity as_function() const;

 private:
  const ExpFamModel* model_;
  Domain base_;
  Eigen::VectorXd gamma_tilde_;
  double alpha_;
  double log_z_alpha_;
};

struct TemperedResample {
  RowMatrix noise;
  TemperedDensity density;
  TemperedNoiseState state;
};

// Draw M proposals from q0, weight by exp{alpha z' gamma_tilde}/q0, estimate
// Z_alpha, and resample m points with probability proportional to the weights.
TemperedResample tempered_resample(const TemperedNoiseState& state, int m, const ExpFamModel& model,
                                   RandomStream& rng,
                                   ResampleScheme scheme = ResampleScheme::multinomial);

// (sum w)^2 / sum w^2.
double ess(std::span<const double> weights);
// ESS of weights given on the log scale.
double ess_from_log_weights(std::span<const double> log_weights);

// Componentwise mean of a mini-batch of gamma draws (rows).
Eigen::VectorXd update_gamma_tilde(const Eigen::MatrixXd& batch);

// Resampled indices for normalized probabilities.
std::vector<std::size_t> resample_indices(std::span<const double> probs, int count, RandomStream& rng,
                                          ResampleScheme scheme);

}  // namespace ncbayes
