#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ncbayes/expfam.hpp"
#include "ncbayes/noise_adapt.hpp"
#include "ncbayes/random.hpp"

namespace ncbayes {

// N(A0, B0) prior on gamma.
struct GaussianPrior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  static GaussianPrior isotropic(Eigen::Index size, double variance);
  void validate() const;
};

// Gaussian full conditional N(A1, B1), kept in precision form.
struct GaussianConditional {
  Eigen::VectorXd mean;
  Eigen::MatrixXd precision;
  Eigen::LLT<Eigen::MatrixXd> chol;
  bool jittered = false;

  Eigen::MatrixXd covariance() const;
  Eigen::VectorXd draw(RandomStream& rng) const;
};

// Cholesky of a symmetric precision with one jitter retry of
// 1e-8 * trace / dim on the diagonal. Throws NumericalError on failure.
Eigen::LLT<Eigen::MatrixXd> robust_cholesky(Eigen::MatrixXd& precision, bool* jittered = nullptr);

// B1 = (P0 + sum w_i z_i z_i')^{-1}, A1 = B1 {sum (s_i - 1/2 - w_i C_i) z_i + P0 A0},
// with the prior given by its precision P0 and shift P0 A0.
GaussianConditional gaussian_conditional_precision(const Eigen::MatrixXd& prior_precision,
                                                   const Eigen::VectorXd& prior_shift, const LabeledSet& samples,
                                                   const Eigen::VectorXd& omegas);
GaussianConditional gaussian_conditional(const GaussianPrior& prior, const LabeledSet& samples,
                                         const Eigen::VectorXd& omegas);

// omega_i ~ PG(1, z_i' gamma + C_i).
void draw_omegas(const Eigen::VectorXd& gamma, const LabeledSet& samples, Eigen::VectorXd& omegas,
                 RandomStream& rng);

struct AdaptiveNoiseConfig {
  double alpha = 0.2;
  int cadence = 50;            // iterations per mini-batch and per noise update
  int proposals_per_noise = 50;  // M = proposals_per_noise * m
  double ess_warn_fraction = 0.1;
  bool burn_in_only = false;
  ResampleScheme scheme = ResampleScheme::multinomial;
  std::optional<Domain> base;  // defaults to the torus or the 10%-expanded data box
};

struct GibbsConfig {
  int iterations = 5000;  // total, including burn-in
  int burn_in = 2000;
  int thin = 1;
  std::uint64_t seed = 1;
  NoiseMode noise_mode = NoiseMode::fixed_set;
  AdaptiveNoiseConfig adapt;

  void validate() const;
  int kept() const { return (iterations - burn_in) / thin; }
};

struct PosteriorDraws {
  Eigen::MatrixXd draws;             // kept iterations x (p + 1)
  Eigen::VectorXd log_likelihood;    // per kept iteration
  std::vector<std::string> column_names;
  std::vector<double> ess_trace;     // one entry per adaptive noise update
  bool ess_warning = false;
  int noise_refreshes = 0;
  int jitter_retries = 0;

  Eigen::VectorXd posterior_mean() const { return draws.colwise().mean().transpose(); }
  Eigen::VectorXd posterior_sd() const;
};

std::vector<std::string> gamma_column_names(int p);

// Supplies the Gaussian prior of gamma each iteration and may resample its
// own hyperparameters after each gamma draw.
class PriorUpdater {
 public:
  virtual ~PriorUpdater() = default;
  virtual const Eigen::MatrixXd& precision() const = 0;
  // precision * mean
  virtual const Eigen::VectorXd& shift() const = 0;
  virtual void update(const Eigen::VectorXd& /*gamma*/, RandomStream& /*rng*/) {}
  virtual void record() {}
  Eigen::VectorXd prior_mean() const;
};

class FixedPrior final : public PriorUpdater {
 public:
  explicit FixedPrior(const GaussianPrior& prior);
  const Eigen::MatrixXd& precision() const override { return precision_; }
  const Eigen::VectorXd& shift() const override { return shift_; }

 private:
  Eigen::MatrixXd precision_;
  Eigen::VectorXd shift_;
};

// General NC-Bayes chain: noise handling per cfg.noise_mode (a fixed set,
// a fresh draw from noise_spec each iteration, or tempered adaptive noise),
// PG omega update, Gaussian gamma update, then prior hyperparameters.
PosteriorDraws run_chain(const ExpFamModel& model, const RowMatrix& data, const NoiseSpec& noise_spec,
                         const RowMatrix* fixed_noise, PriorUpdater& prior, const GibbsConfig& cfg);

PosteriorDraws run_fixed_noise(const ExpFamModel& model, const RowMatrix& data, const RowMatrix& noise_set,
                               const LogDensity& noise_log_density, const GaussianPrior& prior,
                               const GibbsConfig& cfg);
PosteriorDraws run_refreshed_noise(const ExpFamModel& model, const RowMatrix& data, const NoiseSpec& noise_spec,
                                   const GaussianPrior& prior, const GibbsConfig& cfg);

// Multi-group model: theta_j ~ N(mu, Sigma), beta_j ~ N(mu_beta, sigma_beta2).
struct HierarchicalHyperprior {
  double mu_variance = 100.0;        // mu ~ N(0, mu_variance I)
  double sigma_dof_extra = 2.0;      // Sigma ~ IW(p + sigma_dof_extra, sigma_scale I)
  double sigma_scale = 1.0;
  double mu_beta_variance = 100.0;   // mu_beta ~ N(0, mu_beta_variance)
  double sigma_beta_shape = 1.0;     // sigma_beta2 ~ IG(shape, scale)
  double sigma_beta_scale = 1.0;
};

struct HierarchicalState {
  std::vector<Eigen::VectorXd> gamma;  // per group
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
  double mu_beta = 0.0;
  double sigma_beta2 = 1.0;
};

struct HierarchicalGroup {
  RowMatrix data;
  NoiseSpec noise;
  std::optional<RowMatrix> fixed_noise;  // used when set; otherwise refreshed from `noise`
};

struct HierarchicalDraws {
  std::vector<PosteriorDraws> groups;
  Eigen::MatrixXd mu;          // kept x p
  Eigen::MatrixXd sigma_diag;  // kept x p
  Eigen::VectorXd mu_beta;
  Eigen::VectorXd sigma_beta2;
};

// `initial` seeds the hyperparameters; with freeze_hyper they stay fixed.
HierarchicalDraws run_hierarchical(const ExpFamModel& model, const std::vector<HierarchicalGroup>& groups,
                                   const HierarchicalHyperprior& hyper, const HierarchicalState& initial,
                                   const GibbsConfig& cfg, bool freeze_hyper = false);

// Inverse-Wishart draw IW(dof, scale) by the Bartlett decomposition.
Eigen::MatrixXd sample_inverse_wishart(double dof, const Eigen::MatrixXd& scale, RandomStream& rng);

}  // namespace ncbayes
