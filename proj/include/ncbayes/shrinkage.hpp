#pragma once

#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ncbayes/gibbs.hpp"
#include "ncbayes/random.hpp"

namespace ncbayes {

enum class PriorMode { gaussian, horseshoe, grouped, regularized_grouped };

PriorMode parse_prior_mode(const std::string& name);
std::string to_string(PriorMode mode);

// Coefficient order: `node_count` scalar node coefficients, then
// `group_count` groups of `group_size` edge coefficients.
struct CoefficientLayout {
  int node_count = 0;
  int group_count = 0;
  int group_size = 4;

  int total() const { return node_count + group_count * group_size; }
  static CoefficientLayout torus(int d);
};

// Global-local shrinkage scales. In horseshoe mode every coefficient owns a
// local scale lambda; in the grouped modes node coefficients own lambda and
// each edge shares one group scale u.
struct HorseshoeState {
  PriorMode mode = PriorMode::horseshoe;
  CoefficientLayout layout;
  Eigen::VectorXd lambda2, nu;
  Eigen::VectorXd u2, t;
  double tau2 = 1.0;
  double xi = 1.0;
  double slab_c = std::numeric_limits<double>::infinity();
  bool tau_fixed = false;

  // All scales and auxiliaries start at 1. regularized_grouped defaults to c = 1.
  static HorseshoeState initial(PriorMode mode, CoefficientLayout layout,
                                double slab_c = std::numeric_limits<double>::quiet_NaN());
  bool grouped() const { return mode == PriorMode::grouped || mode == PriorMode::regularized_grouped; }
  int local_count() const { return static_cast<int>(lambda2.size()); }
};

// lambda2_k ~ IG(1, phi_k^2 / (2 tau2) + 1/nu_k), nu_k ~ IG(1, 1 + 1/lambda2_k).
void update_local(HorseshoeState& state, const Eigen::VectorXd& phi, RandomStream& rng);
// u2 ~ IG((g+1)/2, sum phi^2 / (2 tau2) + 1/t), t ~ IG(1, 1 + 1/u2); g = group size.
void update_group(HorseshoeState& state, const Eigen::VectorXd& phi, RandomStream& rng);
// tau2 ~ IG((K+1)/2, (sum_local phi^2/lambda2 + sum_group phi^2/u2)/2 + 1/xi),
// xi ~ IG(1, 1 + 1/tau2). No-op when tau is fixed.
void update_global(HorseshoeState& state, const Eigen::VectorXd& phi, RandomStream& rng);

// Diagonal prior precision: 1/c^2 + 1/(scale2 * tau2) per coefficient, then
// `beta_precision` for the trailing beta entry when requested.
Eigen::VectorXd prior_precision(const HorseshoeState& state, double beta_precision, bool with_beta = true);

// tau = p0 / (sqrt(n + m) (2 d^2 - p0)), p0 = floor(1.7 d^2 + 0.5).
double fixed_tau_value(int d, int n, int m);

// Shrinkage prior on the leading coefficients of gamma with an optional
// fixed Gaussian prior on a trailing beta entry. Gaussian mode uses a fixed
// isotropic prior instead.
class ShrinkagePrior final : public PriorUpdater {
 public:
  ShrinkagePrior(HorseshoeState state, bool with_beta, double beta_variance, double gaussian_variance = 10.0);

  const Eigen::MatrixXd& precision() const override { return precision_; }
  const Eigen::VectorXd& shift() const override { return shift_; }
  void update(const Eigen::VectorXd& gamma, RandomStream& rng) override;
  void record() override { tau2_trace_.push_back(state_.tau2); }

  const HorseshoeState& state() const { return state_; }
  const std::vector<double>& tau2_trace() const { return tau2_trace_; }

 private:
  void refresh_precision();

  HorseshoeState state_;
  bool with_beta_;
  double beta_precision_;
  double gaussian_precision_;
  Eigen::MatrixXd precision_;
  Eigen::VectorXd shift_;
  std::vector<double> tau2_trace_;
};

}  // namespace ncbayes
