#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ncbayes/expfam.hpp"
#include "ncbayes/gibbs.hpp"
#include "ncbayes/shrinkage.hpp"

namespace ncbayes {

// Coefficient bookkeeping for a d-node torus graph. Flattened order: node
// pairs j = 1..d, then edge quadruples (1,2), (1,3), ..., (d-1,d).
inline int torus_coefficient_count(int d) { return 2 * d * d; }
inline int torus_edge_count(int d) { return d * (d - 1) / 2; }
// Zero-based edge index of the pair j < k.
int torus_edge_index(int j, int k, int d);
std::pair<int, int> torus_edge_nodes(int edge, int d);
std::vector<std::string> torus_column_names(int d, bool with_beta);

struct TorusGraphParams {
  Eigen::MatrixXd node;  // d x 2
  Eigen::MatrixXd edge;  // d(d-1)/2 x 4
  double beta = 0.0;

  static TorusGraphParams zeros(int d);
  static TorusGraphParams unflatten(const Eigen::VectorXd& flat, int d);
  int d() const { return static_cast<int>(node.rows()); }
  Eigen::VectorXd flatten(bool with_beta = false) const;
  std::vector<bool> edge_support() const;
  // sum_j phi_j' theta(x_j) + sum_{j<k} phi_jk' eta(x_j, x_k)
  double log_unnormalized(std::span<const double> x) const;
  // Uniform bound: sum of the l1 norms of all coefficient blocks.
  double log_unnormalized_bound() const;
};

// Sufficient statistic without the constant: length 2d^2. Angles are wrapped
// into [0, 2pi); `wrapped` (when given) is incremented per wrapped angle.
void torus_statistic(std::span<const double> x, std::span<double> out, int* wrapped = nullptr);
// z(x) = (theta(x_1)', ..., theta(x_d)', eta(x_1,x_2)', ..., eta(x_{d-1},x_d)', 1)'.
Eigen::VectorXd torus_suff_stat(const Eigen::VectorXd& x, int* wrapped = nullptr);

ExpFamModel torus_model(int d);

// Wraps every entry into [0, 2pi); returns the number of wrapped entries.
int wrap_phases(RowMatrix& data);

struct TorusFitConfig {
  PriorMode prior = PriorMode::regularized_grouped;
  int m = 0;  // 0: m = n
  double slab_c = std::numeric_limits<double>::quiet_NaN();
  double beta_variance = 1e3;
  double gaussian_variance = 10.0;
  bool tau_fixed = false;
  std::optional<double> tau_value;  // defaults to fixed_tau_value(d, n, m)
};

struct TorusFit {
  int d = 0;
  PosteriorDraws draws;
  std::vector<double> tau2_trace;
  HorseshoeState final_state;
};

// NC-Bayes fit with uniform torus noise (fixed, refreshed or adaptive per
// cfg.noise_mode) and the shrinkage prior updated each iteration.
TorusFit fit_torus_ncbayes(const RowMatrix& data, const TorusFitConfig& fit, const GibbsConfig& cfg);

// x_1 ~ vM(mu, kappa), x_j | x_{j-1} ~ vM(x_{j-1} + mu, kappa).
RowMatrix generate_vm_chain(int d, int n, double mu, double kappa, std::uint64_t seed);
TorusGraphParams vm_chain_params(int d, double mu, double kappa);

struct GeneratedGraphData {
  RowMatrix data;
  TorusGraphParams truth;
  double acceptance_rate = 1.0;
};

// Rejection sampler with uniform proposals accepted with probability
// exp(U(x) - U_max).
RowMatrix sample_torus_rejection(const TorusGraphParams& params, int n, RandomStream& rng,
                                 double* acceptance_rate = nullptr);
// Five-node graph with edges (1,3), (1,4), (2,4), (2,5), (3,5), each (0.3, 0.3, 0.3, 0.3).
TorusGraphParams cycle5_params();
GeneratedGraphData generate_cycle_rejection(int n, std::uint64_t seed);

// von Mises natural parameters (a, b) of x_k given the other coordinates,
// i.e. density proportional to exp(a cos x_k + b sin x_k).
std::pair<double, double> torus_conditional(const TorusGraphParams& params, std::span<const double> x, int k);
// Single-site Gibbs sampler: `burn` discarded sweeps then one kept sample per sweep.
RowMatrix sample_torus_gibbs(const TorusGraphParams& params, int n, int burn, RandomStream& rng);
// Erdos-Renyi graph drawn from `graph_seed`, rotational coupling (0.3, 0.3, 0, 0) on its edges.
TorusGraphParams er_graph_params(int d, double edge_prob, std::uint64_t graph_seed);
GeneratedGraphData generate_er_gibbs(int d, double edge_prob, int n, int burn, std::uint64_t graph_seed,
                                     std::uint64_t seed);

enum class EdgeRule { median_threshold, ci_level };

struct EdgeDecisionReport {
  EdgeRule rule = EdgeRule::median_threshold;
  double value = 0.1;
  int d = 0;
  std::vector<bool> decisions;
  Eigen::VectorXd strengths;  // sum_l |median phi_jk(l)|
  Eigen::MatrixXd medians;    // edges x 4
};

// Edge present iff max_l |median phi_jk(l)| > threshold (strict).
EdgeDecisionReport detect_edges_median(const Eigen::MatrixXd& draws, int d, double threshold = 0.1);
// Edge present iff some equal-tailed `level` interval of phi_jk(l) excludes zero.
EdgeDecisionReport detect_edges_ci(const Eigen::MatrixXd& draws, int d, double level = 0.9);

struct GraphMetrics {
  std::optional<double> recall;     // undefined without true edges
  std::optional<double> precision;  // undefined without detections
  double accuracy = 0.0;
  double cp_phi = 0.0;  // percent
  int tp = 0, fp = 0, tn = 0, fn = 0;
};

// Confusion-matrix metrics over all edges plus the coverage (percent) of the
// equal-tailed `cp_level` intervals over all 2d^2 coefficients. When
// cp_level is not given it is the report's level (CI rule) or 0.9.
GraphMetrics graph_metrics(const EdgeDecisionReport& report, const std::vector<bool>& true_edges,
                           const Eigen::MatrixXd& draws, const Eigen::VectorXd& true_phi,
                           std::optional<double> cp_level = std::nullopt);

}  // namespace ncbayes
