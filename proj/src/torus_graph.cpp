#include "ncbayes/torus_graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ncbayes/errors.hpp"
#include "ncbayes/stats.hpp"

namespace ncbayes {

int torus_edge_index(int j, int k, int d) {
  require(0 <= j && j < k && k < d, "edge index needs 0 <= j < k < d");
  // Edges before row j: sum_{r<j} (d - 1 - r).
  return j * (2 * d - j - 1) / 2 + (k - j - 1);
}

std::pair<int, int> torus_edge_nodes(int edge, int d) {
  require(edge >= 0 && edge < torus_edge_count(d), "edge out of range");
  int j = 0;
  while (edge >= d - 1 - j) {
    edge -= d - 1 - j;
    ++j;
  }
  return {j, j + 1 + edge};
}

std::vector<std::string> torus_column_names(int d, bool with_beta) {
  std::vector<std::string> names;
  for (int j = 0; j < d; ++j)
    for (int l = 1; l <= 2; ++l) names.push_back("phi_" + std::to_string(j + 1) + "_" + std::to_string(l));
  for (int e = 0; e < torus_edge_count(d); ++e) {
    const auto [j, k] = torus_edge_nodes(e, d);
    for (int l = 1; l <= 4; ++l)
      names.push_back("phi_" + std::to_string(j + 1) + "_" + std::to_string(k + 1) + "_" + std::to_string(l));
  }
  if (with_beta) names.push_back("beta");
  return names;
}

TorusGraphParams TorusGraphParams::zeros(int d) {
  require(d >= 1, "torus dimension must be positive");
  return {Eigen::MatrixXd::Zero(d, 2), Eigen::MatrixXd::Zero(torus_edge_count(d), 4), 0.0};
}

TorusGraphParams TorusGraphParams::unflatten(const Eigen::VectorXd& flat, int d) {
  const int k = torus_coefficient_count(d);
  require(flat.size() == k || flat.size() == k + 1, "flat vector length does not match 2d^2 (+1)");
  TorusGraphParams p = zeros(d);
  for (int j = 0; j < d; ++j) p.node.row(j) = flat.segment(2 * j, 2).transpose();
  for (int e = 0; e < torus_edge_count(d); ++e) p.edge.row(e) = flat.segment(2 * d + 4 * e, 4).transpose();
  if (flat.size() == k + 1) p.beta = flat[k];
  return p;
}

Eigen::VectorXd TorusGraphParams::flatten(bool with_beta) const {
  const int dd = d();
  Eigen::VectorXd out(torus_coefficient_count(dd) + (with_beta ? 1 : 0));
  for (int j = 0; j < dd; ++j) out.segment(2 * j, 2) = node.row(j).transpose();
  for (int e = 0; e < torus_edge_count(dd); ++e) out.segment(2 * dd + 4 * e, 4) = edge.row(e).transpose();
  if (with_beta) out[out.size() - 1] = beta;
  return out;
}

std::vector<bool> TorusGraphParams::edge_support() const {
  std::vector<bool> out(static_cast<std::size_t>(edge.rows()));
  for (Eigen::Index e = 0; e < edge.rows(); ++e) out[static_cast<std::size_t>(e)] = edge.row(e).cwiseAbs().maxCoeff() > 0.0;
  return out;
}

double TorusGraphParams::log_unnormalized(std::span<const double> x) const {
  const int dd = d();
  require(static_cast<int>(x.size()) == dd, "point dimension does not match the graph");
  Eigen::VectorXd t(torus_coefficient_count(dd));
  torus_statistic(x, {t.data(), static_cast<std::size_t>(t.size())});
  return t.dot(flatten(false));
}

double TorusGraphParams::log_unnormalized_bound() const {
  return node.cwiseAbs().sum() + edge.cwiseAbs().sum();
}

void torus_statistic(std::span<const double> x, std::span<double> out, int* wrapped) {
  const int d = static_cast<int>(x.size());
  require(static_cast<int>(out.size()) >= torus_coefficient_count(d), "output too short for the torus statistic");
  std::vector<double> a(x.begin(), x.end());
  for (auto& v : a) {
    require(std::isfinite(v), "angles must be finite");
    if (v < 0.0 || v >= kTwoPi) {
      v = wrap_angle(v);
      if (wrapped) ++*wrapped;
    }
  }
  std::vector<double> c(static_cast<std::size_t>(d)), s(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    c[static_cast<std::size_t>(j)] = std::cos(a[static_cast<std::size_t>(j)]);
    s[static_cast<std::size_t>(j)] = std::sin(a[static_cast<std::size_t>(j)]);
    out[static_cast<std::size_t>(2 * j)] = c[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(2 * j + 1)] = s[static_cast<std::size_t>(j)];
  }
  std::size_t pos = static_cast<std::size_t>(2 * d);
  for (int j = 0; j < d; ++j) {
    const double cj = c[static_cast<std::size_t>(j)], sj = s[static_cast<std::size_t>(j)];
    for (int k = j + 1; k < d; ++k) {
      const double ck = c[static_cast<std::size_t>(k)], sk = s[static_cast<std::size_t>(k)];
      out[pos++] = cj * ck + sj * sk;  // cos(xj - xk)
      out[pos++] = sj * ck - cj * sk;  // sin(xj - xk)
      out[pos++] = cj * ck - sj * sk;  // cos(xj + xk)
      out[pos++] = sj * ck + cj * sk;  // sin(xj + xk)
    }
  }
}

Eigen::VectorXd torus_suff_stat(const Eigen::VectorXd& x, int* wrapped) {
  const int d = static_cast<int>(x.size());
  require(d >= 1, "torus point must be nonempty");
  Eigen::VectorXd z(torus_coefficient_count(d) + 1);
  torus_statistic({x.data(), static_cast<std::size_t>(d)}, {z.data(), static_cast<std::size_t>(z.size())}, wrapped);
  z[z.size() - 1] = 1.0;
  return z;
}

ExpFamModel torus_model(int d) {
  return ExpFamModel(
      torus_coefficient_count(d), [](std::span<const double> x, std::span<double> out) { torus_statistic(x, out); },
      [](std::span<const double>) { return 0.0; }, Domain::torus(d));
}

int wrap_phases(RowMatrix& data) {
  int count = 0;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    double& v = data.data()[i];
    require(std::isfinite(v), "phase data must be finite");
    if (v < 0.0 || v >= kTwoPi) {
      v = wrap_angle(v);
      ++count;
    }
  }
  return count;
}

TorusFit fit_torus_ncbayes(const RowMatrix& data, const TorusFitConfig& fit, const GibbsConfig& cfg) {
  require(data.rows() >= 1, "torus fit needs at least one observation");
  const int d = static_cast<int>(data.cols());
  require(d >= 1, "torus fit needs at least one angle column");
  const int n = static_cast<int>(data.rows());
  const int m = fit.m > 0 ? fit.m : n;

  RowMatrix wrapped = data;
  wrap_phases(wrapped);
  const ExpFamModel model = torus_model(d);
  const NoiseSpec noise = NoiseSpec::uniform(Domain::torus(d), m,
                                             cfg.noise_mode == NoiseMode::generator ? NoiseMode::generator
                                                                                    : NoiseMode::fixed_set);

  HorseshoeState state = HorseshoeState::initial(fit.prior, CoefficientLayout::torus(d), fit.slab_c);
  if (fit.tau_fixed) {
    require(fit.prior != PriorMode::gaussian, "fixed tau needs a shrinkage prior");
    const double tau = fit.tau_value ? *fit.tau_value : fixed_tau_value(d, n, m);
    require(tau > 0.0, "fixed tau must be positive");
    state.tau_fixed = true;
    state.tau2 = tau * tau;
  }
  ShrinkagePrior prior(state, true, fit.beta_variance, fit.gaussian_variance);

  TorusFit out;
  out.d = d;
  out.draws = run_chain(model, wrapped, noise, nullptr, prior, cfg);
  out.draws.column_names = torus_column_names(d, true);
  out.tau2_trace = prior.tau2_trace();
  out.final_state = prior.state();
  return out;
}

RowMatrix generate_vm_chain(int d, int n, double mu, double kappa, std::uint64_t seed) {
  require(d >= 2, "von Mises chain needs d >= 2");
  require(n >= 1, "sample count must be positive");
  RandomStream rng(seed);
  RowMatrix out(n, d);
  for (int i = 0; i < n; ++i) {
    out(i, 0) = rng.von_mises(mu, kappa);
    for (int j = 1; j < d; ++j) out(i, j) = rng.von_mises(out(i, j - 1) + mu, kappa);
  }
  return out;
}

TorusGraphParams vm_chain_params(int d, double mu, double kappa) {
  TorusGraphParams p = TorusGraphParams::zeros(d);
  p.node.row(0) << kappa * std::cos(mu), kappa * std::sin(mu);
  for (int j = 0; j + 1 < d; ++j)
    p.edge.row(torus_edge_index(j, j + 1, d)) << kappa * std::cos(mu), -kappa * std::sin(mu), 0.0, 0.0;
  return p;
}

RowMatrix sample_torus_rejection(const TorusGraphParams& params, int n, RandomStream& rng, double* acceptance_rate) {
  require(n >= 1, "sample count must be positive");
  const int d = params.d();
  const double u_max = params.log_unnormalized_bound();
  RowMatrix out(n, d);
  std::vector<double> x(static_cast<std::size_t>(d));
  long proposals = 0;
  for (int i = 0; i < n;) {
    for (auto& v : x) v = kTwoPi * rng.uniform();
    ++proposals;
    const double accept = std::exp(params.log_unnormalized(x) - u_max);
    if (rng.uniform() <= accept) {
      for (int j = 0; j < d; ++j) out(i, j) = x[static_cast<std::size_t>(j)];
      ++i;
    }
  }
  if (acceptance_rate) *acceptance_rate = static_cast<double>(n) / static_cast<double>(proposals);
  return out;
}

TorusGraphParams cycle5_params() {
  TorusGraphParams p = TorusGraphParams::zeros(5);
  const std::pair<int, int> edges[] = {{0, 2}, {0, 3}, {1, 3}, {1, 4}, {2, 4}};
  for (const auto& [j, k] : edges) p.edge.row(torus_edge_index(j, k, 5)).setConstant(0.3);
  return p;
}

GeneratedGraphData generate_cycle_rejection(int n, std::uint64_t seed) {
  RandomStream rng(seed);
  GeneratedGraphData out;
  out.truth = cycle5_params();
  out.data = sample_torus_rejection(out.truth, n, rng, &out.acceptance_rate);
  return out;
}

std::pair<double, double> torus_conditional(const TorusGraphParams& params, std::span<const double> x, int k) {
  const int d = params.d();
  require(0 <= k && k < d && static_cast<int>(x.size()) == d, "conditional index out of range");
  double a = params.node(k, 0), b = params.node(k, 1);
  for (int j = 0; j < d; ++j) {
    if (j == k) continue;
    const auto phi = params.edge.row(torus_edge_index(std::min(j, k), std::max(j, k), d));
    const double cj = std::cos(x[static_cast<std::size_t>(j)]), sj = std::sin(x[static_cast<std::size_t>(j)]);
    if (j < k) {
      // phi1 cos(xj - xk) + phi2 sin(xj - xk)
      a += phi[0] * cj + phi[1] * sj;
      b += phi[0] * sj - phi[1] * cj;
    } else {
      // phi1 cos(xk - xj) + phi2 sin(xk - xj)
      a += phi[0] * cj - phi[1] * sj;
      b += phi[0] * sj + phi[1] * cj;
    }
    // phi3 cos(xj + xk) + phi4 sin(xj + xk)
    a += phi[2] * cj + phi[3] * sj;
    b += -phi[2] * sj + phi[3] * cj;
  }
  return {a, b};
}

RowMatrix sample_torus_gibbs(const TorusGraphParams& params, int n, int burn, RandomStream& rng) {
  require(n >= 1 && burn >= 0, "Gibbs sampler needs n >= 1 and burn >= 0");
  const int d = params.d();
  std::vector<double> x(static_cast<std::size_t>(d));
  for (auto& v : x) v = kTwoPi * rng.uniform();
  RowMatrix out(n, d);
  for (int sweep = 0; sweep < burn + n; ++sweep) {
    for (int k = 0; k < d; ++k) {
      const auto [a, b] = torus_conditional(params, x, k);
      x[static_cast<std::size_t>(k)] = rng.von_mises(std::atan2(b, a), std::hypot(a, b));
    }
    if (sweep >= burn)
      for (int j = 0; j < d; ++j) out(sweep - burn, j) = x[static_cast<std::size_t>(j)];
  }
  return out;
}

TorusGraphParams er_graph_params(int d, double edge_prob, std::uint64_t graph_seed) {
  require(d >= 2, "Erdos-Renyi graph needs d >= 2");
  require(edge_prob >= 0.0 && edge_prob <= 1.0, "edge probability must lie in [0, 1]");
  RandomStream rng(graph_seed);
  TorusGraphParams p = TorusGraphParams::zeros(d);
  for (int e = 0; e < torus_edge_count(d); ++e)
    if (rng.uniform() < edge_prob) p.edge.row(e) << 0.3, 0.3, 0.0, 0.0;
  return p;
}

GeneratedGraphData generate_er_gibbs(int d, double edge_prob, int n, int burn, std::uint64_t graph_seed,
                                     std::uint64_t seed) {
  GeneratedGraphData out;
  out.truth = er_graph_params(d, edge_prob, graph_seed);
  RandomStream rng(seed);
  out.data = sample_torus_gibbs(out.truth, n, burn, rng);
  return out;
}

namespace {

void check_draws(const Eigen::MatrixXd& draws, int d) {
  require(d >= 2, "edge detection needs d >= 2");
  require(draws.rows() >= 1, "edge detection needs at least one draw");
  require(draws.cols() == torus_coefficient_count(d) || draws.cols() == torus_coefficient_count(d) + 1,
          "draw width does not match 2d^2 (+1)");
}

}  // namespace

EdgeDecisionReport detect_edges_median(const Eigen::MatrixXd& draws, int d, double threshold) {
  check_draws(draws, d);
  require(threshold > 0.0, "median threshold must be positive");
  const Eigen::VectorXd med = column_quantile(draws, 0.5);
  EdgeDecisionReport r;
  r.rule = EdgeRule::median_threshold;
  r.value = threshold;
  r.d = d;
  const int edges = torus_edge_count(d);
  r.decisions.resize(static_cast<std::size_t>(edges));
  r.strengths.resize(edges);
  r.medians.resize(edges, 4);
  for (int e = 0; e < edges; ++e) {
    const auto m = med.segment(2 * d + 4 * e, 4);
    r.medians.row(e) = m.transpose();
    r.strengths[e] = m.cwiseAbs().sum();
    r.decisions[static_cast<std::size_t>(e)] = m.cwiseAbs().maxCoeff() > threshold;
  }
  return r;
}

EdgeDecisionReport detect_edges_ci(const Eigen::MatrixXd& draws, int d, double level) {
  check_draws(draws, d);
  require(level > 0.0 && level < 1.0, "credible level must lie in (0, 1)");
  const Eigen::VectorXd lo = column_quantile(draws, 0.5 * (1.0 - level));
  const Eigen::VectorXd hi = column_quantile(draws, 0.5 * (1.0 + level));
  const Eigen::VectorXd med = column_quantile(draws, 0.5);
  EdgeDecisionReport r;
  r.rule = EdgeRule::ci_level;
  r.value = level;
  r.d = d;
  const int edges = torus_edge_count(d);
  r.decisions.resize(static_cast<std::size_t>(edges));
  r.strengths.resize(edges);
  r.medians.resize(edges, 4);
  for (int e = 0; e < edges; ++e) {
    bool present = false;
    for (int l = 0; l < 4; ++l) {
      const Eigen::Index c = 2 * d + 4 * e + l;
      if (lo[c] > 0.0 || hi[c] < 0.0) present = true;
    }
    const auto m = med.segment(2 * d + 4 * e, 4);
    r.medians.row(e) = m.transpose();
    r.strengths[e] = m.cwiseAbs().sum();
    r.decisions[static_cast<std::size_t>(e)] = present;
  }
  return r;
}

GraphMetrics graph_metrics(const EdgeDecisionReport& report, const std::vector<bool>& true_edges,
                           const Eigen::MatrixXd& draws, const Eigen::VectorXd& true_phi,
                           std::optional<double> cp_level) {
  const int d = report.d;
  require(report.decisions.size() == true_edges.size(), "edge counts of report and truth differ");
  require(static_cast<int>(true_edges.size()) == torus_edge_count(d), "truth does not match d(d-1)/2 edges");
  GraphMetrics g;
  for (std::size_t e = 0; e < true_edges.size(); ++e) {
    const bool det = report.decisions[e], truth = true_edges[e];
    if (det && truth) ++g.tp;
    else if (det && !truth) ++g.fp;
    else if (!det && truth) ++g.fn;
    else ++g.tn;
  }
  if (g.tp + g.fn > 0) g.recall = static_cast<double>(g.tp) / (g.tp + g.fn);
  if (g.tp + g.fp > 0) g.precision = static_cast<double>(g.tp) / (g.tp + g.fp);
  g.accuracy = static_cast<double>(g.tp + g.tn) / static_cast<double>(true_edges.size());

  if (draws.size() > 0) {
    const int k = torus_coefficient_count(d);
    require(true_phi.size() >= k, "true coefficient vector too short");
    require(draws.cols() >= k, "draw width too small for 2d^2 coefficients");
    const double level = cp_level ? *cp_level : (report.rule == EdgeRule::ci_level ? report.value : 0.9);
    const Eigen::VectorXd lo = column_quantile(draws.leftCols(k), 0.5 * (1.0 - level));
    const Eigen::VectorXd hi = column_quantile(draws.leftCols(k), 0.5 * (1.0 + level));
    int covered = 0;
    for (int c = 0; c < k; ++c)
      if (lo[c] <= true_phi[c] && true_phi[c] <= hi[c]) ++covered;
    g.cp_phi = 100.0 * covered / k;
  }
  return g;
}

}  // namespace ncbayes
