#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ncbayes/torus_graph.hpp"
#include "ncbayes/tv_density.hpp"

namespace ncbayes {

enum class ExperimentId { table1, table2, table3, s1, s2, s3, s4 };
ExperimentId parse_experiment(const std::string& name);  // "1", "table-2", "s3", ...
std::string to_string(ExperimentId id);

// Replication seeds are derive_seed(master_seed, r) for r = 0..reps-1.
struct ExperimentPlan {
  ExperimentId id = ExperimentId::table2;
  int reps = 20;
  std::uint64_t master_seed = 20240601;
  int jobs = 1;
  std::optional<int> iterations;  // total per chain; default per study
  std::optional<int> burn_in;

  // Time-varying density studies.
  std::vector<int> tv_scenarios = {1, 2};
  std::vector<TVNoise> tv_noises = {TVNoise::common, TVNoise::per_time, TVNoise::adaptive};
  int tv_T = 10;
  int tv_n = 100;
  int tv_L = 30;
  int tv_eval_points = 500;
  std::optional<double> tv_h;
  KdeBandwidth kde_rule = KdeBandwidth::silverman;
  std::string grid_dir;  // when set, replication 0 writes its density grids here

  // Torus studies.
  PriorMode nc_prior = PriorMode::regularized_grouped;
  bool nc_update_off = true;
  bool nc_update_on = true;
  std::vector<double> hbayes_w = {0.2, 1.0, 5.0};
  std::optional<int> torus_n;
  std::optional<int> torus_d;   // chain and ER only
  std::uint64_t er_graph_seed = 7;

  void validate() const;
  std::uint64_t rep_seed(int r) const;
};

// Runs fn(r) for r in [0, count) on `jobs` threads; results land by index.
void parallel_for(int count, int jobs, const std::function<void(int)>& fn);

struct TVMethodResult {
  std::string method;  // n1, n2, adaptive, kde
  double abe = 0.0;
  std::optional<double> cp;
  std::optional<double> al;
};

struct TVRepResult {
  int scenario = 0;
  std::uint64_t seed = 0;
  std::vector<TVMethodResult> methods;
  std::string error;
  bool ess_warning = false;
  int jitter_retries = 0;
};

std::vector<TVRepResult> run_tv_study(const ExperimentPlan& plan);

struct TorusMethodResult {
  std::string method;  // nc-bayes or h-bayes
  std::optional<double> w;
  bool noise_update = false;
  GraphMetrics median;
  GraphMetrics ci;
  double cov_trace = 0.0;  // trace of the posterior covariance of phi
};

struct TorusRepResult {
  std::uint64_t seed = 0;
  std::vector<TorusMethodResult> methods;
  int true_edges = 0;
  double acceptance_rate = 1.0;
  std::string error;
  bool ess_warning = false;
  int jitter_retries = 0;
};

enum class TorusScenario { chain, cycle5, er30 };
TorusScenario parse_torus_scenario(const std::string& name);
std::string to_string(TorusScenario s);
TorusScenario scenario_of(ExperimentId id);

std::vector<TorusRepResult> run_torus_study(TorusScenario scenario, const ExperimentPlan& plan);

// One PASS/FAIL verdict.
struct Verdict {
  std::string name;
  bool pass = false;
  std::string detail;
};

nlohmann::json summarize_tv(const std::vector<TVRepResult>& reps);
nlohmann::json summarize_torus(const std::vector<TorusRepResult>& reps, EdgeRule rule);
// Acceptance checks at desk scale; empty when the table has none.
std::vector<Verdict> tv_verdicts(const std::vector<TVRepResult>& reps);
std::vector<Verdict> torus_verdicts(ExperimentId id, const std::vector<TorusRepResult>& reps);

// Runs the plan and writes <id>.json, <id>.csv (and the companion table of
// the same study) into out_dir. Returns the written paths.
std::vector<std::string> reproduce(const ExperimentPlan& plan, const std::string& out_dir);

}  // namespace ncbayes
