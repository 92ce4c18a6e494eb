// nc-bayes: command-line driver for the NC-Bayes library.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"

#include "ncbayes/errors.hpp"
#include "ncbayes/experiments.hpp"
#include "ncbayes/hscore.hpp"
#include "ncbayes/io.hpp"
#include "ncbayes/pg.hpp"
#include "ncbayes/stats.hpp"
#include "ncbayes/torus_graph.hpp"
#include "ncbayes/tv_density.hpp"

namespace fs = std::filesystem;
using namespace ncbayes;

namespace {

constexpr std::uint64_t kDefaultSeed = 20240601;

struct Common {
  std::optional<std::uint64_t> seed;
  std::string out = "nc-bayes-out";
  int jobs = 1;
  std::optional<int> iterations;
  std::optional<int> burn_in;

  std::uint64_t resolved_seed() const {
    if (seed) return *seed;
    if (const char* env = std::getenv("NC_BAYES_SEED")) {
      try {
        std::size_t used = 0;
        const auto v = std::stoull(env, &used);
        if (used == std::string(env).size()) return v;
      } catch (const std::exception&) {
      }
      throw ValidationError("NC_BAYES_SEED is not an unsigned integer");
    }
    return kDefaultSeed;
  }
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "Master seed (falls back to NC_BAYES_SEED)");
  app->add_option("--out", c.out, "Output directory")->capture_default_str();
  app->add_option("--jobs", c.jobs, "Parallel replications")->capture_default_str()->check(CLI::PositiveNumber);
  app->add_option("--iterations", c.iterations, "Total Gibbs iterations per chain (including burn-in)");
  app->add_option("--burn-in", c.burn_in, "Burn-in iterations");
}

std::string out_path(const Common& c, const std::string& name) { return (fs::path(c.out) / name).string(); }

GibbsConfig gibbs_from(const Common& c, int iterations, int burn_in, std::uint64_t seed) {
  GibbsConfig cfg;
  cfg.iterations = c.iterations.value_or(iterations);
  cfg.burn_in = c.burn_in.value_or(burn_in);
  cfg.seed = seed;
  cfg.validate();
  return cfg;
}

nlohmann::json echo(const CLI::App& app) {
  nlohmann::json cfg = nlohmann::json::object();
  for (const CLI::Option* opt : app.get_options()) {
    if (opt->get_name() == "--help" || opt->get_name().empty() || opt->count() == 0) continue;
    const auto res = opt->results();
    cfg[opt->get_name()] = res.size() == 1 ? nlohmann::json(res.front()) : nlohmann::json(res);
  }
  return cfg;
}

int run_pg_selftest(const Common& c, RunManifest& manifest) {
  RandomStream rng(c.resolved_seed());
  const int draws = 100000;
  bool ok = true;
  nlohmann::json rows = nlohmann::json::array();
  const auto t0 = std::chrono::steady_clock::now();
  for (double cc : {0.0, 0.5, 2.0, 5.0}) {
    const PGTilt tilt(cc);
    double sum = 0.0;
    for (int i = 0; i < draws; ++i) sum += sample_pg1(tilt, rng);
    const double m = sum / draws;
    const double se = std::sqrt(pg1_variance(tilt) / draws);
    const double z = (m - pg1_mean(tilt)) / se;
    const bool pass = std::abs(z) <= 4.0;
    ok = ok && pass;
    std::cout << (pass ? "PASS" : "FAIL") << " c=" << cc << " mean=" << m << " expected=" << pg1_mean(tilt)
              << " z=" << z << '\n';
    rows.push_back({{"c", cc}, {"mean", m}, {"expected", pg1_mean(tilt)}, {"z", z}, {"pass", pass}});
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "runtime " << secs << " s\n";
  manifest.set_diagnostic("pg_selftest", rows);
  return ok ? 0 : 1;
}

void write_graph_outputs(const Common& c, RunManifest& manifest, const Eigen::MatrixXd& phi_draws, int d,
                         double threshold, double level, const std::vector<std::string>& labels) {
  const EdgeDecisionReport med = detect_edges_median(phi_draws, d, threshold);
  const EdgeDecisionReport ci = detect_edges_ci(phi_draws, d, level);
  std::vector<int> detected;
  for (int e = 0; e < torus_edge_count(d); ++e)
    if (med.decisions[static_cast<std::size_t>(e)]) detected.push_back(e);
  const auto emit = [&](const std::string& name, const auto& writer) {
    const std::string p = out_path(c, name);
    writer(p);
    manifest.add_output(p);
  };
  emit("edges-median.csv", [&](const std::string& p) { write_edge_list_csv(p, med); });
  emit("edges-ci.csv", [&](const std::string& p) { write_edge_list_csv(p, ci); });
  emit("graph-median.dot", [&](const std::string& p) { write_dot(p, med, labels); });
  emit("graph-ci.dot", [&](const std::string& p) { write_dot(p, ci, labels); });
  emit("intervals.csv", [&](const std::string& p) { write_interval_csv(p, phi_draws, d, detected); });
  manifest.set_diagnostic("detected_edges_median", detected.size());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NC-Bayes: Bayesian noise-contrastive estimation for unnormalized models"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Configuration file (TOML key = value); flags win");
  Common common;

  auto* pg = app.add_subcommand("pg-selftest", "Polya-Gamma sampler moment check");
  add_common(pg, common);

  auto* tv = app.add_subcommand("tv", "Time-varying density model");
  tv->require_subcommand(1);
  auto* tv_sim = tv->add_subcommand("simulate", "Monte Carlo density study");
  auto* tv_fit = tv->add_subcommand("fit", "Fit monthly crime locations");
  add_common(tv_sim, common);
  add_common(tv_fit, common);
  int scenario = 2, reps = 20, L = 30, grid_size = 50;
  std::string noise = "n1", fit_noise = "adaptive", input, sidecar, kde_rule = "silverman";
  std::optional<double> h;
  double expand = 0.1;
  tv_sim->add_option("--scenario", scenario)->check(CLI::IsMember({1, 2}))->capture_default_str();
  tv_sim->add_option("--reps", reps)->capture_default_str();
  tv_sim->add_option("--noise", noise)->check(CLI::IsMember({"n1", "n2", "adaptive"}))->capture_default_str();
  tv_sim->add_option("--L", L)->capture_default_str();
  tv_sim->add_option("--bandwidth", h, "RBF bandwidth (default: median knot distance)");
  tv_sim->add_option("--kde", kde_rule)->check(CLI::IsMember({"silverman", "scott"}))->capture_default_str();
  tv_fit->add_option("--input", input)->required()->check(CLI::ExistingFile);
  tv_fit->add_option("--L", L)->capture_default_str();
  tv_fit->add_option("--bandwidth", h, "RBF bandwidth (default: median knot distance)");
  tv_fit->add_option("--noise", fit_noise)->check(CLI::IsMember({"n1", "n2", "adaptive"}))->capture_default_str();
  tv_fit->add_option("--expand", expand, "Relative widening of the data box D")->capture_default_str();
  tv_fit->add_option("--grid", grid_size, "Grid points per axis")->capture_default_str();

  auto* torus = app.add_subcommand("torus", "Sparse torus graph");
  torus->require_subcommand(1);
  auto* to_sim = torus->add_subcommand("simulate", "Monte Carlo graph-recovery study");
  auto* to_fit = torus->add_subcommand("fit", "NC-Bayes fit of phase data");
  auto* to_hb = torus->add_subcommand("fit-hbayes", "H-Bayes fit of phase data");
  for (auto* s : {to_sim, to_fit, to_hb}) add_common(s, common);
  std::string torus_scenario = "chain", prior = "rghs", hb_prior = "ghs", noise_update = "off";
  bool tau_fixed = false;
  double threshold = 0.02, level = 0.9, w = 1.0;
  std::optional<int> m_noise;
  to_sim->add_option("--scenario", torus_scenario)->check(CLI::IsMember({"chain", "cycle5", "er30"}))->capture_default_str();
  to_sim->add_option("--reps", reps)->capture_default_str();
  to_sim->add_option("--prior", prior)->check(CLI::IsMember({"gaussian", "hs", "ghs", "rghs"}))->capture_default_str();
  to_sim->add_option("--noise-update", noise_update)->check(CLI::IsMember({"on", "off"}))->capture_default_str();
  to_fit->add_option("--input", input)->required()->check(CLI::ExistingFile);
  to_fit->add_option("--sidecar", sidecar, "JSON with channel and region names")->check(CLI::ExistingFile);
  to_fit->add_option("--prior", prior)->check(CLI::IsMember({"gaussian", "hs", "ghs", "rghs"}))->capture_default_str();
  to_fit->add_option("--noise-update", noise_update)->check(CLI::IsMember({"on", "off"}))->capture_default_str();
  to_fit->add_flag("--tau-fixed", tau_fixed, "Fix the global scale at its default value");
  to_fit->add_option("--m", m_noise, "Noise sample count (default n)");
  to_fit->add_option("--threshold", threshold, "Median-rule threshold")->capture_default_str();
  to_fit->add_option("--level", level, "Credible level of the CI rule")->capture_default_str();
  to_hb->add_option("--input", input)->required()->check(CLI::ExistingFile);
  to_hb->add_option("--sidecar", sidecar)->check(CLI::ExistingFile);
  to_hb->add_option("--w", w, "Loss scale")->capture_default_str();
  to_hb->add_option("--prior", hb_prior)->check(CLI::IsMember({"gaussian", "hs", "ghs", "rghs"}))->capture_default_str();
  to_hb->add_option("--threshold", threshold)->capture_default_str();
  to_hb->add_option("--level", level)->capture_default_str();

  auto* rep = app.add_subcommand("reproduce", "Reproduce a results table at desk scale");
  add_common(rep, common);
  std::string table;
  rep->add_option("--table", table)->required()->check(CLI::IsMember({"1", "2", "3", "s1", "s2", "s3", "s4"}));
  rep->add_option("--reps", reps)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  CLI::App* leaf = app.get_subcommands().front();
  std::string command = leaf->get_name();
  while (!leaf->get_subcommands().empty()) {
    leaf = leaf->get_subcommands().front();
    command += " " + leaf->get_name();
  }

  try {
    const std::uint64_t seed = common.resolved_seed();
    fs::create_directories(common.out);
    RunManifest manifest(command, echo(*leaf), seed);
    int code = 0;

    if (pg->parsed()) {
      manifest.start_stage("pg-selftest");
      code = run_pg_selftest(common, manifest);
    } else if (tv_sim->parsed()) {
      ExperimentPlan plan;
      plan.id = ExperimentId::table1;
      plan.reps = reps;
      plan.master_seed = seed;
      plan.jobs = common.jobs;
      plan.iterations = common.iterations;
      plan.burn_in = common.burn_in;
      plan.tv_scenarios = {scenario};
      plan.tv_noises = {parse_tv_noise(noise)};
      plan.tv_L = L;
      plan.tv_h = h;
      plan.kde_rule = kde_rule == "scott" ? KdeBandwidth::scott : KdeBandwidth::silverman;
      plan.grid_dir = common.out;
      manifest.start_stage("simulate");
      const auto results = run_tv_study(plan);
      manifest.end_stage();
      nlohmann::json doc = {{"rows", summarize_tv(results)}};
      nlohmann::json per_rep = nlohmann::json::array();
      for (const auto& r : results) {
        nlohmann::json row = {{"seed", r.seed}, {"error", r.error}};
        for (const auto& m : r.methods) row[m.method] = {{"abe", m.abe}, {"cp", m.cp ? nlohmann::json(*m.cp) : nlohmann::json(nullptr)}};
        per_rep.push_back(row);
        manifest.set_diagnostic("ess_warning", r.ess_warning || manifest.to_json()["diagnostics"].value("ess_warning", false));
      }
      doc["replications"] = per_rep;
      write_json(out_path(common, "metrics.json"), doc);
      manifest.add_output(out_path(common, "metrics.json"));
      manifest.add_output(out_path(common, "grid-s" + std::to_string(scenario) + "-" + noise + ".csv"));
    } else if (tv_fit->parsed()) {
      manifest.add_input(input);
      manifest.start_stage("load");
      const CrimeData crime = read_crime_csv(input);
      manifest.set_diagnostic("rejected_rows", crime.rejected);
      for (const auto& mth : crime.months)
        if (mth.rows() == 0) throw ValidationError("every month needs at least one incident");
      const RowMatrix pooled = pool_rows(crime.months);
      const Domain domain = Domain::bounding_box(pooled, expand);
      const TVModelSpec spec = make_tv_spec(pooled, L, derive_seed(seed, 1), h);
      manifest.start_stage("fit");
      TVNoiseConfig nc;
      nc.mode = parse_tv_noise(fit_noise);
      GibbsConfig cfg = gibbs_from(common, 5000, 2000, derive_seed(seed, 2));
      cfg.adapt.base = domain;
      cfg.adapt.burn_in_only = true;
      const TVDraws draws = run_tv_gibbs(crime.months, spec, domain, nc, cfg);
      manifest.set_diagnostic("ess_warning", draws.ess_warning);
      manifest.set_diagnostic("jitter_retries", draws.jitter_retries);
      manifest.start_stage("grid");
      RowMatrix points(static_cast<Eigen::Index>(grid_size) * grid_size, 2);
      const Eigen::VectorXd lo = domain.lower(), hi = domain.upper();
      for (int i = 0; i < grid_size; ++i)
        for (int j = 0; j < grid_size; ++j) {
          points(i * grid_size + j, 0) = lo[0] + (i + 0.5) * (hi[0] - lo[0]) / grid_size;
          points(i * grid_size + j, 1) = lo[1] + (j + 0.5) * (hi[1] - lo[1]) / grid_size;
        }
      const DensityGrid grid = posterior_density_grid(draws, spec, points, domain.volume());
      write_density_grid_csv(out_path(common, "density-grid.csv"), grid);
      manifest.add_output(out_path(common, "density-grid.csv"));
      DensityGrid kde = grid;
      for (int t = 0; t < static_cast<int>(crime.months.size()); ++t) {
        const KdeEstimator est(crime.months[static_cast<std::size_t>(t)]);
        Eigen::VectorXd v(points.rows());
        for (Eigen::Index i = 0; i < points.rows(); ++i) v[i] = est(row_span(points, i));
        kde.mean.row(t) = renormalize(v, domain.volume()).transpose();
      }
      kde.lo = kde.mean;
      kde.hi = kde.mean;
      write_density_grid_csv(out_path(common, "kde-grid.csv"), kde);
      manifest.add_output(out_path(common, "kde-grid.csv"));
      write_matrix_csv(out_path(common, "lambda.csv"), {"lambda"}, draws.lambda);
      manifest.add_output(out_path(common, "lambda.csv"));
    } else if (to_sim->parsed()) {
      ExperimentPlan plan;
      plan.reps = reps;
      plan.master_seed = seed;
      plan.jobs = common.jobs;
      plan.iterations = common.iterations;
      plan.burn_in = common.burn_in;
      plan.nc_prior = parse_prior_mode(prior);
      plan.nc_update_off = noise_update == "off";
      plan.nc_update_on = noise_update == "on";
      plan.hbayes_w.clear();
      manifest.start_stage("simulate");
      const auto results = run_torus_study(parse_torus_scenario(torus_scenario), plan);
      manifest.end_stage();
      nlohmann::json diag = nlohmann::json::array();
      for (const auto& r : results)
        diag.push_back({{"seed", r.seed}, {"true_edges", r.true_edges}, {"acceptance_rate", r.acceptance_rate},
                        {"ess_warning", r.ess_warning}, {"jitter_retries", r.jitter_retries}, {"error", r.error}});
      manifest.set_diagnostic("replications", diag);
      const nlohmann::json doc = {{"scenario", torus_scenario},
                                  {"median", summarize_torus(results, EdgeRule::median_threshold)},
                                  {"ci", summarize_torus(results, EdgeRule::ci_level)}};
      write_json(out_path(common, "metrics.json"), doc);
      manifest.add_output(out_path(common, "metrics.json"));
    } else if (to_fit->parsed() || to_hb->parsed()) {
      manifest.add_input(input);
      if (!sidecar.empty()) manifest.add_input(sidecar);
      manifest.start_stage("load");
      const PhaseData phases = read_phase_csv(input, sidecar);
      if (phases.wrapped > 0) std::cerr << "warning: wrapped " << phases.wrapped << " angles into [0, 2pi)\n";
      manifest.set_diagnostic("wrapped_angles", phases.wrapped);
      const int d = static_cast<int>(phases.angles.cols());
      require(d >= 2, "phase data needs at least two channels");
      manifest.start_stage("fit");
      const GibbsConfig base = gibbs_from(common, 3000, 1000, derive_seed(seed, 3));
      Eigen::MatrixXd phi;
      if (to_fit->parsed()) {
        TorusFitConfig fc;
        fc.prior = parse_prior_mode(prior);
        fc.tau_fixed = tau_fixed;
        if (m_noise) fc.m = *m_noise;
        GibbsConfig cfg = base;
        cfg.noise_mode = noise_update == "on" ? NoiseMode::adaptive : NoiseMode::generator;
        cfg.adapt.burn_in_only = true;
        const TorusFit fit = fit_torus_ncbayes(phases.angles, fc, cfg);
        write_draws_csv(out_path(common, "draws.csv"), fit.draws);
        phi = fit.draws.draws.leftCols(torus_coefficient_count(d));
        manifest.set_diagnostic("ess_warning", fit.draws.ess_warning);
        manifest.set_diagnostic("jitter_retries", fit.draws.jitter_retries);
        manifest.set_diagnostic("noise_refreshes", fit.draws.noise_refreshes);
      } else {
        HBayesConfig hc;
        hc.w = w;
        hc.prior = parse_prior_mode(hb_prior);
        const HBayesFit fit = run_hbayes(phases.angles, hc, base);
        write_draws_csv(out_path(common, "draws.csv"), fit.draws);
        phi = fit.draws.draws;
        manifest.set_diagnostic("jitter_retries", fit.draws.jitter_retries);
      }
      manifest.add_output(out_path(common, "draws.csv"));
      manifest.start_stage("graph");
      write_graph_outputs(common, manifest, phi, d, threshold, level, phases.channels);
    } else if (rep->parsed()) {
      ExperimentPlan plan;
      plan.id = parse_experiment(table);
      plan.reps = reps;
      plan.master_seed = seed;
      plan.jobs = common.jobs;
      plan.iterations = common.iterations;
      plan.burn_in = common.burn_in;
      manifest.start_stage("reproduce");
      for (const auto& p : reproduce(plan, common.out)) manifest.add_output(p);
    }
    manifest.end_stage();
    manifest.write(out_path(common, "manifest.json"));
    return code;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
