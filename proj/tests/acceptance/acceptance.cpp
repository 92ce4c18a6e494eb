// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Usage: acceptance [--jobs N] [criterion numbers...]
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"

#include "ncbayes/errors.hpp"
#include "ncbayes/experiments.hpp"
#include "ncbayes/expfam.hpp"
#include "ncbayes/gibbs.hpp"
#include "ncbayes/noise_adapt.hpp"
#include "ncbayes/pg.hpp"
#include "ncbayes/stats.hpp"
#include "ncbayes/torus_graph.hpp"
#include "ncbayes/tv_density.hpp"

using namespace ncbayes;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    notes.push_back(std::string(ok ? "[ok]   " : "[miss] ") + what);
  }
};

std::string num(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

GibbsConfig chain(int iterations, int burn_in, std::uint64_t seed, int thin = 1) {
  GibbsConfig cfg;
  cfg.iterations = iterations;
  cfg.burn_in = burn_in;
  cfg.thin = thin;
  cfg.seed = seed;
  return cfg;
}

std::vector<double> col(const Eigen::MatrixXd& m, int j) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)] = m(i, j);
  return out;
}

void add_verdicts(Outcome& o, const std::vector<Verdict>& vs, const std::function<bool(const std::string&)>& keep) {
  int used = 0;
  for (const auto& v : vs)
    if (keep(v.name)) {
      o.check(v.pass, v.name + ": " + v.detail);
      ++used;
    }
  if (used == 0) o.check(false, "no verdicts produced");
}

void add_failures(Outcome& o, int failed, int total) {
  o.check(failed == 0, std::to_string(total - failed) + " of " + std::to_string(total) + " replications completed");
}

// 1. Polya-Gamma moments.
Outcome pg_moments(int) {
  Outcome o;
  const auto t0 = Clock::now();
  RandomStream rng(101);
  for (double c : {0.0, 0.5, 2.0, 5.0}) {
    const PGTilt tilt(c);
    std::vector<double> x(100000);
    for (auto& v : x) v = sample_pg1(tilt, rng);
    const double target = c == 0.0 ? 0.25 : std::tanh(c / 2.0) / (2.0 * c);
    const double se = std::sqrt(sample_variance(x) / x.size());
    const double z = (mean(x) - target) / se;
    o.check(std::abs(z) <= 4.0, "c=" + num(c) + ": mean " + num(mean(x), 6) + " vs " + num(target, 6) + " (" + num(z, 3) + " SE)");
  }
  const double secs = seconds_since(t0);
  o.check(secs < 5.0, "runtime " + num(secs, 3) + " s < 5 s");
  return o;
}

// 2. Gibbs exactness on a two-parameter toy.
Outcome gibbs_exactness(int) {
  Outcome o;
  const Domain unit = Domain::box(Eigen::VectorXd::Constant(1, 0.0), Eigen::VectorXd::Constant(1, 1.0));
  const ExpFamModel model(
      1, [](std::span<const double> x, std::span<double> eta) { eta[0] = x[0]; },
      [](std::span<const double>) { return 0.0; }, unit);
  RowMatrix data(6, 1), noise(6, 1);
  data << 0.55, 0.71, 0.83, 0.92, 0.35, 0.97;
  noise << 0.08, 0.21, 0.47, 0.66, 0.13, 0.79;
  const NoiseSpec q = NoiseSpec::uniform(unit, 6);
  const double var = 10.0;
  // 2e4 kept draws, thinned by 10.
  const PosteriorDraws d =
      run_fixed_noise(model, data, noise, q.log_density, GaussianPrior::isotropic(2, var), chain(202000, 2000, 17, 10));
  const LabeledSet set = build_labeled(data, noise, model, q);
  const auto post = oracle::quadrature_2d(
      [&](double a, double b) { return oracle::classification_log_posterior(set, a, b, var); }, 25.0);
  const auto theta = col(d.draws, 0), beta = col(d.draws, 1);
  o.check(theta.size() == 20000, std::to_string(theta.size()) + " kept draws");
  for (const auto& [name, draws, m] : {std::tuple{"theta", &theta, &post.a}, std::tuple{"beta", &beta, &post.b}}) {
    const double dm = std::abs(mean(*draws) - m->mean);
    const double ds = std::abs(std::sqrt(sample_variance(*draws)) - m->sd);
    const double ks = oracle::ks_against(*draws, *m);
    o.check(dm < 0.02, std::string(name) + " mean off by " + num(dm, 3));
    o.check(ds < 0.02, std::string(name) + " sd off by " + num(ds, 3));
    o.check(ks < 0.05, std::string(name) + " KS " + num(ks, 3));
  }
  return o;
}

// 3. Normalizing constant of the d = 1 torus graph.
Outcome constant_recovery(int) {
  Outcome o;
  const auto t0 = Clock::now();
  const double i0 = oracle::bessel_i(0, 2.0);
  const double series = [] {
    // I0(2) = sum_k 1 / (k!)^2
    double s = 0.0, term = 1.0;
    for (int k = 0; k < 30; ++k) {
      s += term;
      term /= static_cast<double>((k + 1) * (k + 1));
    }
    return s;
  }();
  o.check(std::abs(i0 - series) < 1e-10, "I0(2) quadrature " + num(i0, 10) + " vs series " + num(series, 10));
  const double target = -std::log(kTwoPi * i0);

  RandomStream rng(303);
  RowMatrix x(500, 1);
  for (int i = 0; i < 500; ++i) x(i, 0) = rng.von_mises(0.0, 2.0);
  TorusFitConfig fc;
  fc.prior = PriorMode::gaussian;
  fc.m = 500;
  GibbsConfig cfg = chain(5000, 1000, 304);
  cfg.noise_mode = NoiseMode::fixed_set;
  const TorusFit fit = fit_torus_ncbayes(x, fc, cfg);
  const double beta = fit.draws.posterior_mean()[2];
  o.check(std::abs(beta - target) < 0.1, "posterior mean beta " + num(beta) + " vs " + num(target));
  const double secs = seconds_since(t0);
  o.check(secs < 60.0, "runtime " + num(secs, 3) + " s < 60 s");
  return o;
}

// 4. Time-varying density study, scenario 2 with common noise.
Outcome density_study(int jobs) {
  Outcome o;
  const auto t0 = Clock::now();
  ExperimentPlan plan;
  plan.id = ExperimentId::table1;
  plan.reps = 20;
  plan.jobs = jobs;
  plan.tv_scenarios = {2};
  plan.tv_noises = {TVNoise::common};
  const auto reps = run_tv_study(plan);
  int failed = 0;
  for (const auto& r : reps) failed += !r.error.empty();
  add_failures(o, failed, static_cast<int>(reps.size()));
  add_verdicts(o, tv_verdicts(reps), [](const std::string&) { return true; });
  const double secs = seconds_since(t0);
  o.notes.push_back("runtime " + num(secs / 60.0, 3) + " min with " + std::to_string(jobs) + " job(s)");
  if (jobs >= 4) o.check(secs < 1800.0, "runtime < 30 min at 4 jobs");
  return o;
}

// 5-7 share one chain study; 8 runs the five-node graph.
std::vector<TorusRepResult> chain_reps;
std::vector<TorusRepResult>& chain_study(int jobs) {
  if (chain_reps.empty()) {
    ExperimentPlan plan;
    plan.id = ExperimentId::table2;
    plan.reps = 20;
    plan.jobs = jobs;
    plan.nc_update_on = false;
    chain_reps = run_torus_study(TorusScenario::chain, plan);
  }
  return chain_reps;
}

int torus_failures(const std::vector<TorusRepResult>& reps) {
  int f = 0;
  for (const auto& r : reps) f += !r.error.empty();
  return f;
}

Outcome chain_median(int jobs) {
  Outcome o;
  const auto& reps = chain_study(jobs);
  add_failures(o, torus_failures(reps), static_cast<int>(reps.size()));
  add_verdicts(o, torus_verdicts(ExperimentId::table2, reps),
               [](const std::string& n) { return n.rfind("table-2", 0) == 0; });
  return o;
}

Outcome chain_ci(int jobs) {
  Outcome o;
  const auto& reps = chain_study(jobs);
  add_failures(o, torus_failures(reps), static_cast<int>(reps.size()));
  add_verdicts(o, torus_verdicts(ExperimentId::table3, reps),
               [](const std::string& n) { return n.rfind("table-3", 0) == 0; });
  return o;
}

Outcome hbayes_pathology(int jobs) {
  Outcome o;
  const auto& reps = chain_study(jobs);
  add_failures(o, torus_failures(reps), static_cast<int>(reps.size()));
  add_verdicts(o, torus_verdicts(ExperimentId::table2, reps),
               [](const std::string& n) { return n.rfind("H-Bayes", 0) == 0; });
  return o;
}

Outcome cycle_study(int jobs) {
  Outcome o;
  ExperimentPlan plan;
  plan.id = ExperimentId::s1;
  plan.reps = 20;
  plan.jobs = jobs;
  plan.hbayes_w.clear();
  const auto reps = run_torus_study(TorusScenario::cycle5, plan);
  add_failures(o, torus_failures(reps), static_cast<int>(reps.size()));
  add_verdicts(o, torus_verdicts(ExperimentId::s1, reps), [](const std::string&) { return true; });
  return o;
}

// 9. Single-site Gibbs against the rejection sampler.
Outcome gibbs_generator(int) {
  Outcome o;
  TorusGraphParams p = TorusGraphParams::zeros(2);
  p.edge.row(0) << 0.6, 0.4, 0.5, -0.3;
  RandomStream rng(909);
  const RowMatrix ref = sample_torus_rejection(p, 20000, rng);
  const RowMatrix all = sample_torus_gibbs(p, 100000, 1000, rng);
  const int bins = 8;
  std::vector<double> a(bins * bins, 0.0), b(bins * bins, 0.0);
  const auto bin = [&](double v) { return std::min(bins - 1, static_cast<int>(v / kTwoPi * bins)); };
  for (Eigen::Index i = 0; i < ref.rows(); ++i) a[static_cast<std::size_t>(bin(ref(i, 0)) * bins + bin(ref(i, 1)))] += 1.0;
  for (Eigen::Index i = 0; i < all.rows(); i += 5) b[static_cast<std::size_t>(bin(all(i, 0)) * bins + bin(all(i, 1)))] += 1.0;
  const double pv = chi_squared_homogeneity(a, b);
  o.check(pv > 0.01, "chi-squared homogeneity p = " + num(pv, 4));
  return o;
}

// 10. Property suites.
Outcome properties(int) {
  Outcome o;
  {
    double worst = 0.0;
    for (double psi = -50.0; psi <= 50.0; psi += 0.01) worst = std::max(worst, std::abs(logistic(psi) + logistic(-psi) - 1.0));
    o.check(worst < 1e-12, "logistic symmetry, max deviation " + num(worst, 3));
  }
  RandomStream rng(1001);
  const ExpFamModel model = torus_model(2);
  RowMatrix data(40, 2), noise(40, 2);
  for (Eigen::Index i = 0; i < data.size(); ++i) data.data()[i] = rng.von_mises(1.0, 1.5);
  for (Eigen::Index i = 0; i < noise.size(); ++i) noise.data()[i] = kTwoPi * rng.uniform();
  const LabeledSet set = build_labeled(data, noise, model, NoiseSpec::uniform(Domain::torus(2), 40));
  {
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
      const Eigen::VectorXd g = 0.5 * rng.normal_vector(set.design.cols());
      const Eigen::VectorXd grad = log_classification_gradient(g, set);
      for (Eigen::Index k = 0; k < g.size(); ++k) {
        const double h = 1e-5;
        Eigen::VectorXd gp = g, gm = g;
        gp[k] += h;
        gm[k] -= h;
        const double fd = (log_classification_likelihood(gp, set) - log_classification_likelihood(gm, set)) / (2 * h);
        worst = std::max(worst, std::abs(fd - grad[k]) / std::max(1.0, std::abs(grad[k])));
      }
    }
    o.check(worst <= 1e-6, "likelihood gradient vs central differences, max relative error " + num(worst, 3));
  }
  {
    Eigen::VectorXd w(set.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = sample_pg1(PGTilt(rng.normal()), rng);
    const GaussianConditional c = gaussian_conditional(GaussianPrior::isotropic(set.design.cols(), 10.0), set, w);
    const Eigen::MatrixXd cov = c.covariance();
    const double asym = (cov - cov.transpose()).cwiseAbs().maxCoeff();
    const double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (cov + cov.transpose())).eigenvalues().minCoeff();
    o.check(asym < 1e-12 && min_eig > 0.0, "B1 symmetric (" + num(asym, 3) + ") and positive definite (min eigenvalue " + num(min_eig, 3) + ")");
  }
  {
    std::vector<double> w(500);
    for (auto& v : w) v = rng.exponential();
    const double base = ess(w);
    double worst = 0.0;
    for (double c : {1e-10, 0.3, 7.0, 1e12}) {
      std::vector<double> s = w;
      for (auto& v : s) v *= c;
      worst = std::max(worst, std::abs(ess(s) - base) / base);
    }
    o.check(worst < 1e-12, "ESS scale invariance, max relative change " + num(worst, 3));
  }
  {
    const auto tv = scenario2_generate(3, 60, 1002);
    const RowMatrix pooled = pool_rows(tv);
    const Domain dom = Domain::bounding_box(pooled, 0.0);
    const TVModelSpec spec = make_tv_spec(pooled, 8, 1003);
    const TVDraws draws = run_tv_gibbs(tv, spec, dom, TVNoiseConfig{}, chain(300, 100, 1004));
    const DensityGrid g = posterior_density_grid(draws, spec, evaluation_points(dom, 500, 1005), dom.volume());
    double worst = 0.0;
    for (Eigen::Index t = 0; t < g.mean.rows(); ++t) worst = std::max(worst, std::abs(dom.volume() * g.mean.row(t).mean() - 1.0));
    o.check(worst < 1e-8, "renormalized density grids integrate to 1, max error " + num(worst, 3));

    const TVDraws again = run_tv_gibbs(tv, spec, dom, TVNoiseConfig{}, chain(300, 100, 1004));
    const bool same_tv = draws.theta.size() == again.theta.size() &&
                         std::memcmp(draws.theta.data(), again.theta.data(), sizeof(double) * draws.theta.size()) == 0 &&
                         std::memcmp(draws.lambda.data(), again.lambda.data(), sizeof(double) * draws.lambda.size()) == 0;
    TorusFitConfig fc;
    const TorusFit f1 = fit_torus_ncbayes(data, fc, chain(200, 50, 1006));
    const TorusFit f2 = fit_torus_ncbayes(data, fc, chain(200, 50, 1006));
    const bool same_torus = std::memcmp(f1.draws.draws.data(), f2.draws.draws.data(), sizeof(double) * f1.draws.draws.size()) == 0;
    o.check(same_tv && same_torus, "seed determinism is byte-exact");
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--jobs") == 0 && i + 1 < argc) {
      jobs = std::max(1, std::atoi(argv[++i]));
    } else {
      only.insert(std::atoi(argv[i]));
    }
  }

  const std::vector<std::pair<std::string, std::function<Outcome(int)>>> criteria = {
      {"Polya-Gamma sampler moments", pg_moments},
      {"Gibbs exactness against 2-D quadrature", gibbs_exactness},
      {"normalizing-constant recovery (d = 1 torus graph)", constant_recovery},
      {"time-varying density study (scenario 2, N1, 20 replications)", density_study},
      {"chain graph recovery, median rule", chain_median},
      {"chain graph recovery, 90% credible-interval rule", chain_ci},
      {"H-Bayes loss-scale pathology", hbayes_pathology},
      {"five-node graph recovery", cycle_study},
      {"single-site Gibbs generator against rejection sampling", gibbs_generator},
      {"property suites", properties},
  };

  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[k].second(jobs);
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << id << ": " << criteria[k].first << " ("
              << num(seconds_since(t0), 3) << " s)\n";
    for (const auto& n : o.notes) std::cout << "        " << n << '\n';
    std::cout.flush();
    failures += !o.pass;
  }
  std::cout << (failures ? std::to_string(failures) + " criterion/criteria failed" : std::string("all criteria passed")) << '\n';
  return failures ? 1 : 0;
}
