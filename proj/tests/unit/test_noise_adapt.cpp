#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"

#include "ncbayes/errors.hpp"
#include "ncbayes/gibbs.hpp"
#include "ncbayes/noise_adapt.hpp"
#include "ncbayes/stats.hpp"
#include "ncbayes/torus_graph.hpp"

using namespace ncbayes;

namespace {

std::vector<double> first_col(const RowMatrix& m) {
  std::vector<double> v(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) v[static_cast<std::size_t>(i)] = m(i, 0);
  return v;
}

TemperedNoiseState state_for(const Domain& base, Eigen::VectorXd gt, double alpha, int M) {
  return TemperedNoiseState{base, std::move(gt), alpha, M, 0.0, 0.0};
}

}  // namespace

TEST_CASE("ESS values") {
  CHECK(ess(std::vector<double>(7, 0.3)) == doctest::Approx(7.0));
  CHECK(ess(std::vector<double>{0.0, 0.0, 2.5, 0.0}) == doctest::Approx(1.0));
  CHECK(ess(std::vector<double>{1.0, 1.0, 2.0}) == doctest::Approx(16.0 / 6.0).epsilon(1e-14));
  CHECK_THROWS_AS(ess(std::vector<double>{0.0, 0.0}), ValidationError);
  CHECK(ess_from_log_weights(std::vector<double>{std::log(1.0), std::log(1.0), std::log(2.0)}) ==
        doctest::Approx(16.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("ESS is scale invariant") {
  RandomStream rng(1);
  std::vector<double> w(200);
  for (auto& v : w) v = rng.exponential();
  const double base = ess(w);
  for (double c : {1e-8, 0.37, 5.0, 1e9}) {
    std::vector<double> scaled = w;
    for (auto& v : scaled) v *= c;
    CHECK(std::abs(ess(scaled) - base) <= 1e-12 * base);
  }
}

TEST_CASE("mini-batch mean") {
  Eigen::MatrixXd one(1, 3);
  one << 0.5, -1.0, 2.0;
  CHECK(update_gamma_tilde(one) == one.row(0).transpose());
  Eigen::MatrixXd two(2, 4);
  two.row(0).setZero();
  two.row(1).setConstant(2.0);
  CHECK((update_gamma_tilde(two) - Eigen::VectorXd::Ones(4)).norm() == 0.0);
  RandomStream rng(2);
  Eigen::MatrixXd batch(50, 3);
  for (Eigen::Index i = 0; i < 50; ++i)
    for (Eigen::Index j = 0; j < 3; ++j) batch(i, j) = rng.normal();
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(3);
  for (Eigen::Index i = 0; i < 50; ++i) expected += batch.row(i).transpose();
  expected /= 50.0;
  CHECK((update_gamma_tilde(batch) - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("vanishing tempering returns a uniform subsample") {
  const ExpFamModel model = torus_model(1);
  const Domain base = Domain::torus(1);
  RandomStream rng(3);
  Eigen::VectorXd gt(3);
  gt << 3.0, -1.0, 0.5;
  for (const auto& s : {state_for(base, gt, 1e-12, 10000), state_for(base, Eigen::VectorXd::Zero(3), 0.7, 10000)}) {
    const TemperedResample r = tempered_resample(s, 2000, model, rng);
    CHECK(r.noise.rows() == 2000);
    CHECK(r.state.last_ess == doctest::Approx(10000.0).epsilon(1e-6));
    const auto x = first_col(r.noise);
    CHECK(ks_one_sample(x, [](double v) { return v / kTwoPi; }) < 0.05);
  }
}

TEST_CASE("full tempering recovers the von Mises mean direction") {
  const ExpFamModel model = torus_model(1);
  const double mu = 1.0, kappa = 2.0;
  Eigen::VectorXd gt(3);
  gt << kappa * std::cos(mu), kappa * std::sin(mu), -2.0;
  RandomStream rng(4);
  const TemperedResample r = tempered_resample(state_for(Domain::torus(1), gt, 1.0, 100000), 20000, model, rng);
  // Quadrature of the tempered density for the mean direction.
  const auto dens = [&](double x) { return std::exp(gt[0] * std::cos(x) + gt[1] * std::sin(x)); };
  const double c = oracle::simpson([&](double x) { return std::cos(x) * dens(x); }, 0, kTwoPi, 4000);
  const double s = oracle::simpson([&](double x) { return std::sin(x) * dens(x); }, 0, kTwoPi, 4000);
  const double target = std::atan2(s, c);
  const CircularSummary cs = circular_summary(first_col(r.noise));
  CHECK(std::abs(std::remainder(cs.mean_direction - target, kTwoPi)) < 0.05);

  // The normalizer estimate and the normalized density agree with quadrature.
  const double z = oracle::simpson([&](double x) { return std::exp(gt[2]) * dens(x); }, 0, kTwoPi, 4000);
  CHECK(r.state.log_z_alpha == doctest::Approx(std::log(z)).epsilon(0.01));
  const double mass = oracle::simpson(
      [&](double x) {
        const double xs[1] = {x};
        return std::exp(r.density.log_density(xs));
      },
      0, kTwoPi, 4000);
  CHECK(mass == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("importance estimates converge to quadrature") {
  const ExpFamModel model = torus_model(1);
  Eigen::VectorXd gt(3);
  gt << 1.2, 0.4, 0.0;
  const double alpha = 0.5;
  const auto dens = [&](double x) { return std::exp(alpha * (gt[0] * std::cos(x) + gt[1] * std::sin(x))); };
  const double z = oracle::simpson(dens, 0, kTwoPi, 4000);
  const double truth = oracle::simpson([&](double x) { return std::cos(x) * dens(x); }, 0, kTwoPi, 4000) / z;
  RandomStream rng(5);
  const int m = 20000;
  const TemperedResample r = tempered_resample(state_for(Domain::torus(1), gt, alpha, 100000), m, model, rng);
  std::vector<double> cosines;
  for (Eigen::Index i = 0; i < r.noise.rows(); ++i) cosines.push_back(std::cos(r.noise(i, 0)));
  const double se = std::sqrt(sample_variance(cosines) / m);
  CHECK(std::abs(mean(cosines) - truth) < 3.0 * se);
}

TEST_CASE("resampling returns exactly m points") {
  RandomStream rng(6);
  const std::vector<double> probs{0.1, 0.2, 0.3, 0.4};
  for (auto scheme : {ResampleScheme::multinomial, ResampleScheme::systematic}) {
    const auto idx = resample_indices(probs, 100000, rng, scheme);
    CHECK(idx.size() == 100000);
    std::vector<double> counts(4, 0.0);
    for (auto i : idx) counts[i] += 1.0;
    for (int k = 0; k < 4; ++k) CHECK(counts[k] / 1e5 == doctest::Approx(probs[k]).epsilon(0.03));
  }
}

TEST_CASE("degenerate weights and bad arguments") {
  const ExpFamModel model = torus_model(1);
  RandomStream rng(7);
  Eigen::VectorXd gt(3);
  gt << std::numeric_limits<double>::infinity(), 0.0, 0.0;
  CHECK_THROWS_AS(tempered_resample(state_for(Domain::torus(1), gt, 1.0, 100), 10, model, rng), NumericalError);
  CHECK_THROWS_AS(tempered_resample(state_for(Domain::torus(1), Eigen::VectorXd::Zero(3), 0.0, 100), 10, model, rng),
                  ValidationError);
  CHECK_THROWS_AS(tempered_resample(state_for(Domain::torus(1), Eigen::VectorXd::Zero(3), 0.2, 5), 10, model, rng),
                  ValidationError);
}

TEST_CASE("adaptive chain updates noise on the cadence") {
  const ExpFamModel model = torus_model(1);
  RandomStream rng(8);
  RowMatrix data(200, 1);
  for (int i = 0; i < 200; ++i) data(i, 0) = rng.von_mises(0.5, 2.0);
  const NoiseSpec q = NoiseSpec::uniform(Domain::torus(1), 200);
  FixedPrior prior(GaussianPrior::isotropic(3, 100.0));
  GibbsConfig cfg;
  cfg.iterations = 600;
  cfg.burn_in = 300;
  cfg.seed = 9;
  cfg.noise_mode = NoiseMode::adaptive;
  const PosteriorDraws all = run_chain(model, data, q, nullptr, prior, cfg);
  CHECK(all.noise_refreshes == 12);
  CHECK(all.ess_trace.size() == 12);
  for (double e : all.ess_trace) CHECK(e > 0.0);
  cfg.adapt.burn_in_only = true;
  const PosteriorDraws burn = run_chain(model, data, q, nullptr, prior, cfg);
  CHECK(burn.noise_refreshes == 6);
}
