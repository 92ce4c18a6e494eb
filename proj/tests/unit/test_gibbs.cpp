#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"

#include "ncbayes/errors.hpp"
#include "ncbayes/gibbs.hpp"
#include "ncbayes/stats.hpp"

using namespace ncbayes;

namespace {

Domain unit_interval() { return Domain::box(Eigen::VectorXd::Constant(1, 0.0), Eigen::VectorXd::Constant(1, 1.0)); }

// eta(x) = x on [0, 1] with base measure exp(tilt * x).
ExpFamModel linear_model(double tilt = 0.0) {
  return ExpFamModel(
      1, [](std::span<const double> x, std::span<double> eta) { eta[0] = x[0]; },
      [tilt](std::span<const double> x) { return tilt * x[0]; }, unit_interval());
}

ExpFamModel beta_only_model(double tilt) {
  return ExpFamModel(0, {}, [tilt](std::span<const double> x) { return tilt * x[0]; }, unit_interval());
}

RowMatrix column(std::initializer_list<double> v) {
  RowMatrix m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

std::vector<double> col(const Eigen::MatrixXd& m, int j) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)] = m(i, j);
  return out;
}

// Monte Carlo standard error of a chain mean from 20 batch means.
double batch_se(const std::vector<double>& x) {
  const int B = 20;
  const std::size_t len = x.size() / B;
  std::vector<double> means;
  for (int b = 0; b < B; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < len; ++i) s += x[b * len + i];
    means.push_back(s / static_cast<double>(len));
  }
  return std::sqrt(sample_variance(means) / B);
}

GibbsConfig config(int iterations, int burn_in, std::uint64_t seed) {
  GibbsConfig cfg;
  cfg.iterations = iterations;
  cfg.burn_in = burn_in;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("conditional with no samples equals the prior") {
  LabeledSet empty;
  empty.design.resize(0, 2);
  empty.offset.resize(0);
  empty.label.resize(0);
  GaussianPrior prior{Eigen::Vector2d(0.5, -1.0), Eigen::Matrix2d{{2.0, 0.3}, {0.3, 1.0}}};
  const GaussianConditional c = gaussian_conditional(prior, empty, Eigen::VectorXd(0));
  CHECK((c.mean - prior.mean).norm() < 1e-12);
  CHECK((c.covariance() - prior.cov).norm() < 1e-12);
}

TEST_CASE("zero omegas leave the precision unchanged") {
  LabeledSet one;
  one.design = RowMatrix{{0.4, 1.0}};
  one.offset = Eigen::VectorXd::Constant(1, 0.7);
  one.label = Eigen::VectorXd::Ones(1);
  GaussianPrior prior{Eigen::Vector2d(0.5, -1.0), Eigen::Matrix2d{{2.0, 0.3}, {0.3, 1.0}}};
  const GaussianConditional c = gaussian_conditional(prior, one, Eigen::VectorXd::Zero(1));
  CHECK((c.covariance() - prior.cov).norm() < 1e-12);
  const Eigen::Vector2d expected = prior.mean + prior.cov * (0.5 * Eigen::Vector2d(0.4, 1.0));
  CHECK((c.mean - expected).norm() < 1e-12);
}

TEST_CASE("conditional matches explicit linear algebra") {
  LabeledSet set;
  set.design = RowMatrix{{0.2, 1.0}, {-0.7, 1.0}, {1.3, 1.0}};
  set.offset = Eigen::Vector3d(0.1, -0.4, 0.9);
  set.label = Eigen::Vector3d(1.0, 0.0, 1.0);
  const Eigen::Vector3d w(0.21, 0.05, 0.33);
  GaussianPrior prior{Eigen::Vector2d(0.3, -0.2), Eigen::Matrix2d{{1.5, -0.2}, {-0.2, 0.8}}};

  Eigen::Matrix2d P = prior.cov.inverse();
  Eigen::Vector2d rhs = P * prior.mean;
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector2d z = set.design.row(i).transpose();
    P += w[i] * z * z.transpose();
    rhs += (set.label[i] - 0.5 - w[i] * set.offset[i]) * z;
  }
  const Eigen::Matrix2d B1 = P.inverse();
  const Eigen::Vector2d A1 = B1 * rhs;
  const GaussianConditional c = gaussian_conditional(prior, set, w);
  CHECK((c.mean - A1).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((c.covariance() - B1).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((c.precision - c.precision.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  const Eigen::MatrixXd cov = c.covariance();
  CHECK((cov - cov.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(cov).eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("robust Cholesky retries once with jitter") {
  Eigen::MatrixXd nearly(2, 2);
  nearly << 1.0, 1.0, 1.0, 1.0 - 1e-14;
  bool jittered = false;
  const auto llt = robust_cholesky(nearly, &jittered);
  CHECK(jittered);
  CHECK(llt.info() == Eigen::Success);
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 0.0, 0.0, -1.0;
  CHECK_THROWS_AS(robust_cholesky(bad), NumericalError);
}

TEST_CASE("degenerate prior pins the draws") {
  const ExpFamModel model = linear_model();
  const RowMatrix data = column({0.1, 0.5, 0.9});
  const RowMatrix noise = column({0.2, 0.3, 0.8});
  GaussianPrior prior = GaussianPrior::isotropic(2, 1e-12);
  prior.mean = Eigen::Vector2d(0.7, -0.3);
  const NoiseSpec q = NoiseSpec::uniform(model.domain(), 3);
  const PosteriorDraws d = run_fixed_noise(model, data, noise, q.log_density, prior, config(300, 100, 3));
  CHECK((d.draws.rowwise() - prior.mean.transpose()).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("beta-only toy matches 1-D quadrature") {
  const ExpFamModel model = beta_only_model(0.8);
  const RowMatrix data = column({0.15, 0.62, 0.91, 0.44});
  const RowMatrix noise = column({0.05, 0.37, 0.58, 0.71, 0.88});
  const NoiseSpec q = NoiseSpec::uniform(model.domain(), 5);
  const double var = 4.0;
  const PosteriorDraws d =
      run_fixed_noise(model, data, noise, q.log_density, GaussianPrior::isotropic(1, var), config(21000, 1000, 5));
  const LabeledSet set = build_labeled(data, noise, model, q);
  const auto lp = [&](double b) {
    double v = -b * b / (2 * var);
    for (Eigen::Index i = 0; i < set.size(); ++i) {
      const double psi = b + set.offset[i];
      v += set.label[i] * psi - log1p_exp(psi);
    }
    return v;
  };
  const double Z = oracle::simpson([&](double b) { return std::exp(lp(b)); }, -15, 15, 6000);
  const double m1 = oracle::simpson([&](double b) { return b * std::exp(lp(b)); }, -15, 15, 6000) / Z;
  const double m2 = oracle::simpson([&](double b) { return b * b * std::exp(lp(b)); }, -15, 15, 6000) / Z;
  const double sd = std::sqrt(m2 - m1 * m1);
  const std::vector<double> beta = col(d.draws, 0);
  const double se = batch_se(beta);
  CHECK(std::abs(mean(beta) - m1) < 3.0 * se);
  CHECK(std::abs(std::sqrt(sample_variance(beta)) - sd) < 0.02);
}

TEST_CASE("two-parameter toy matches 2-D quadrature") {
  const ExpFamModel model = linear_model();
  const RowMatrix data = column({0.55, 0.71, 0.83, 0.92, 0.35, 0.97});
  const RowMatrix noise = column({0.08, 0.21, 0.47, 0.66, 0.13, 0.79});
  const NoiseSpec q = NoiseSpec::uniform(model.domain(), 6);
  const double var = 10.0;
  const PosteriorDraws d =
      run_fixed_noise(model, data, noise, q.log_density, GaussianPrior::isotropic(2, var), config(21000, 1000, 17));
  const LabeledSet set = build_labeled(data, noise, model, q);
  const auto post = oracle::quadrature_2d(
      [&](double a, double b) { return oracle::classification_log_posterior(set, a, b, var); }, 25.0);
  const std::vector<double> theta = col(d.draws, 0), beta = col(d.draws, 1);
  CHECK(std::abs(mean(theta) - post.a.mean) < 0.02 * std::max(1.0, post.a.sd));
  CHECK(std::abs(mean(beta) - post.b.mean) < 0.02 * std::max(1.0, post.b.sd));
  CHECK(std::abs(std::sqrt(sample_variance(theta)) - post.a.sd) < 0.02 * std::max(1.0, post.a.sd));
  CHECK(std::abs(std::sqrt(sample_variance(beta)) - post.b.sd) < 0.02 * std::max(1.0, post.b.sd));
  CHECK(oracle::ks_against(theta, post.a) < 0.05);
  CHECK(oracle::ks_against(beta, post.b) < 0.05);
}

TEST_CASE("constant generator reproduces the fixed-noise chain") {
  const ExpFamModel model = linear_model();
  const RowMatrix data = column({0.2, 0.4, 0.9});
  const RowMatrix noise = column({0.1, 0.6, 0.7});
  NoiseSpec constant = NoiseSpec::uniform(model.domain(), 3);
  constant.sampler = [i = 0, noise](RandomStream&, std::span<double> out) mutable {
    out[0] = noise(i % 3, 0);
    ++i;
  };
  const GaussianPrior prior = GaussianPrior::isotropic(2, 10.0);
  const PosteriorDraws a = run_fixed_noise(model, data, noise, constant.log_density, prior, config(500, 100, 9));
  const PosteriorDraws b = run_refreshed_noise(model, data, constant, prior, config(500, 100, 9));
  CHECK(a.draws == b.draws);
  CHECK(b.noise_refreshes == 499);
}

TEST_CASE("refreshed noise averages over noise sets") {
  const double tilt = 1.5;
  const ExpFamModel model = beta_only_model(tilt);
  RandomStream rng(21);
  RowMatrix data(40, 1);
  for (int i = 0; i < 40; ++i) data(i, 0) = rng.uniform();
  const NoiseSpec q = NoiseSpec::uniform(model.domain(), 40);
  const GaussianPrior prior = GaussianPrior::isotropic(1, 100.0);
  std::vector<double> set_means;
  std::vector<double> set_ses;
  for (int k = 0; k < 20; ++k) {
    const RowMatrix noise = q.draw(1, rng);
    const PosteriorDraws d = run_fixed_noise(model, data, noise, q.log_density, prior, config(4000, 500, 100 + k));
    const auto b = col(d.draws, 0);
    set_means.push_back(mean(b));
    set_ses.push_back(batch_se(b));
  }
  NoiseSpec gen = q;
  gen.mode = NoiseMode::generator;
  const PosteriorDraws r = run_refreshed_noise(model, data, gen, prior, config(20500, 500, 77));
  const auto b = col(r.draws, 0);
  double chain_var = 0.0;
  for (double s : set_ses) chain_var += s * s;
  const double se = std::sqrt(batch_se(b) * batch_se(b) + sample_variance(set_means) / 20.0 + chain_var / 400.0);
  CHECK(std::abs(mean(b) - mean(set_means)) < 3.0 * se);
}

TEST_CASE("noise count and configuration preconditions") {
  const ExpFamModel model = linear_model();
  const RowMatrix data = column({0.2, 0.4});
  NoiseSpec q = NoiseSpec::uniform(model.domain(), 3);
  q.m = 0;
  CHECK_THROWS_AS(run_refreshed_noise(model, data, q, GaussianPrior::isotropic(2, 1.0), config(10, 5, 1)),
                  ValidationError);
  GibbsConfig bad = config(10, 10, 1);
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("draws are reproducible from the seed") {
  const ExpFamModel model = linear_model();
  const RowMatrix data = column({0.2, 0.4, 0.8, 0.85});
  const NoiseSpec q = NoiseSpec::uniform(model.domain(), 4);
  const GaussianPrior prior = GaussianPrior::isotropic(2, 10.0);
  const PosteriorDraws a = run_refreshed_noise(model, data, q, prior, config(400, 100, 31));
  const PosteriorDraws b = run_refreshed_noise(model, data, q, prior, config(400, 100, 31));
  const PosteriorDraws c = run_refreshed_noise(model, data, q, prior, config(400, 100, 32));
  CHECK(a.draws == b.draws);
  CHECK(a.log_likelihood == b.log_likelihood);
  CHECK(a.draws != c.draws);
}

TEST_CASE("hierarchical model with one frozen group matches the flat chain") {
  const ExpFamModel model = linear_model();
  RandomStream rng(41);
  RowMatrix data(30, 1), noise(30, 1);
  for (int i = 0; i < 30; ++i) {
    data(i, 0) = std::sqrt(rng.uniform());  // density 2x
    noise(i, 0) = rng.uniform();
  }
  const NoiseSpec q = NoiseSpec::uniform(model.domain(), 30);
  HierarchicalState init;
  init.mu = Eigen::VectorXd::Constant(1, 0.5);
  init.sigma = Eigen::MatrixXd::Constant(1, 1, 4.0);
  init.mu_beta = -0.5;
  init.sigma_beta2 = 9.0;
  HierarchicalGroup g{data, q, noise};
  const HierarchicalDraws h = run_hierarchical(model, {g}, {}, init, config(20500, 500, 5), true);
  GaussianPrior prior{Eigen::Vector2d(0.5, -0.5), Eigen::Vector2d(4.0, 9.0).asDiagonal()};
  const PosteriorDraws f = run_fixed_noise(model, data, noise, q.log_density, prior, config(20500, 500, 6));
  for (int j = 0; j < 2; ++j) {
    const auto a = col(h.groups[0].draws, j), b = col(f.draws, j);
    const double se = std::hypot(batch_se(a), batch_se(b));
    CHECK(std::abs(mean(a) - mean(b)) < 3.0 * se);
  }
}

TEST_CASE("hierarchical exchangeability and shrinkage") {
  const ExpFamModel model = linear_model();
  const NoiseSpec q = NoiseSpec::uniform(model.domain(), 1);
  RandomStream rng(51);
  const auto draw_group = [&](int n, bool increasing) {
    RowMatrix data(n, 1), noise(n, 1);
    for (int i = 0; i < n; ++i) {
      const double u = std::sqrt(rng.uniform());
      data(i, 0) = increasing ? u : 1.0 - u;
      noise(i, 0) = rng.uniform();
    }
    return HierarchicalGroup{data, q, noise};
  };
  HierarchicalState init;
  init.mu = Eigen::VectorXd::Zero(1);
  init.sigma = Eigen::MatrixXd::Identity(1, 1);
  init.mu_beta = 0.0;
  init.sigma_beta2 = 1.0;

  SUBCASE("identical groups") {
    const HierarchicalGroup g = draw_group(40, true);
    const HierarchicalDraws h = run_hierarchical(model, {g, g}, {}, init, config(20500, 500, 7));
    const auto a = col(h.groups[0].draws, 0), b = col(h.groups[1].draws, 0);
    CHECK(std::abs(mean(a) - mean(b)) < 3.0 * std::hypot(batch_se(a), batch_se(b)));
  }
  SUBCASE("small group shrinks toward the population mean") {
    const HierarchicalGroup big = draw_group(300, true);
    const HierarchicalGroup small = draw_group(8, false);
    const HierarchicalDraws h = run_hierarchical(model, {big, small}, {}, init, config(10500, 500, 8));
    const PosteriorDraws flat = run_fixed_noise(model, small.data, *small.fixed_noise, q.log_density,
                                                GaussianPrior::isotropic(2, 100.0), config(10500, 500, 9));
    const double own = flat.posterior_mean()[0];
    const double pooled = h.mu.col(0).mean();
    const double shrunk = h.groups[1].posterior_mean()[0];
    CAPTURE(own);
    CAPTURE(pooled);
    CAPTURE(shrunk);
    CHECK(shrunk > std::min(own, pooled));
    CHECK(shrunk < std::max(own, pooled));
  }
}

TEST_CASE("inverse Wishart mean") {
  RandomStream rng(61);
  Eigen::Matrix2d S{{2.0, 0.5}, {0.5, 1.0}};
  const double dof = 8.0;
  Eigen::Matrix2d acc = Eigen::Matrix2d::Zero();
  const int n = 40000;
  for (int i = 0; i < n; ++i) acc += sample_inverse_wishart(dof, S, rng);
  const Eigen::Matrix2d expected = S / (dof - 2 - 1);
  CHECK((acc / n - expected).cwiseAbs().maxCoeff() < 0.02);
}
