#include "ncbayes/gibbs.hpp"

#include <cmath>
#include <string>

#include "ncbayes/errors.hpp"
#include "ncbayes/pg.hpp"

namespace ncbayes {

GaussianPrior GaussianPrior::isotropic(Eigen::Index size, double variance) {
  require(variance > 0.0, "prior variance must be positive");
  return {Eigen::VectorXd::Zero(size), Eigen::MatrixXd::Identity(size, size) * variance};
}

void GaussianPrior::validate() const {
  require(mean.size() >= 1, "prior mean must be nonempty");
  require(cov.rows() == mean.size() && cov.cols() == mean.size(), "prior covariance dimension mismatch");
  require(mean.allFinite() && cov.allFinite(), "prior must be finite");
  require((cov - cov.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * (1.0 + cov.cwiseAbs().maxCoeff()),
          "prior covariance must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  require(llt.info() == Eigen::Success, "prior covariance must be positive definite");
}

Eigen::MatrixXd GaussianConditional::covariance() const {
  return chol.solve(Eigen::MatrixXd::Identity(mean.size(), mean.size()));
}

Eigen::VectorXd GaussianConditional::draw(RandomStream& rng) const {
  const Eigen::VectorXd eps = rng.normal_vector(mean.size());
  return mean + chol.matrixU().solve(eps);
}

Eigen::LLT<Eigen::MatrixXd> robust_cholesky(Eigen::MatrixXd& precision, bool* jittered) {
  if (jittered) *jittered = false;
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() == Eigen::Success) return llt;
  const double jitter = 1e-8 * precision.trace() / static_cast<double>(precision.rows());
  precision.diagonal().array() += std::fabs(jitter);
  llt.compute(precision);
  if (llt.info() != Eigen::Success)
    throw NumericalError("precision matrix is not positive definite after jitter");
  if (jittered) *jittered = true;
  return llt;
}

GaussianConditional gaussian_conditional_precision(const Eigen::MatrixXd& prior_precision,
                                                   const Eigen::VectorXd& prior_shift, const LabeledSet& samples,
                                                   const Eigen::VectorXd& omegas) {
  const Eigen::Index k = prior_shift.size();
  require(prior_precision.rows() == k && prior_precision.cols() == k, "prior precision dimension mismatch");
  require(samples.size() == 0 || samples.design.cols() == k, "design width does not match the prior");
  require(omegas.size() == samples.size(), "one PG variable per sample is required");

  GaussianConditional out;
  out.precision = prior_precision;
  Eigen::VectorXd rhs = prior_shift;
  if (samples.size() > 0) {
    require((omegas.array() >= 0.0).all(), "PG variables must be nonnegative");
    const Eigen::MatrixXd weighted = samples.design.array().colwise() * omegas.array().sqrt();
    out.precision.selfadjointView<Eigen::Lower>().rankUpdate(weighted.transpose());
    out.precision.triangularView<Eigen::StrictlyUpper>() = out.precision.transpose();
    const Eigen::VectorXd kappa =
        samples.label.array() - 0.5 - omegas.array() * samples.offset.array();
    rhs.noalias() += samples.design.transpose() * kappa;
  }
  out.chol = robust_cholesky(out.precision, &out.jittered);
  out.mean = out.chol.solve(rhs);
  if (!out.mean.allFinite()) throw NumericalError("Gaussian conditional mean is not finite");
  return out;
}

GaussianConditional gaussian_conditional(const GaussianPrior& prior, const LabeledSet& samples,
                                         const Eigen::VectorXd& omegas) {
  prior.validate();
  FixedPrior fp(prior);
  return gaussian_conditional_precision(fp.precision(), fp.shift(), samples, omegas);
}

void draw_omegas(const Eigen::VectorXd& gamma, const LabeledSet& samples, Eigen::VectorXd& omegas,
                 RandomStream& rng) {
  const Eigen::VectorXd psi = linear_predictor(gamma, samples);
  omegas.resize(psi.size());
  for (Eigen::Index i = 0; i < psi.size(); ++i) omegas[i] = sample_pg1(PGTilt(psi[i]), rng);
}

void GibbsConfig::validate() const {
  require(iterations >= 1, "iterations must be positive");
  require(burn_in >= 0 && burn_in < iterations, "burn-in must lie in [0, iterations)");
  require(thin >= 1, "thin must be positive");
  require(kept() >= 1, "configuration keeps zero iterations");
  if (noise_mode == NoiseMode::adaptive) {
    require(adapt.alpha > 0.0 && adapt.alpha <= 1.0, "alpha must lie in (0, 1]");
    require(adapt.cadence >= 1, "adaptation cadence must be positive");
    require(adapt.proposals_per_noise >= 1, "proposals per noise point must be positive");
  }
}

Eigen::VectorXd PosteriorDraws::posterior_sd() const {
  const Eigen::RowVectorXd m = draws.colwise().mean();
  const Eigen::MatrixXd c = draws.rowwise() - m;
  const double denom = std::max<double>(1.0, static_cast<double>(draws.rows() - 1));
  return (c.array().square().colwise().sum() / denom).sqrt().transpose();
}

std::vector<std::string> gamma_column_names(int p) {
  std::vector<std::string> names;
  for (int i = 1; i <= p; ++i) names.push_back("theta_" + std::to_string(i));
  names.push_back("beta");
  return names;
}

Eigen::VectorXd PriorUpdater::prior_mean() const {
  Eigen::MatrixXd p = precision();
  return robust_cholesky(p).solve(shift());
}

FixedPrior::FixedPrior(const GaussianPrior& prior) {
  prior.validate();
  Eigen::LLT<Eigen::MatrixXd> llt(prior.cov);
  precision_ = llt.solve(Eigen::MatrixXd::Identity(prior.cov.rows(), prior.cov.cols()));
  precision_ = 0.5 * (precision_ + precision_.transpose());
  shift_ = precision_ * prior.mean;
}

namespace {

Domain default_adaptive_base(const ExpFamModel& model, const RowMatrix& data) {
  if (model.domain().kind() == Domain::Kind::torus) return Domain::torus(model.domain().dim());
  return Domain::bounding_box(data, 0.1);
}

}  // namespace

PosteriorDraws run_chain(const ExpFamModel& model, const RowMatrix& data, const NoiseSpec& noise_spec,
                         const RowMatrix* fixed_noise, PriorUpdater& prior, const GibbsConfig& cfg) {
  cfg.validate();
  require(data.rows() >= 1, "genuine data set must be nonempty");
  const int dim = model.domain().dim();
  const int m = fixed_noise ? static_cast<int>(fixed_noise->rows()) : noise_spec.m;
  require(m >= 1, "noise count m must be at least 1");

  RandomStream rng(cfg.seed);
  PosteriorDraws out;
  out.column_names = gamma_column_names(model.p());
  const Eigen::Index k = model.p() + 1;

  std::optional<TemperedNoiseState> tempered;
  LabeledSet set;
  switch (cfg.noise_mode) {
    case NoiseMode::fixed_set:
      set = build_labeled(data, fixed_noise ? *fixed_noise : noise_spec.draw(dim, rng), model,
                          noise_spec.log_density);
      break;
    case NoiseMode::generator:
      require(static_cast<bool>(noise_spec.sampler), "refreshed noise needs a generator");
      set = build_labeled(data, noise_spec.draw(dim, rng), model, noise_spec.log_density);
      break;
    case NoiseMode::adaptive: {
      Domain base = cfg.adapt.base ? *cfg.adapt.base : default_adaptive_base(model, data);
      NoiseSpec initial = NoiseSpec::uniform(base, m);
      set = build_labeled(data, initial.draw(dim, rng), model, initial.log_density);
      tempered = TemperedNoiseState{base, Eigen::VectorXd::Zero(k), cfg.adapt.alpha,
                                    cfg.adapt.proposals_per_noise * m, 0.0, 0.0};
      break;
    }
  }

  Eigen::VectorXd gamma = prior.prior_mean();
  Eigen::VectorXd omegas;
  const int kept = cfg.kept();
  out.draws.resize(kept, k);
  out.log_likelihood.resize(kept);
  Eigen::MatrixXd batch(tempered ? cfg.adapt.cadence : 0, k);
  int batch_fill = 0;
  int row = 0;

  for (int it = 0; it < cfg.iterations; ++it) {
    if (cfg.noise_mode == NoiseMode::generator && it > 0) {
      replace_noise(set, noise_spec.draw(dim, rng), model, noise_spec.log_density);
      ++out.noise_refreshes;
    }
    draw_omegas(gamma, set, omegas, rng);
    const GaussianConditional cond = gaussian_conditional_precision(prior.precision(), prior.shift(), set, omegas);
    if (cond.jittered) ++out.jitter_retries;
    gamma = cond.draw(rng);
    prior.update(gamma, rng);

    if (tempered) {
      batch.row(batch_fill++) = gamma.transpose();
      if (batch_fill == cfg.adapt.cadence) {
        batch_fill = 0;
        if (!cfg.adapt.burn_in_only || it < cfg.burn_in) {
          tempered->gamma_tilde = update_gamma_tilde(batch);
          TemperedResample res = tempered_resample(*tempered, m, model, rng, cfg.adapt.scheme);
          replace_noise(set, res.noise, model, res.density.as_function());
          *tempered = res.state;
          out.ess_trace.push_back(res.state.last_ess);
          if (res.state.last_ess < cfg.adapt.ess_warn_fraction * res.state.proposals) out.ess_warning = true;
          ++out.noise_refreshes;
        }
      }
    }

    if (it >= cfg.burn_in && (it - cfg.burn_in) % cfg.thin == 0 && row < kept) {
      out.draws.row(row) = gamma.transpose();
      out.log_likelihood[row] = log_classification_likelihood(gamma, set);
      prior.record();
      ++row;
    }
  }
  if (!out.draws.allFinite()) throw NumericalError("posterior draws contain non-finite values");
  return out;
}

PosteriorDraws run_fixed_noise(const ExpFamModel& model, const RowMatrix& data, const RowMatrix& noise_set,
                               const LogDensity& noise_log_density, const GaussianPrior& prior,
                               const GibbsConfig& cfg) {
  require(noise_set.rows() >= 1, "fixed noise set must be nonempty");
  NoiseSpec spec;
  spec.mode = NoiseMode::fixed_set;
  spec.log_density = noise_log_density;
  spec.m = static_cast<int>(noise_set.rows());
  GibbsConfig c = cfg;
  c.noise_mode = NoiseMode::fixed_set;
  FixedPrior fp(prior);
  return run_chain(model, data, spec, &noise_set, fp, c);
}

PosteriorDraws run_refreshed_noise(const ExpFamModel& model, const RowMatrix& data, const NoiseSpec& noise_spec,
                                   const GaussianPrior& prior, const GibbsConfig& cfg) {
  require(noise_spec.m >= 1, "noise count m must be at least 1");
  require(noise_spec.mode == NoiseMode::generator, "refreshed noise requires a generator noise spec");
  GibbsConfig c = cfg;
  c.noise_mode = NoiseMode::generator;
  FixedPrior fp(prior);
  return run_chain(model, data, noise_spec, nullptr, fp, c);
}

Eigen::MatrixXd sample_inverse_wishart(double dof, const Eigen::MatrixXd& scale, RandomStream& rng) {
  const Eigen::Index p = scale.rows();
  require(dof > static_cast<double>(p) - 1.0, "inverse-Wishart dof must exceed dimension - 1");
  const Eigen::MatrixXd scale_inv = scale.llt().solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd l = scale_inv.llt().matrixL();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    a(i, i) = std::sqrt(rng.chi_squared(dof - static_cast<double>(i)));
    for (Eigen::Index j = 0; j < i; ++j) a(i, j) = rng.normal();
  }
  const Eigen::MatrixXd la = l * a;
  const Eigen::MatrixXd wishart = la * la.transpose();
  Eigen::MatrixXd out = wishart.llt().solve(Eigen::MatrixXd::Identity(p, p));
  return 0.5 * (out + out.transpose());
}

HierarchicalDraws run_hierarchical(const ExpFamModel& model, const std::vector<HierarchicalGroup>& groups,
                                   const HierarchicalHyperprior& hyper, const HierarchicalState& initial,
                                   const GibbsConfig& cfg, bool freeze_hyper) {
  cfg.validate();
  require(!groups.empty(), "hierarchical model needs at least one group");
  const int p = model.p();
  const Eigen::Index k = p + 1;
  const int dim = model.domain().dim();
  const auto n_groups = static_cast<int>(groups.size());
  require(initial.mu.size() == p && initial.sigma.rows() == p && initial.sigma.cols() == p,
          "initial hyperparameters do not match the model dimension");
  require(initial.sigma_beta2 > 0.0, "sigma_beta2 must be positive");

  RandomStream rng(cfg.seed);
  HierarchicalState state = initial;
  std::vector<LabeledSet> sets(groups.size());
  for (std::size_t j = 0; j < groups.size(); ++j) {
    const auto& g = groups[j];
    require(g.fixed_noise.has_value() || g.noise.m >= 1, "each group needs noise");
    sets[j] = build_labeled(g.data, g.fixed_noise ? *g.fixed_noise : g.noise.draw(dim, rng), model,
                            g.noise.log_density);
  }
  state.gamma.assign(groups.size(), Eigen::VectorXd());
  for (auto& gm : state.gamma) {
    gm.resize(k);
    gm << initial.mu, initial.mu_beta;
  }

  const int kept = cfg.kept();
  HierarchicalDraws out;
  out.groups.resize(groups.size());
  for (auto& d : out.groups) {
    d.draws.resize(kept, k);
    d.log_likelihood.resize(kept);
    d.column_names = gamma_column_names(p);
  }
  out.mu.resize(kept, p);
  out.sigma_diag.resize(kept, p);
  out.mu_beta.resize(kept);
  out.sigma_beta2.resize(kept);

  Eigen::VectorXd omegas;
  Eigen::MatrixXd prior_prec = Eigen::MatrixXd::Zero(k, k);
  Eigen::VectorXd prior_shift(k);
  int row = 0;
  for (int it = 0; it < cfg.iterations; ++it) {
    Eigen::MatrixXd sigma_copy = state.sigma;
    Eigen::MatrixXd sigma_inv =
        p > 0 ? robust_cholesky(sigma_copy).solve(Eigen::MatrixXd::Identity(p, p)) : Eigen::MatrixXd(0, 0);
    prior_prec.setZero();
    prior_prec.topLeftCorner(p, p) = sigma_inv;
    prior_prec(p, p) = 1.0 / state.sigma_beta2;
    Eigen::VectorXd prior_mean(k);
    prior_mean << state.mu, state.mu_beta;
    prior_shift = prior_prec * prior_mean;

    for (std::size_t j = 0; j < groups.size(); ++j) {
      if (!groups[j].fixed_noise && it > 0) {
        replace_noise(sets[j], groups[j].noise.draw(dim, rng), model, groups[j].noise.log_density);
        ++out.groups[j].noise_refreshes;
      }
      draw_omegas(state.gamma[j], sets[j], omegas, rng);
      const GaussianConditional cond = gaussian_conditional_precision(prior_prec, prior_shift, sets[j], omegas);
      if (cond.jittered) ++out.groups[j].jitter_retries;
      state.gamma[j] = cond.draw(rng);
    }

    if (!freeze_hyper) {
      if (p > 0) {
        Eigen::VectorXd theta_sum = Eigen::VectorXd::Zero(p);
        for (const auto& gm : state.gamma) theta_sum += gm.head(p);
        Eigen::MatrixXd mu_prec = sigma_inv * n_groups;
        mu_prec.diagonal().array() += 1.0 / hyper.mu_variance;
        Eigen::LLT<Eigen::MatrixXd> mu_chol = robust_cholesky(mu_prec);
        const Eigen::VectorXd mu_mean = mu_chol.solve(sigma_inv * theta_sum);
        state.mu = mu_mean + mu_chol.matrixU().solve(rng.normal_vector(p));

        Eigen::MatrixXd scatter = Eigen::MatrixXd::Identity(p, p) * hyper.sigma_scale;
        for (const auto& gm : state.gamma) {
          const Eigen::VectorXd dlt = gm.head(p) - state.mu;
          scatter += dlt * dlt.transpose();
        }
        state.sigma = sample_inverse_wishart(p + hyper.sigma_dof_extra + n_groups, scatter, rng);
        Eigen::LLT<Eigen::MatrixXd> check(state.sigma);
        if (check.info() != Eigen::Success) throw NumericalError("Sigma update lost positive definiteness");
      }
      double beta_sum = 0.0;
      for (const auto& gm : state.gamma) beta_sum += gm[p];
      const double mb_prec = 1.0 / hyper.mu_beta_variance + n_groups / state.sigma_beta2;
      state.mu_beta = (beta_sum / state.sigma_beta2) / mb_prec + rng.normal() / std::sqrt(mb_prec);
      double ss = 0.0;
      for (const auto& gm : state.gamma) ss += (gm[p] - state.mu_beta) * (gm[p] - state.mu_beta);
      state.sigma_beta2 = rng.inv_gamma(hyper.sigma_beta_shape + 0.5 * n_groups, hyper.sigma_beta_scale + 0.5 * ss);
    }

    if (it >= cfg.burn_in && (it - cfg.burn_in) % cfg.thin == 0 && row < kept) {
      for (std::size_t j = 0; j < groups.size(); ++j) {
        out.groups[j].draws.row(row) = state.gamma[j].transpose();
        out.groups[j].log_likelihood[row] = log_classification_likelihood(state.gamma[j], sets[j]);
      }
      if (p > 0) {
        out.mu.row(row) = state.mu.transpose();
        out.sigma_diag.row(row) = state.sigma.diagonal().transpose();
      }
      out.mu_beta[row] = state.mu_beta;
      out.sigma_beta2[row] = state.sigma_beta2;
      ++row;
    }
  }
  return out;
}

}  // namespace ncbayes
