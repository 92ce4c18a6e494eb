#include "ncbayes/tv_density.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "ncbayes/errors.hpp"
#include "ncbayes/io.hpp"
#include "ncbayes/noise_adapt.hpp"
#include "ncbayes/pg.hpp"
#include "ncbayes/stats.hpp"

namespace ncbayes {

void TVModelSpec::validate() const {
  require(L() >= 1, "basis count L must be at least 1");
  require(dim() >= 1, "knots need at least one coordinate");
  require(knots.allFinite(), "knots must be finite");
  require(h > 0.0 && std::isfinite(h), "RBF bandwidth h must be positive");
  require(b0 > 0.0 && n0 > 0.0 && nu0 > 0.0, "b0, n0 and nu0 must be positive");
}

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return s;
}

int distinct_rows(const RowMatrix& x) {
  std::vector<std::vector<double>> rows;
  rows.reserve(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const auto r = row_span(x, i);
    rows.emplace_back(r.begin(), r.end());
  }
  std::sort(rows.begin(), rows.end());
  return static_cast<int>(std::unique(rows.begin(), rows.end()) - rows.begin());
}

}  // namespace

RowMatrix kmeans_knots(const RowMatrix& pooled, int L, std::uint64_t seed, int max_iter) {
  require(L >= 1, "L must be at least 1");
  require(pooled.rows() >= L, "k-means needs at least L observations");
  require(pooled.allFinite(), "k-means input must be finite");
  if (distinct_rows(pooled) < L) throw ValidationError("k-means: fewer distinct points than L");
  const Eigen::Index n = pooled.rows(), dim = pooled.cols();
  RandomStream rng(seed);

  RowMatrix centers(L, dim);
  centers.row(0) = pooled.row(static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n))));
  std::vector<double> d2(static_cast<std::size_t>(n), INFINITY);
  for (int c = 1; c < L; ++c) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      auto& v = d2[static_cast<std::size_t>(i)];
      v = std::min(v, sq_dist(row_span(pooled, i), row_span(centers, c - 1)));
      total += v;
    }
    double u = rng.uniform() * total;
    Eigen::Index pick = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = d2[static_cast<std::size_t>(i)];
      if (v <= 0.0) continue;
      pick = i;
      u -= v;
      if (u <= 0.0) break;
    }
    centers.row(c) = pooled.row(pick);
  }

  std::vector<int> assign(static_cast<std::size_t>(n), -1);
  for (int iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = INFINITY;
      for (int c = 0; c < L; ++c) {
        const double d = sq_dist(row_span(pooled, i), row_span(centers, c));
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assign[static_cast<std::size_t>(i)] != best) {
        assign[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    RowMatrix sums = RowMatrix::Zero(L, dim);
    std::vector<int> counts(static_cast<std::size_t>(L), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(assign[static_cast<std::size_t>(i)]) += pooled.row(i);
      ++counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
    }
    for (int c = 0; c < L; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centers.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
        continue;
      }
      // Empty cluster: move it to the point farthest from its center.
      Eigen::Index far = 0;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double d = sq_dist(row_span(pooled, i), row_span(centers, assign[static_cast<std::size_t>(i)]));
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      centers.row(c) = pooled.row(far);
      assign[static_cast<std::size_t>(far)] = c;
      changed = true;
    }
    if (!changed) break;
  }
  return centers;
}

double median_knot_distance(const RowMatrix& knots) {
  if (knots.rows() < 2) return 1.0;
  std::vector<double> d;
  for (Eigen::Index i = 0; i < knots.rows(); ++i)
    for (Eigen::Index j = i + 1; j < knots.rows(); ++j) d.push_back(std::sqrt(sq_dist(row_span(knots, i), row_span(knots, j))));
  const double h = median(d);
  require(h > 0.0, "median knot distance is zero");
  return h;
}

TVModelSpec make_tv_spec(const RowMatrix& pooled, int L, std::uint64_t seed, std::optional<double> h) {
  TVModelSpec spec;
  spec.knots = kmeans_knots(pooled, L, seed);
  spec.h = h ? *h : median_knot_distance(spec.knots);
  spec.validate();
  return spec;
}

void rbf_design(std::span<const double> x, const TVModelSpec& spec, std::span<double> out) {
  require(static_cast<int>(x.size()) == spec.dim(), "point dimension does not match the knots");
  require(static_cast<int>(out.size()) >= spec.L(), "output too short for the RBF design");
  for (int l = 0; l < spec.L(); ++l)
    out[static_cast<std::size_t>(l)] = std::exp(-std::sqrt(sq_dist(x, row_span(spec.knots, l))) / spec.h);
}

Eigen::VectorXd rbf_design(const Eigen::VectorXd& x, const TVModelSpec& spec) {
  Eigen::VectorXd out(spec.L());
  rbf_design({x.data(), static_cast<std::size_t>(x.size())}, spec, {out.data(), static_cast<std::size_t>(out.size())});
  return out;
}

ExpFamModel tv_model(const TVModelSpec& spec, const Domain& domain) {
  spec.validate();
  require(domain.dim() == spec.dim(), "domain dimension does not match the knots");
  return ExpFamModel(
      spec.L(), [spec](std::span<const double> x, std::span<double> out) { rbf_design(x, spec, out); },
      [](std::span<const double>) { return 0.0; }, domain);
}

RowMatrix pool_rows(const std::vector<RowMatrix>& per_time) {
  require(!per_time.empty(), "no time points");
  Eigen::Index rows = 0;
  for (const auto& x : per_time) rows += x.rows();
  RowMatrix out(rows, per_time.front().cols());
  Eigen::Index r = 0;
  for (const auto& x : per_time) {
    require(x.cols() == out.cols(), "time points have different dimensions");
    out.middleRows(r, x.rows()) = x;
    r += x.rows();
  }
  return out;
}

TVNoise parse_tv_noise(const std::string& name) {
  if (name == "n1" || name == "common") return TVNoise::common;
  if (name == "n2" || name == "per-time") return TVNoise::per_time;
  if (name == "adaptive" || name == "an") return TVNoise::adaptive;
  throw ValidationError("unknown noise mode '" + name + "'");
}

std::string to_string(TVNoise mode) {
  switch (mode) {
    case TVNoise::common: return "n1";
    case TVNoise::per_time: return "n2";
    case TVNoise::adaptive: return "adaptive";
  }
  return "?";
}

TVDraws run_tv_gibbs(const std::vector<RowMatrix>& data, const TVModelSpec& spec, const Domain& domain,
                     const TVNoiseConfig& noise, const GibbsConfig& cfg) {
  cfg.validate();
  spec.validate();
  const int T = static_cast<int>(data.size());
  const int L = spec.L();
  const int dim = spec.dim();
  require(T >= 1, "time-varying model needs T >= 1");
  require(domain.kind() == Domain::Kind::box && domain.dim() == dim, "domain must be a box matching the knots");
  for (const auto& x : data) require(x.rows() >= 1 && x.cols() == dim, "every time point needs data of the knot dimension");
  if (noise.fixed) require(static_cast<int>(noise.fixed->size()) == T, "fixed noise must be given per time point");

  const ExpFamModel model = tv_model(spec, domain);
  RandomStream rng(cfg.seed);

  std::vector<NoiseSpec> specs;
  std::vector<LabeledSet> sets;
  std::vector<TemperedNoiseState> tempered;
  const bool adaptive = !noise.fixed && noise.mode == TVNoise::adaptive;
  const bool refresh = !noise.fixed && !adaptive && noise.refresh;
  for (int t = 0; t < T; ++t) {
    const auto& x = data[static_cast<std::size_t>(t)];
    if (noise.fixed) {
      const RowMatrix& z = (*noise.fixed)[static_cast<std::size_t>(t)];
      require(z.rows() >= 1, "fixed noise sets must be nonempty");
      specs.push_back(NoiseSpec::uniform(domain, static_cast<int>(z.rows()), NoiseMode::fixed_set));
      sets.push_back(build_labeled(x, z, model, specs.back()));
      continue;
    }
    const int m = noise.m > 0 ? noise.m : static_cast<int>(x.rows());
    const Domain box = noise.mode == TVNoise::per_time ? Domain::bounding_box(x, 0.0) : domain;
    specs.push_back(NoiseSpec::uniform(box, m));
    sets.push_back(build_labeled(x, specs.back().draw(dim, rng), model, specs.back()));
    if (adaptive)
      tempered.push_back({domain, Eigen::VectorXd::Zero(L + 1), cfg.adapt.alpha, cfg.adapt.proposals_per_noise * m, 0.0, 0.0});
  }

  std::vector<Eigen::VectorXd> gamma(static_cast<std::size_t>(T), Eigen::VectorXd::Zero(L + 1));
  double lambda = 1.0;
  std::vector<Eigen::VectorXd> omegas(static_cast<std::size_t>(T));
  std::vector<Eigen::MatrixXd> batch(adaptive ? static_cast<std::size_t>(T) : 0,
                                     Eigen::MatrixXd(cfg.adapt.cadence, L + 1));
  int batch_fill = 0;

  TVDraws out;
  out.T = T;
  out.L = L;
  const int kept = cfg.kept();
  out.theta.resize(kept, static_cast<Eigen::Index>(T) * L);
  out.beta.resize(kept, T);
  out.lambda.resize(kept);
  int row = 0;

  Eigen::MatrixXd prec(L, L);
  for (int it = 0; it < cfg.iterations; ++it) {
    if (refresh && it > 0)
      for (int t = 0; t < T; ++t) {
        const auto& sp = specs[static_cast<std::size_t>(t)];
        replace_noise(sets[static_cast<std::size_t>(t)], sp.draw(dim, rng), model, sp.log_density);
      }

    for (int t = 0; t < T; ++t) draw_omegas(gamma[static_cast<std::size_t>(t)], sets[static_cast<std::size_t>(t)], omegas[static_cast<std::size_t>(t)], rng);

    for (int t = 0; t < T; ++t) {
      const auto& set = sets[static_cast<std::size_t>(t)];
      const auto& om = omegas[static_cast<std::size_t>(t)];
      auto& g = gamma[static_cast<std::size_t>(t)];
      const auto phi = set.design.leftCols(L);
      // Random-walk prior given the neighbours.
      const Eigen::VectorXd prev = t > 0 ? Eigen::VectorXd(gamma[static_cast<std::size_t>(t - 1)].head(L)) : Eigen::VectorXd::Zero(L);
      double b0t = 1.0 / lambda;
      Eigen::VectorXd a0t = prev / lambda;
      if (t + 1 < T) {
        b0t = 2.0 / lambda;
        a0t += gamma[static_cast<std::size_t>(t + 1)].head(L) / lambda;
      }
      const Eigen::MatrixXd weighted = phi.array().colwise() * om.array().sqrt();
      prec.noalias() = weighted.transpose() * weighted;
      prec.diagonal().array() += b0t;
      const Eigen::VectorXd resid =
          (set.label.array() - 0.5 - om.array() * (g[L] + set.offset.array())).matrix();
      const Eigen::VectorXd shift = a0t + phi.transpose() * resid;
      bool jittered = false;
      const Eigen::LLT<Eigen::MatrixXd> chol = robust_cholesky(prec, &jittered);
      if (jittered) ++out.jitter_retries;
      g.head(L) = chol.solve(shift) + chol.matrixU().solve(rng.normal_vector(L));

      const Eigen::VectorXd fit = phi * g.head(L);
      const double bprec = 1.0 / spec.b0 + om.sum();
      const double a = (set.label.array() - 0.5 - om.array() * (fit.array() + set.offset.array())).sum();
      g[L] = a / bprec + rng.normal() / std::sqrt(bprec);
      if (!g.allFinite()) throw NumericalError("non-finite coefficient draw at time " + std::to_string(t + 1));
    }

    double ss = 0.0;
    for (int t = 0; t < T; ++t) {
      const Eigen::VectorXd prev = t > 0 ? Eigen::VectorXd(gamma[static_cast<std::size_t>(t - 1)].head(L)) : Eigen::VectorXd::Zero(L);
      ss += (gamma[static_cast<std::size_t>(t)].head(L) - prev).squaredNorm();
    }
    lambda = rng.inv_gamma(spec.n0 + 0.5 * T * L, spec.nu0 + 0.5 * ss);

    if (adaptive) {
      for (int t = 0; t < T; ++t) batch[static_cast<std::size_t>(t)].row(batch_fill) = gamma[static_cast<std::size_t>(t)].transpose();
      if (++batch_fill == cfg.adapt.cadence) {
        batch_fill = 0;
        if (!cfg.adapt.burn_in_only || it < cfg.burn_in) {
          for (int t = 0; t < T; ++t) {
            auto& st = tempered[static_cast<std::size_t>(t)];
            st.gamma_tilde = update_gamma_tilde(batch[static_cast<std::size_t>(t)]);
            TemperedResample res = tempered_resample(st, specs[static_cast<std::size_t>(t)].m, model, rng, cfg.adapt.scheme);
            replace_noise(sets[static_cast<std::size_t>(t)], res.noise, model, res.density.as_function());
            st = res.state;
            out.ess_trace.push_back(st.last_ess);
            if (st.last_ess < cfg.adapt.ess_warn_fraction * st.proposals) out.ess_warning = true;
          }
        }
      }
    }

    if (it >= cfg.burn_in && (it - cfg.burn_in) % cfg.thin == 0 && row < kept) {
      for (int t = 0; t < T; ++t) {
        out.theta.block(row, static_cast<Eigen::Index>(t) * L, 1, L) = gamma[static_cast<std::size_t>(t)].head(L).transpose();
        out.beta(row, t) = gamma[static_cast<std::size_t>(t)][L];
      }
      out.lambda[row] = lambda;
      ++row;
    }
  }
  return out;
}

namespace {

double rule_of_thumb(const Eigen::VectorXd& col, KdeBandwidth rule) {
  const std::vector<double> v = to_vector(col);
  const double n = static_cast<double>(v.size());
  double sd = v.size() > 1 ? std::sqrt(sample_variance(v)) : 0.0;
  if (rule == KdeBandwidth::scott) {
    if (!(sd > 0.0)) sd = 1.0;
    return 1.06 * sd * std::pow(n, -0.2);
  }
  const double iqr = quantile(v, 0.75) - quantile(v, 0.25);
  double lo = std::min(sd, iqr / 1.34);
  if (!(lo > 0.0)) lo = sd;
  if (!(lo > 0.0)) lo = std::abs(v.front());
  if (!(lo > 0.0)) lo = 1.0;
  return 0.9 * lo * std::pow(n, -0.2);
}

}  // namespace

KdeEstimator::KdeEstimator(RowMatrix data, KdeBandwidth rule) : data_(std::move(data)) {
  require(data_.rows() >= 1 && data_.cols() >= 1, "KDE needs a nonempty data set");
  bandwidth_.resize(data_.cols());
  for (Eigen::Index j = 0; j < data_.cols(); ++j) bandwidth_[j] = rule_of_thumb(data_.col(j), rule);
}

double KdeEstimator::operator()(std::span<const double> x) const {
  require(static_cast<Eigen::Index>(x.size()) == data_.cols(), "KDE evaluation point has the wrong dimension");
  double log_norm = 0.0;
  for (Eigen::Index j = 0; j < data_.cols(); ++j) log_norm -= std::log(bandwidth_[j]) + 0.5 * std::log(kTwoPi);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < data_.rows(); ++i) {
    double q = 0.0;
    for (Eigen::Index j = 0; j < data_.cols(); ++j) {
      const double u = (x[static_cast<std::size_t>(j)] - data_(i, j)) / bandwidth_[j];
      q += u * u;
    }
    sum += std::exp(-0.5 * q);
  }
  return std::exp(log_norm) * sum / static_cast<double>(data_.rows());
}

KdeEstimator kde_baseline(const RowMatrix& data_t, KdeBandwidth rule) { return KdeEstimator(data_t, rule); }

Eigen::VectorXd renormalize(const Eigen::VectorXd& values, double volume) {
  require(volume > 0.0, "domain volume must be positive");
  require(values.size() >= 1, "nothing to renormalize");
  require((values.array() >= 0.0).all() && values.allFinite(), "density values must be finite and nonnegative");
  const double integral = volume * values.mean();
  require(integral > 0.0, "density vanishes on every evaluation point");
  return values / integral;
}

RowMatrix evaluation_points(const Domain& domain, int count, std::uint64_t seed) {
  require(count >= 1, "evaluation point count must be positive");
  RandomStream rng(seed);
  return domain.sample_uniform(count, rng);
}

DensityGrid posterior_density_grid(const TVDraws& draws, const TVModelSpec& spec, const RowMatrix& points,
                                   double volume, double level) {
  require(level > 0.0 && level < 1.0, "credible level must lie in (0, 1)");
  require(draws.theta.rows() >= 1, "no posterior draws");
  require(draws.L == spec.L(), "draws and spec disagree on L");
  const Eigen::Index P = points.rows();
  const Eigen::Index S = draws.theta.rows();
  Eigen::MatrixXd basis(P, spec.L());
  for (Eigen::Index i = 0; i < P; ++i) {
    Eigen::VectorXd row(spec.L());
    rbf_design(row_span(points, i), spec, {row.data(), static_cast<std::size_t>(row.size())});
    basis.row(i) = row.transpose();
  }
  DensityGrid grid;
  grid.points = points;
  grid.volume = volume;
  grid.level = level;
  grid.mean.resize(draws.T, P);
  grid.lo.resize(draws.T, P);
  grid.hi.resize(draws.T, P);
  std::vector<double> buf(static_cast<std::size_t>(S));
  for (int t = 0; t < draws.T; ++t) {
    Eigen::MatrixXd logf = basis * draws.theta_at(t).transpose();  // P x S
    logf.rowwise() += draws.beta.col(t).transpose();
    const double shift = logf.maxCoeff();
    const Eigen::MatrixXd f = (logf.array() - shift).exp().matrix();
    grid.mean.row(t) = renormalize(f.rowwise().mean(), volume).transpose();
    Eigen::MatrixXd fn(P, S);
    for (Eigen::Index s = 0; s < S; ++s) fn.col(s) = renormalize(f.col(s), volume);
    for (Eigen::Index i = 0; i < P; ++i) {
      for (Eigen::Index s = 0; s < S; ++s) buf[static_cast<std::size_t>(s)] = fn(i, s);
      std::sort(buf.begin(), buf.end());
      grid.lo(t, i) = quantile_sorted(buf, 0.5 * (1.0 - level));
      grid.hi(t, i) = quantile_sorted(buf, 0.5 * (1.0 + level));
    }
  }
  return grid;
}

Eigen::MatrixXd density_on_points(const TimeDensity& density, int T, const RowMatrix& points, double volume) {
  require(T >= 1, "T must be at least 1");
  Eigen::MatrixXd out(T, points.rows());
  for (int t = 0; t < T; ++t) {
    Eigen::VectorXd v(points.rows());
    for (Eigen::Index i = 0; i < points.rows(); ++i) v[i] = density(t + 1, row_span(points, i));
    out.row(t) = renormalize(v, volume).transpose();
  }
  return out;
}

double abe(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth, double volume) {
  require(estimate.rows() == truth.rows() && estimate.cols() == truth.cols(), "estimate and truth shapes differ");
  require(estimate.rows() >= 1 && estimate.cols() >= 1, "empty density grids");
  double total = 0.0;
  for (Eigen::Index t = 0; t < estimate.rows(); ++t) {
    const Eigen::VectorXd a = renormalize(estimate.row(t).transpose(), volume);
    const Eigen::VectorXd b = renormalize(truth.row(t).transpose(), volume);
    total += volume * (a - b).cwiseAbs().mean();
  }
  return total / static_cast<double>(estimate.rows());
}

IntervalMetrics interval_metrics(const DensityGrid& grid, const Eigen::MatrixXd& truth) {
  require(truth.rows() == grid.lo.rows() && truth.cols() == grid.lo.cols(), "truth does not match the grid");
  const Eigen::Index cells = truth.size();
  require(cells >= 1, "empty density grid");
  Eigen::Index covered = 0;
  for (Eigen::Index i = 0; i < cells; ++i)
    if (grid.lo.data()[i] <= truth.data()[i] && truth.data()[i] <= grid.hi.data()[i]) ++covered;
  return {100.0 * static_cast<double>(covered) / static_cast<double>(cells), (grid.hi - grid.lo).mean()};
}

namespace {

double normal_pdf(double x, double mu, double sd) {
  const double u = (x - mu) / sd;
  return std::exp(-0.5 * u * u) / (sd * std::sqrt(kTwoPi));
}

struct Scenario1Means {
  double m1x, m1y, m2x, m2y;
};

Scenario1Means scenario1_means(int t, int T) {
  const double s = 4.0 * t / T;
  return {-2.0 + s, 0.0, -2.0 + s, -2.0 + s};
}

void check_time(int t, int T) {
  require(T >= 1 && t >= 1 && t <= T, "time index must lie in 1..T");
}

}  // namespace

double scenario1_density(int t, int T, std::span<const double> x) {
  check_time(t, T);
  require(x.size() == 2, "scenario densities are two-dimensional");
  const auto m = scenario1_means(t, T);
  const double c1 = normal_pdf(x[0], m.m1x, std::sqrt(0.7)) * normal_pdf(x[1], m.m1y, std::sqrt(0.2));
  const double c2 = normal_pdf(x[0], m.m2x, std::sqrt(0.5)) * normal_pdf(x[1], m.m2y, std::sqrt(0.5));
  return 0.4 * c1 + 0.6 * c2;
}

double scenario2_density(int t, int T, std::span<const double> x) {
  check_time(t, T);
  require(T >= 2, "scenario 2 needs T >= 2");
  require(x.size() == 2, "scenario densities are two-dimensional");
  const double mu = 1.0 + 2.0 * (t - 1) / (T - 1);
  const double sd = 0.5 - 0.2 * (t - 1) / (T - 1);
  const double r = std::max(std::hypot(x[0], x[1]), 1e-300);
  return (normal_pdf(r, mu, sd) + normal_pdf(-r, mu, sd)) / (kTwoPi * r);
}

std::vector<RowMatrix> scenario1_generate(int T, int n_t, std::uint64_t seed) {
  require(T >= 1 && n_t >= 1, "scenario 1 needs T, n_t >= 1");
  RandomStream rng(seed);
  std::vector<RowMatrix> out;
  for (int t = 1; t <= T; ++t) {
    const auto m = scenario1_means(t, T);
    RowMatrix x(n_t, 2);
    for (int i = 0; i < n_t; ++i) {
      if (rng.uniform() < 0.4) {
        x(i, 0) = m.m1x + std::sqrt(0.7) * rng.normal();
        x(i, 1) = m.m1y + std::sqrt(0.2) * rng.normal();
      } else {
        x(i, 0) = m.m2x + std::sqrt(0.5) * rng.normal();
        x(i, 1) = m.m2y + std::sqrt(0.5) * rng.normal();
      }
    }
    out.push_back(std::move(x));
  }
  return out;
}

std::vector<RowMatrix> scenario2_generate(int T, int n_t, std::uint64_t seed) {
  require(n_t >= 1, "scenario 2 needs n_t >= 1");
  require(T >= 2, "scenario 2 needs T >= 2 (its parameters divide by T - 1)");
  RandomStream rng(seed);
  std::vector<RowMatrix> out;
  for (int t = 1; t <= T; ++t) {
    const double mu = 1.0 + 2.0 * (t - 1) / (T - 1);
    const double sd = 0.5 - 0.2 * (t - 1) / (T - 1);
    RowMatrix x(n_t, 2);
    for (int i = 0; i < n_t; ++i) {
      const double r = mu + sd * rng.normal();
      const double a = kTwoPi * rng.uniform();
      x(i, 0) = r * std::cos(a);
      x(i, 1) = r * std::sin(a);
    }
    out.push_back(std::move(x));
  }
  return out;
}

CrimeData read_crime_csv(const std::string& path, const GeoBounds& bounds) {
  const CsvTable table = read_csv(path);
  const int c_month = table.column("month");
  const int c_lon = table.column("longitude");
  const int c_lat = table.column("latitude");
  std::vector<std::vector<std::array<double, 2>>> rows(12);
  CrimeData out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const double month = parse_double(row[static_cast<std::size_t>(c_month)], path, r);
    const double lon = parse_double(row[static_cast<std::size_t>(c_lon)], path, r);
    const double lat = parse_double(row[static_cast<std::size_t>(c_lat)], path, r);
    const bool ok = month >= 1 && month <= 12 && std::floor(month) == month && lon >= bounds.lon_min &&
                    lon <= bounds.lon_max && lat >= bounds.lat_min && lat <= bounds.lat_max;
    if (!ok) {
      ++out.rejected;
      continue;
    }
    rows[static_cast<std::size_t>(month) - 1].push_back({lon, lat});
  }
  for (const auto& month : rows) {
    RowMatrix x(static_cast<Eigen::Index>(month.size()), 2);
    for (std::size_t i = 0; i < month.size(); ++i) {
      x(static_cast<Eigen::Index>(i), 0) = month[i][0];
      x(static_cast<Eigen::Index>(i), 1) = month[i][1];
    }
    out.months.push_back(std::move(x));
  }
  return out;
}

}  // namespace ncbayes
