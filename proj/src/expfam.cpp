#include "ncbayes/expfam.hpp"

#include <cmath>
#include <string>

#include "ncbayes/errors.hpp"
#include "ncbayes/stats.hpp"

namespace ncbayes {

Domain::Domain(Kind kind, Eigen::VectorXd lower, Eigen::VectorXd upper)
    : kind_(kind), lower_(std::move(lower)), upper_(std::move(upper)) {}

Domain Domain::box(Eigen::VectorXd lower, Eigen::VectorXd upper) {
  require(lower.size() == upper.size() && lower.size() > 0, "box bounds must have equal positive length");
  require(((upper - lower).array() > 0.0).all(), "box must have positive width in every coordinate");
  require(lower.allFinite() && upper.allFinite(), "box bounds must be finite");
  return Domain(Kind::box, std::move(lower), std::move(upper));
}

Domain Domain::torus(int dim) {
  require(dim >= 1, "torus dimension must be positive");
  return Domain(Kind::torus, Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Constant(dim, kTwoPi));
}

Domain Domain::bounding_box(const RowMatrix& points, double expand) {
  require(points.rows() >= 1, "bounding box of an empty point set");
  Eigen::VectorXd lo = points.colwise().minCoeff().transpose();
  Eigen::VectorXd hi = points.colwise().maxCoeff().transpose();
  Eigen::VectorXd width = hi - lo;
  for (Eigen::Index j = 0; j < width.size(); ++j)
    if (width[j] <= 0.0) width[j] = 1.0;
  return box(lo - expand * width, hi + expand * width);
}

double Domain::volume() const { return std::exp(log_volume()); }

double Domain::log_volume() const { return (upper_ - lower_).array().log().sum(); }

bool Domain::contains(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim()) return false;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    if (!std::isfinite(x[j]) || x[j] < lower_[jj]) return false;
    if (kind_ == Kind::torus ? x[j] >= upper_[jj] : x[j] > upper_[jj]) return false;
  }
  return true;
}

void Domain::sample_uniform(RandomStream& rng, std::span<double> out) const {
  for (std::size_t j = 0; j < out.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    out[j] = rng.uniform(lower_[jj], upper_[jj]);
  }
}

RowMatrix Domain::sample_uniform(Eigen::Index count, RandomStream& rng) const {
  RowMatrix out(count, dim());
  for (Eigen::Index i = 0; i < count; ++i) sample_uniform(rng, row_span(out, i));
  return out;
}

ExpFamModel::ExpFamModel(int p, SuffStat suff_stat, LogDensity log_base, Domain domain)
    : p_(p), suff_stat_(std::move(suff_stat)), log_base_(std::move(log_base)), domain_(std::move(domain)) {
  require(p >= 0, "model dimension must be nonnegative");
  require(static_cast<bool>(suff_stat_) || p == 0, "sufficient statistic required when p > 0");
  require(static_cast<bool>(log_base_), "log base measure required");
}

void ExpFamModel::design(std::span<const double> x, std::span<double> z) const {
  if (p_ > 0) suff_stat_(x, z.first(static_cast<std::size_t>(p_)));
  z[static_cast<std::size_t>(p_)] = 1.0;
}

Eigen::VectorXd ExpFamModel::design(const Eigen::VectorXd& x) const {
  Eigen::VectorXd z(p_ + 1);
  design({x.data(), static_cast<std::size_t>(x.size())}, {z.data(), static_cast<std::size_t>(z.size())});
  return z;
}

GammaVector GammaVector::from_flat(const Eigen::VectorXd& flat) {
  require(flat.size() >= 1, "gamma vector needs at least the beta entry");
  return {flat.head(flat.size() - 1), flat[flat.size() - 1]};
}

Eigen::VectorXd GammaVector::flat() const {
  Eigen::VectorXd out(theta.size() + 1);
  out << theta, beta;
  return out;
}

NoiseSpec NoiseSpec::uniform(const Domain& domain, int m, NoiseMode mode) {
  require(m >= 1, "noise count m must be at least 1");
  NoiseSpec spec;
  spec.mode = mode;
  spec.m = m;
  const double log_q = -domain.log_volume();
  spec.log_density = [domain, log_q](std::span<const double> x) {
    return domain.contains(x) ? log_q : -INFINITY;
  };
  spec.sampler = [domain](RandomStream& rng, std::span<double> out) { domain.sample_uniform(rng, out); };
  return spec;
}

RowMatrix NoiseSpec::draw(int dim, RandomStream& rng) const {
  require(m >= 1, "noise count m must be at least 1");
  require(static_cast<bool>(sampler), "noise spec has no sampler");
  RowMatrix out(m, dim);
  for (Eigen::Index i = 0; i < m; ++i) sampler(rng, row_span(out, i));
  return out;
}

LabeledSample LabeledSet::sample(Eigen::Index i) const {
  return {points.row(i).transpose(), static_cast<int>(label[i]), design.row(i).transpose(), offset[i]};
}

namespace {

void fill_rows(LabeledSet& set, const RowMatrix& block, Eigen::Index start, const ExpFamModel& model) {
  for (Eigen::Index i = 0; i < block.rows(); ++i) {
    const auto x = row_span(block, i);
    if (!model.domain().contains(x))
      throw ValidationError("point " + std::to_string(i) + " lies outside the model domain");
    set.points.row(start + i) = block.row(i);
    model.design(x, row_span(set.design, start + i));
    set.log_base[start + i] = model.log_base(x);
    if (!std::isfinite(set.log_base[start + i]))
      throw ValidationError("log base measure is not finite at point " + std::to_string(i));
  }
}

}  // namespace

LabeledSet build_labeled(const RowMatrix& data, const RowMatrix& noise, const ExpFamModel& model,
                         const LogDensity& noise_log_density) {
  require(data.rows() >= 1, "genuine data set must be nonempty");
  require(noise.rows() >= 1, "noise set must be nonempty");
  require(data.cols() == model.domain().dim() && noise.cols() == model.domain().dim(),
          "point dimension does not match the model domain");
  LabeledSet set;
  set.n_genuine = static_cast<int>(data.rows());
  set.n_noise = static_cast<int>(noise.rows());
  const Eigen::Index total = data.rows() + noise.rows();
  set.points.resize(total, data.cols());
  set.design.resize(total, model.p() + 1);
  set.offset.resize(total);
  set.log_base.resize(total);
  set.label = Eigen::VectorXd::Zero(total);
  set.label.head(data.rows()).setOnes();
  fill_rows(set, data, 0, model);
  fill_rows(set, noise, data.rows(), model);
  recompute_offsets(set, noise_log_density);
  return set;
}

LabeledSet build_labeled(const RowMatrix& data, const RowMatrix& noise, const ExpFamModel& model,
                         const NoiseSpec& noise_spec) {
  return build_labeled(data, noise, model, noise_spec.log_density);
}

void replace_noise(LabeledSet& set, const RowMatrix& noise, const ExpFamModel& model,
                   const LogDensity& noise_log_density) {
  require(noise.rows() == set.n_noise, "noise refresh must keep the noise count");
  fill_rows(set, noise, set.n_genuine, model);
  recompute_offsets(set, noise_log_density);
}

void recompute_offsets(LabeledSet& set, const LogDensity& noise_log_density) {
  const double base = std::log(static_cast<double>(set.n_genuine)) - std::log(static_cast<double>(set.n_noise));
  for (Eigen::Index i = 0; i < set.size(); ++i) {
    const double log_q = noise_log_density(row_span(set.points, i));
    if (!std::isfinite(log_q))
      throw ValidationError("noise density is zero or undefined at sample " + std::to_string(i) +
                            "; offset undefined");
    set.offset[i] = base + set.log_base[i] - log_q;
  }
}

Eigen::VectorXd linear_predictor(const Eigen::VectorXd& gamma, const LabeledSet& set) {
  require(gamma.size() == set.design.cols(), "gamma length does not match the design");
  return set.design * gamma + set.offset;
}

double classifier_prob(const Eigen::VectorXd& gamma, const LabeledSample& sample) {
  require(gamma.size() == sample.z.size(), "gamma length does not match the design row");
  return logistic(sample.z.dot(gamma) + sample.offset);
}

double classifier_prob(const GammaVector& gamma, const LabeledSample& sample) {
  return classifier_prob(gamma.flat(), sample);
}

double log_classification_likelihood(const Eigen::VectorXd& gamma, const LabeledSet& set) {
  require(set.size() >= 1, "likelihood of an empty sample set");
  const Eigen::VectorXd psi = linear_predictor(gamma, set);
  double total = 0.0;
  for (Eigen::Index i = 0; i < psi.size(); ++i) total += set.label[i] * psi[i] - log1p_exp(psi[i]);
  return total;
}

double log_classification_likelihood(const GammaVector& gamma, const LabeledSet& set) {
  return log_classification_likelihood(gamma.flat(), set);
}

Eigen::VectorXd log_classification_gradient(const Eigen::VectorXd& gamma, const LabeledSet& set) {
  const Eigen::VectorXd psi = linear_predictor(gamma, set);
  Eigen::VectorXd resid(psi.size());
  for (Eigen::Index i = 0; i < psi.size(); ++i) resid[i] = set.label[i] - logistic(psi[i]);
  return set.design.transpose() * resid;
}

}  // namespace ncbayes
