#pragma once

#include <functional>
#include <span>

#include <Eigen/Dense>

#include "ncbayes/random.hpp"

namespace ncbayes {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using LogDensity = std::function<double(std::span<const double>)>;

inline std::span<const double> row_span(const RowMatrix& m, Eigen::Index i) {
  return {m.data() + i * m.cols(), static_cast<std::size_t>(m.cols())};
}
inline std::span<double> row_span(RowMatrix& m, Eigen::Index i) {
  return {m.data() + i * m.cols(), static_cast<std::size_t>(m.cols())};
}

// Sample space: a bounded hyper-rectangle or the d-torus [0, 2pi)^d.
class Domain {
 public:
  enum class Kind { box, torus };

  static Domain box(Eigen::VectorXd lower, Eigen::VectorXd upper);
  static Domain torus(int dim);
  // Componentwise range of the rows of `points`, widened by `expand` times
  // the range on each side.
  static Domain bounding_box(const RowMatrix& points, double expand);

  Kind kind() const { return kind_; }
  int dim() const { return static_cast<int>(lower_.size()); }
  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }
  double volume() const;
  double log_volume() const;
  bool contains(std::span<const double> x) const;

  void sample_uniform(RandomStream& rng, std::span<double> out) const;
  RowMatrix sample_uniform(Eigen::Index count, RandomStream& rng) const;

 private:
  Domain(Kind kind, Eigen::VectorXd lower, Eigen::VectorXd upper);
  Kind kind_;
  Eigen::VectorXd lower_, upper_;
};

// Unnormalized exponential family h(x) exp(eta(x)' theta).
class ExpFamModel {
 public:
  using SuffStat = std::function<void(std::span<const double> x, std::span<double> eta)>;

  ExpFamModel(int p, SuffStat suff_stat, LogDensity log_base, Domain domain);

  int p() const { return p_; }
  const Domain& domain() const { return domain_; }

  // z(x) = (eta(x)', 1)'; `z` must hold p + 1 entries.
  void design(std::span<const double> x, std::span<double> z) const;
  Eigen::VectorXd design(const Eigen::VectorXd& x) const;
  double log_base(std::span<const double> x) const { return log_base_(x); }

 private:
  int p_;
  SuffStat suff_stat_;
  LogDensity log_base_;
  Domain domain_;
};

// Natural parameters theta and beta = -log Z.
struct GammaVector {
  Eigen::VectorXd theta;
  double beta = 0.0;

  static GammaVector from_flat(const Eigen::VectorXd& flat);
  Eigen::VectorXd flat() const;
  Eigen::Index size() const { return theta.size() + 1; }
};

enum class NoiseMode { fixed_set, generator, adaptive };

// Noise distribution q with its sampler and the noise count m.
struct NoiseSpec {
  NoiseMode mode = NoiseMode::generator;
  LogDensity log_density;
  std::function<void(RandomStream&, std::span<double>)> sampler;
  int m = 0;

  static NoiseSpec uniform(const Domain& domain, int m, NoiseMode mode = NoiseMode::generator);
  RowMatrix draw(int dim, RandomStream& rng) const;
};

struct LabeledSample {
  Eigen::VectorXd x;
  int s = 0;
  Eigen::VectorXd z;
  double offset = 0.0;
};

// Genuine rows first (label 1), noise rows after (label 0), with the design
// rows z(x) and offsets C(x) = log n - log m + log h(x) - log q(x).
class LabeledSet {
 public:
  RowMatrix points;
  RowMatrix design;
  Eigen::VectorXd offset;
  Eigen::VectorXd label;
  Eigen::VectorXd log_base;
  int n_genuine = 0;
  int n_noise = 0;

  Eigen::Index size() const { return design.rows(); }
  LabeledSample sample(Eigen::Index i) const;
};

LabeledSet build_labeled(const RowMatrix& data, const RowMatrix& noise, const ExpFamModel& model,
                         const LogDensity& noise_log_density);
LabeledSet build_labeled(const RowMatrix& data, const RowMatrix& noise, const ExpFamModel& model,
                         const NoiseSpec& noise_spec);

// Swaps in a new noise block and recomputes every offset under the noise
// density `noise_log_density`. The noise count must not change.
void replace_noise(LabeledSet& set, const RowMatrix& noise, const ExpFamModel& model,
                   const LogDensity& noise_log_density);
// Recomputes offsets after a change of noise density only.
void recompute_offsets(LabeledSet& set, const LogDensity& noise_log_density);

// psi_i = z_i' gamma + C_i for all samples.
Eigen::VectorXd linear_predictor(const Eigen::VectorXd& gamma, const LabeledSet& set);

// r(x | theta, Z): logistic(z' gamma + C).
double classifier_prob(const GammaVector& gamma, const LabeledSample& sample);
double classifier_prob(const Eigen::VectorXd& gamma, const LabeledSample& sample);

// sum_i s_i psi_i - log(1 + exp(psi_i)).
double log_classification_likelihood(const Eigen::VectorXd& gamma, const LabeledSet& set);
double log_classification_likelihood(const GammaVector& gamma, const LabeledSet& set);
// Gradient sum_i (s_i - r_i) z_i.
Eigen::VectorXd log_classification_gradient(const Eigen::VectorXd& gamma, const LabeledSet& set);

}  // namespace ncbayes
