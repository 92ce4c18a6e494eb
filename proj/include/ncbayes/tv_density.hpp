#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ncbayes/expfam.hpp"
#include "ncbayes/gibbs.hpp"

namespace ncbayes {

struct TVModelSpec {
  RowMatrix knots;  // L x dim
  double h = 1.0;
  double b0 = 1e3;   // beta_t ~ N(0, b0)
  double n0 = 1.0;   // lambda ~ IG(n0, nu0)
  double nu0 = 1.0;

  int L() const { return static_cast<int>(knots.rows()); }
  int dim() const { return static_cast<int>(knots.cols()); }
  void validate() const;
};

// Lloyd iterations from a seeded k-means++ start.
RowMatrix kmeans_knots(const RowMatrix& pooled, int L, std::uint64_t seed, int max_iter = 200);
// Median of the pairwise knot distances (1 when L = 1).
double median_knot_distance(const RowMatrix& knots);
// Knots by k-means on the pooled data, h by the median rule unless given.
TVModelSpec make_tv_spec(const RowMatrix& pooled, int L, std::uint64_t seed, std::optional<double> h = std::nullopt);

// Phi_l(x) = exp(-||x - kappa_l|| / h)
void rbf_design(std::span<const double> x, const TVModelSpec& spec, std::span<double> out);
Eigen::VectorXd rbf_design(const Eigen::VectorXd& x, const TVModelSpec& spec);
ExpFamModel tv_model(const TVModelSpec& spec, const Domain& domain);

RowMatrix pool_rows(const std::vector<RowMatrix>& per_time);

enum class TVNoise { common, per_time, adaptive };
TVNoise parse_tv_noise(const std::string& name);
std::string to_string(TVNoise mode);

struct TVNoiseConfig {
  TVNoise mode = TVNoise::common;
  int m = 0;             // 0: m_t = n_t
  bool refresh = true;   // fresh uniform noise every iteration (common / per_time)
  // Fixed noise per time, uniform on the domain; overrides mode and refresh.
  std::optional<std::vector<RowMatrix>> fixed;
};

struct TVDraws {
  int T = 0;
  int L = 0;
  Eigen::MatrixXd theta;  // kept x (T L); column t L + l
  Eigen::MatrixXd beta;   // kept x T
  Eigen::VectorXd lambda;
  std::vector<double> ess_trace;
  bool ess_warning = false;
  int jitter_retries = 0;

  Eigen::MatrixXd theta_at(int t) const { return theta.middleCols(static_cast<Eigen::Index>(t) * L, L); }
};

// Gibbs sampler over (Theta, beta, lambda) with a random-walk prior on the
// theta_t. `domain` is the rectangle D carrying the noise.
TVDraws run_tv_gibbs(const std::vector<RowMatrix>& data, const TVModelSpec& spec, const Domain& domain,
                     const TVNoiseConfig& noise, const GibbsConfig& cfg);

enum class KdeBandwidth { silverman, scott };

// Product-Gaussian kernel density estimate with per-coordinate bandwidths.
class KdeEstimator {
 public:
  KdeEstimator(RowMatrix data, KdeBandwidth rule = KdeBandwidth::silverman);
  double operator()(std::span<const double> x) const;
  const Eigen::VectorXd& bandwidth() const { return bandwidth_; }

 private:
  RowMatrix data_;
  Eigen::VectorXd bandwidth_;
};

KdeEstimator kde_baseline(const RowMatrix& data_t, KdeBandwidth rule = KdeBandwidth::silverman);

// Values at MC evaluation points rescaled so that volume * mean equals one.
Eigen::VectorXd renormalize(const Eigen::VectorXd& values, double volume);

struct DensityGrid {
  RowMatrix points;      // P x dim, uniform on D
  double volume = 1.0;   // |D|
  Eigen::MatrixXd mean;  // T x P, renormalized
  Eigen::MatrixXd lo;    // T x P
  Eigen::MatrixXd hi;
  double level = 0.95;
};

RowMatrix evaluation_points(const Domain& domain, int count, std::uint64_t seed);
// Posterior mean of exp(Phi' theta_t + beta_t) renormalized per time, plus
// equal-tailed bounds of the per-draw renormalized densities.
DensityGrid posterior_density_grid(const TVDraws& draws, const TVModelSpec& spec, const RowMatrix& points,
                                   double volume, double level = 0.95);
using TimeDensity = std::function<double(int t, std::span<const double> x)>;
// T x P renormalized values of density(t, x); t is one-based.
Eigen::MatrixXd density_on_points(const TimeDensity& density, int T, const RowMatrix& points, double volume);

// T^{-1} sum_t |D| mean_x |f_hat_t - f_t| after renormalizing both.
double abe(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth, double volume);

struct IntervalMetrics {
  double cp = 0.0;  // percent
  double al = 0.0;
};
IntervalMetrics interval_metrics(const DensityGrid& grid, const Eigen::MatrixXd& truth);

// Scenario generators; t is one-based inside the densities.
std::vector<RowMatrix> scenario1_generate(int T, int n_t, std::uint64_t seed);
std::vector<RowMatrix> scenario2_generate(int T, int n_t, std::uint64_t seed);
double scenario1_density(int t, int T, std::span<const double> x);
double scenario2_density(int t, int T, std::span<const double> x);

struct CrimeData {
  std::vector<RowMatrix> months;  // 12 entries of (longitude, latitude)
  int rejected = 0;
};
struct GeoBounds {
  double lon_min = -77.2, lon_max = -76.8, lat_min = 38.7, lat_max = 39.1;
};
// CSV with columns month, longitude, latitude. Rows outside the bounds are
// dropped and counted.
CrimeData read_crime_csv(const std::string& path, const GeoBounds& bounds = {});

}  // namespace ncbayes
