#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ncbayes {

// Numerically stable logistic function and log(1 + e^x).
double logistic(double x);
double log1p_exp(double x);

// Sample quantile with linear interpolation between order statistics
// (Hyndman-Fan type 7). Copies and sorts.
double quantile(std::span<const double> values, double prob);
double quantile_sorted(std::span<const double> sorted, double prob);
double median(std::span<const double> values);
double mean(std::span<const double> values);
double sample_variance(std::span<const double> values);

// Per-column quantiles of a draws matrix (rows are draws).
Eigen::VectorXd column_quantile(const Eigen::MatrixXd& draws, double prob);

// Kolmogorov-Smirnov distance between two samples.
double ks_two_sample(std::span<const double> a, std::span<const double> b);
// Kolmogorov-Smirnov distance of a sample against a continuous cdf.
double ks_one_sample(std::span<const double> a, const std::function<double(double)>& cdf);
// Asymptotic p-value of the KS statistic for effective sample size n_eff.
double ks_pvalue(double stat, double n_eff);

// Upper-tail probability of a chi-squared statistic.
double chi_squared_pvalue(double stat, double dof);

// Pearson chi-squared homogeneity test of two count vectors over the same
// bins; bins empty in both samples are skipped. Returns the p-value.
double chi_squared_homogeneity(std::span<const double> counts_a, std::span<const double> counts_b);

// Mean direction and mean resultant length of circular data.
struct CircularSummary {
  double mean_direction;
  double resultant_length;
};
CircularSummary circular_summary(std::span<const double> angles);

// Lag-k autocorrelation of a scalar trace.
double autocorrelation(std::span<const double> trace, int lag);

std::vector<double> to_vector(const Eigen::VectorXd& v);

}  // namespace ncbayes
