#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace sigmav {

struct Estimate {
  double value = 0.0;
  double error = 0.0;  ///< one standard error
};

double mean(std::span<const double> x);
/// Unbiased sample variance.
double variance(std::span<const double> x);

/// Mean with a batch-means standard error over n_batches contiguous batches.
Estimate batch_means(std::span<const double> x, int n_batches = 20);

/// Delete-one-block jackknife. estimator(k) must return the statistic with
/// block k removed, estimator(-1) the full-sample statistic.
Estimate jackknife(int n_blocks, const std::function<double(int)>& estimator);

/// Integrated autocorrelation time with Sokal's automatic window (c = 5).
/// Returns 1 for constant series.
double integrated_autocorrelation_time(std::span<const double> x, double window_c = 5.0);

/// Split-chain potential scale reduction over equally long chains.
double split_rhat(const std::vector<std::vector<double>>& chains);

/// Kolmogorov-Smirnov distance between the standardized sample and N(0,1).
/// Throws ContractError for fewer than 2 points or zero variance.
double ks_distance_normal(std::span<const double> x);

double normal_cdf(double x);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double ci_low = 0.0;  ///< 95% interval on the slope (Student t)
  double ci_high = 0.0;
};

/// Ordinary least squares y = a + b x. Needs at least 2 points.
LineFit fit_line(std::span<const double> x, std::span<const double> y);
/// Weighted least squares with per-point standard deviations sigma.
LineFit fit_line_weighted(std::span<const double> x, std::span<const double> y, std::span<const double> sigma);
/// Fit of log|y| against log x.
LineFit fit_loglog(std::span<const double> x, std::span<const double> y);

}  // namespace sigmav
