#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "sigmav/stats.hpp"

namespace sigmav {

enum class BaseKind { Uniform, Gaussian, Exponential, Rademacher, Constant };

/// Distribution of one summand. Parameters: Uniform(a, b), Gaussian(mean a,
/// sd b), Exponential(rate a), Rademacher (+-1), Constant(a).
struct BaseSpec {
  BaseKind kind = BaseKind::Uniform;
  double a = -0.5;
  double b = 0.5;

  static BaseSpec uniform(double lo, double hi) { return {BaseKind::Uniform, lo, hi}; }
  static BaseSpec gaussian(double mean = 0.0, double sd = 1.0) { return {BaseKind::Gaussian, mean, sd}; }
  static BaseSpec exponential(double rate = 1.0) { return {BaseKind::Exponential, rate, 0.0}; }
  static BaseSpec rademacher() { return {BaseKind::Rademacher, 0.0, 0.0}; }
  static BaseSpec constant(double c) { return {BaseKind::Constant, c, 0.0}; }
  static BaseSpec parse(const std::string& name);

  std::string name() const;
  double mean() const;
  double variance() const;
  double kappa4() const;  ///< fourth cumulant
  bool symmetric() const;
  void validate() const;
  double draw(std::mt19937_64& rng) const;
};

struct MomentRow {
  int n = 0;
  std::int64_t trials = 0;
  double b = 0.0;  ///< B'_N, variance of s'_N
  double c = 0.0;  ///< C'_N, signed third central moment
  double d = 0.0;  ///< D'_N, fourth central moment
  double k = 0.0;  ///< K'_N = D' - 3 B'^2
  double k_tilde = 0.0;  ///< D'/3 - B'^2, the alternative normalization
  double b_err = 0.0, c_err = 0.0, d_err = 0.0, k_err = 0.0;
  double nb = 0.0, n2c = 0.0, n3k = 0.0;
  double nb_err = 0.0, n2c_err = 0.0, n3k_err = 0.0;
  double ks = 0.0;  ///< KS distance of standardized s'_N to N(0, 1)
};

struct MomentReport {
  BaseSpec base;
  std::uint64_t seed = 0;
  std::vector<MomentRow> rows;
  LineFit b_fit;  ///< log B' vs log N
  LineFit k_fit;  ///< log |K'| vs log N
};

/// s'_N = (1/N) sum (eta_k - <eta>) over `trials` realizations per N.
/// Throws ContractError for trials < 1e4.
MomentReport sum_function_moments(const BaseSpec& base, const std::vector<int>& ladder, std::int64_t trials,
                                  std::uint64_t seed, int threads = 1);

/// Realizations of s'_N, in a thread-independent order.
std::vector<double> sum_function_samples(const BaseSpec& base, int n, std::int64_t trials, std::uint64_t seed,
                                         int threads = 1);

/// KS distance between standardized samples and N(0, 1); needs >= 1e4 samples.
double gaussianity_distance(const std::vector<double>& samples);

struct RatioRow {
  int n = 0;
  double gap = 0.0;  ///< <X/Y> - <X>/<Y>
  double error = 0.0;
  double mean_ratio = 0.0;
  double ratio_of_means = 0.0;
};

struct RatioReport {
  std::vector<RatioRow> rows;
  LineFit fit;  ///< log |gap| vs log N, over rows with nonzero gap
  bool fitted = false;
};

/// X = sum of N draws from x, Y = sum of N draws from y (independent, or
/// Y = X when y_is_x). Throws ContractError on a non-positive Y draw.
RatioReport ratio_average_check(const BaseSpec& x, const BaseSpec& y, const std::vector<int>& ladder,
                                std::int64_t trials, std::uint64_t seed, int threads = 1, bool y_is_x = false);

/// N,B,C,D,K,Ktilde,NB,N2C,N3K,NB_err,N2C_err,N3K_err,KS
void write_moment_csv(std::ostream& os, const MomentReport& report);

}  // namespace sigmav
