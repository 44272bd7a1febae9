#include "sigmav/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/students_t.hpp>

#include "sigmav/error.hpp"

namespace sigmav {

double mean(std::span<const double> x) {
  if (x.empty()) throw ContractError("mean of empty sample");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
  if (x.size() < 2) throw ContractError("variance needs at least 2 points");
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

Estimate batch_means(std::span<const double> x, int n_batches) {
  if (n_batches < 2) throw ContractError("batch_means needs at least 2 batches");
  const std::size_t n = x.size();
  const std::size_t len = n / static_cast<std::size_t>(n_batches);
  if (len == 0) throw ContractError("fewer samples than batches");
  std::vector<double> bm(n_batches);
  for (int b = 0; b < n_batches; ++b) bm[b] = mean(x.subspan(b * len, len));
  Estimate e;
  e.value = mean(x);
  e.error = std::sqrt(variance(bm) / n_batches);
  return e;
}

Estimate jackknife(int n_blocks, const std::function<double(int)>& estimator) {
  if (n_blocks < 2) throw ContractError("jackknife needs at least 2 blocks");
  Estimate e;
  e.value = estimator(-1);
  std::vector<double> loo(n_blocks);
  double avg = 0.0;
  for (int k = 0; k < n_blocks; ++k) {
    loo[k] = estimator(k);
    avg += loo[k];
  }
  avg /= n_blocks;
  double s = 0.0;
  for (double t : loo) s += (t - avg) * (t - avg);
  e.error = std::sqrt(s * (n_blocks - 1) / n_blocks);
  return e;
}

double integrated_autocorrelation_time(std::span<const double> x, double window_c) {
  const std::size_t n = x.size();
  if (n < 4) return 1.0;
  const double m = mean(x);
  double c0 = 0.0;
  for (double v : x) c0 += (v - m) * (v - m);
  c0 /= static_cast<double>(n);
  if (!(c0 > 0.0)) return 1.0;
  double tau = 1.0;
  for (std::size_t t = 1; t < n / 2; ++t) {
    double ct = 0.0;
    for (std::size_t i = 0; i + t < n; ++i) ct += (x[i] - m) * (x[i + t] - m);
    ct /= static_cast<double>(n) * c0;
    tau += 2.0 * ct;
    if (static_cast<double>(t) >= window_c * tau) break;
  }
  return std::max(tau, 1e-3);
}

double split_rhat(const std::vector<std::vector<double>>& chains) {
  std::vector<std::span<const double>> halves;
  std::size_t len = 0;
  for (const auto& c : chains) {
    const std::size_t h = c.size() / 2;
    if (h < 2) throw ContractError("split_rhat: chain too short");
    len = len == 0 ? h : std::min(len, h);
  }
  for (const auto& c : chains) {
    halves.emplace_back(c.data(), len);
    halves.emplace_back(c.data() + c.size() - len, len);
  }
  const double m = static_cast<double>(halves.size());
  const double l = static_cast<double>(len);
  std::vector<double> means;
  double w = 0.0;
  for (auto h : halves) {
    means.push_back(mean(h));
    w += variance(h);
  }
  w /= m;
  const double b = l * variance(means);
  if (!(w > 0.0)) return 1.0;
  const double var_plus = (l - 1.0) / l * w + b / l;
  return std::sqrt(var_plus / w);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double ks_distance_normal(std::span<const double> x) {
  if (x.size() < 2) throw ContractError("KS distance needs at least 2 points");
  const double m = mean(x);
  const double sd = std::sqrt(variance(x));
  if (!(sd > 0.0)) throw ContractError("KS distance: degenerate variance");
  std::vector<double> z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = (x[i] - m) / sd;
  std::sort(z.begin(), z.end());
  const double n = static_cast<double>(z.size());
  double d = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double f = normal_cdf(z[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

namespace {

LineFit fit_impl(std::span<const double> x, std::span<const double> y, std::span<const double> w) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw ContractError("line fit needs >= 2 matching points");
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw ContractError("line fit: x values are all equal");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (n > 2) {
    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - f.intercept - f.slope * x[i];
      rss += w[i] * r * r;
    }
    const double dof = static_cast<double>(n - 2);
    f.slope_stderr = std::sqrt(rss / dof / sxx);
    const boost::math::students_t t(dof);
    const double q = boost::math::quantile(boost::math::complement(t, 0.025));
    f.ci_low = f.slope - q * f.slope_stderr;
    f.ci_high = f.slope + q * f.slope_stderr;
  } else {
    f.ci_low = f.ci_high = f.slope;
  }
  return f;
}

}  // namespace

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  std::vector<double> w(x.size(), 1.0);
  return fit_impl(x, y, w);
}

LineFit fit_line_weighted(std::span<const double> x, std::span<const double> y, std::span<const double> sigma) {
  if (sigma.size() != x.size()) throw ContractError("line fit: sigma size mismatch");
  std::vector<double> w(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(sigma[i] > 0.0)) throw ContractError("line fit: sigma must be positive");
    w[i] = 1.0 / (sigma[i] * sigma[i]);
  }
  return fit_impl(x, y, w);
}

LineFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || y[i] == 0.0) throw ContractError("log-log fit needs positive x and nonzero y");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(std::abs(y[i]));
  }
  return fit_line(lx, ly);
}

}  // namespace sigmav
