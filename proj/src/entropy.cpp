#include "sigmav/entropy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>

#include "sigmav/error.hpp"
#include "sigmav/parallel.hpp"
#include "sigmav/stats.hpp"

namespace sigmav {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

double DensityOfStatesTable::entropy_at(std::size_t bin) const {
  if (bin >= omega.size()) throw ContractError("bin index out of range");
  return std::log(omega[bin]) / static_cast<double>(n);
}

DensityOfStatesTable oracle_density_of_states(const PotentialModel& model, const GridSpec& spec) {
  const std::size_t n = model.size();
  if (spec.bins < 1 || !(spec.v_hi > spec.v_lo)) throw ContractError("density of states: bad v histogram range");
  double lo = spec.coord_lo, hi = spec.coord_hi;
  if (model.is_angular() && !(hi > lo)) {
    lo = -std::numbers::pi;
    hi = std::numbers::pi;
  }
  if (!(hi > lo)) throw ContractError("density of states: coordinate box is empty");
  const bool periodic_box = model.is_angular() && lo <= -std::numbers::pi + 1e-12 && hi >= std::numbers::pi - 1e-12;

  const int bins = spec.bins;
  const double width = (spec.v_hi - spec.v_lo) / bins;
  // Each work item fills its own histogram; merged in index order.
  struct Partial {
    std::vector<std::int64_t> counts;
    std::int64_t below = 0;
    std::int64_t inside = 0;    ///< V <= v_hi
    std::int64_t boundary = 0;  ///< V <= v_hi in the outermost layer of the box
    std::int64_t points = 0;
  };
  auto classify = [&](Partial& p, std::span<const double> q, bool on_boundary) {
    const double v = model.energy(q);
    ++p.points;
    if (v <= spec.v_hi) {
      ++p.inside;
      if (on_boundary) ++p.boundary;
    }
    if (v < spec.v_lo) {
      ++p.below;
      return;
    }
    if (v >= spec.v_hi) return;
    const int b = std::min(bins - 1, static_cast<int>((v - spec.v_lo) / width));
    ++p.counts[b];
  };

  std::vector<Partial> parts;
  if (spec.mode == GridSpec::Mode::Grid) {
    if (n > 4) throw ContractError("grid density of states supports N <= 4");
    const int m = spec.points_per_axis;
    if (m < 2) throw ContractError("grid density of states: points_per_axis must be >= 2");
    const double h = (hi - lo) / m;
    parts.resize(m);
    parallel_for(static_cast<std::size_t>(m), spec.threads, [&](std::size_t slab) {
      Partial& p = parts[slab];
      p.counts.assign(bins, 0);
      std::vector<int> idx(n, 0);
      idx[0] = static_cast<int>(slab);
      std::vector<double> q(n);
      for (;;) {
        bool edge = false;
        for (std::size_t i = 0; i < n; ++i) {
          q[i] = lo + (idx[i] + 0.5) * h;
          edge = edge || idx[i] == 0 || idx[i] == m - 1;
        }
        classify(p, q, edge);
        std::size_t d = 1;
        while (d < n && ++idx[d] == m) idx[d++] = 0;
        if (d >= n) break;
      }
    });
  } else {
    if (n > 8) throw ContractError("hit-or-miss density of states supports N <= 8");
    if (spec.samples < 10000000) throw ContractError("hit-or-miss density of states needs >= 1e7 points");
    const std::int64_t chunk = 1 << 20;
    const std::size_t chunks = static_cast<std::size_t>((spec.samples + chunk - 1) / chunk);
    parts.resize(chunks);
    const double layer = 0.01 * (hi - lo);
    parallel_for(chunks, spec.threads, [&](std::size_t c) {
      Partial& p = parts[c];
      p.counts.assign(bins, 0);
      auto rng = stream_engine(spec.seed, c);
      std::uniform_real_distribution<double> u(lo, hi);
      std::vector<double> q(n);
      const std::int64_t begin = static_cast<std::int64_t>(c) * chunk;
      const std::int64_t end = std::min(spec.samples, begin + chunk);
      for (std::int64_t s = begin; s < end; ++s) {
        bool edge = false;
        for (auto& x : q) {
          x = u(rng);
          edge = edge || x < lo + layer || x > hi - layer;
        }
        classify(p, q, edge);
      }
    });
  }

  DensityOfStatesTable t;
  t.model_id = model.describe();
  t.n = n;
  t.bin_width = width;
  t.counts.assign(bins, 0.0);
  std::int64_t below = 0, inside = 0, boundary = 0, points = 0;
  for (const auto& p : parts) {
    for (int b = 0; b < bins; ++b) t.counts[b] += static_cast<double>(p.counts[b]);
    below += p.below;
    inside += p.inside;
    boundary += p.boundary;
    points += p.points;
  }
  if (!periodic_box && inside > 0 && static_cast<double>(boundary) > 1e-3 * static_cast<double>(inside))
    throw ContractError("density of states: coordinate range too small (boundary mass " +
                        std::to_string(static_cast<double>(boundary) / inside) + " > 0.1%)");

  t.total_points = static_cast<double>(points);
  t.box_volume = std::pow(hi - lo, static_cast<double>(n));
  const double scale = t.box_volume / t.total_points;
  t.edges.resize(bins + 1);
  t.centers.resize(bins);
  t.omega.resize(bins);
  t.omega_error.resize(bins);
  t.m.resize(bins + 1);
  t.m[0] = static_cast<double>(below) * scale;
  for (int b = 0; b <= bins; ++b) t.edges[b] = spec.v_lo + b * width;
  for (int b = 0; b < bins; ++b) {
    t.centers[b] = spec.v_lo + (b + 0.5) * width;
    t.omega[b] = t.counts[b] * scale / width;
    t.omega_error[b] = std::sqrt(t.counts[b]) * scale / width;
    t.m[b + 1] = t.m[b] + t.counts[b] * scale;
  }
  return t;
}

namespace {

struct Stencil {
  std::vector<int> offsets;
  std::vector<double> coeffs;
};

Stencil stencil_for(int k) {
  switch (k) {
    case 1: return {{-1, 0, 1}, {-0.5, 0.0, 0.5}};
    case 2: return {{-1, 0, 1}, {1.0, -2.0, 1.0}};
    case 3: return {{-2, -1, 0, 1, 2}, {-0.5, 1.0, 0.0, -1.0, 0.5}};
    case 4:
      return {{-3, -2, -1, 0, 1, 2, 3},
              {-1.0 / 6, 12.0 / 6, -39.0 / 6, 56.0 / 6, -39.0 / 6, 12.0 / 6, -1.0 / 6}};
    default: throw ContractError("derivative order must be in 1..4");
  }
}

StencilDerivative stencil_at(const DensityOfStatesTable& t, long centre, int k, int step) {
  const Stencil st = stencil_for(k);
  const double h = step * t.bin_width;
  StencilDerivative d;
  double var = 0.0, c2 = 0.0;
  for (std::size_t i = 0; i < st.offsets.size(); ++i) {
    const long b = centre + static_cast<long>(st.offsets[i]) * step;
    if (b < 0 || b >= static_cast<long>(t.counts.size()))
      throw ContractError("oracle stencil leaves the tabulated range");
    if (!(t.counts[b] > 0.0)) throw NumericalError("oracle stencil hits an empty bin");
    d.value += st.coeffs[i] * std::log(t.omega[b]);
    var += st.coeffs[i] * st.coeffs[i] / t.counts[b];
    c2 += st.coeffs[i] * st.coeffs[i];
  }
  const double hk = std::pow(h, k);
  d.value /= hk;
  d.error = std::sqrt(var) / hk;
  d.amplification = std::sqrt(c2) / hk;
  return d;
}

}  // namespace

StencilDerivative oracle_derivative(const DensityOfStatesTable& table, double vbar, int k, int step_bins) {
  if (step_bins < 1) throw ContractError("stencil step must be >= 1 bin");
  const double v = vbar * static_cast<double>(table.n);
  const double x = (v - table.centers.front()) / table.bin_width;
  const long i0 = static_cast<long>(std::floor(x));
  const double frac = x - static_cast<double>(i0);
  const StencilDerivative a = stencil_at(table, i0, k, step_bins);
  const StencilDerivative b = frac > 0.0 ? stencil_at(table, i0 + 1, k, step_bins) : a;
  // d^k S / dvbar^k = N^(k-1) d^k log Omega / dv^k
  const double jac = std::pow(static_cast<double>(table.n), k - 1);
  StencilDerivative r;
  r.value = jac * ((1.0 - frac) * a.value + frac * b.value);
  r.error = jac * ((1.0 - frac) * a.error + frac * b.error);
  r.amplification = jac * a.amplification;
  return r;
}

namespace {

// Power sums of shifted integrands d = alpha - a0, e = P - p0, w = W - w0, q = Q - q0.
struct Sums {
  double n = 0, d1 = 0, d2 = 0, d3 = 0, d4 = 0, e1 = 0, e2 = 0, de = 0, dde = 0, w1 = 0, dw = 0, q1 = 0;

  void add(double d, double e, double w, double q) {
    n += 1;
    d1 += d;
    d2 += d * d;
    d3 += d * d * d;
    d4 += d * d * d * d;
    e1 += e;
    e2 += e * e;
    de += d * e;
    dde += d * d * e;
    w1 += w;
    dw += d * w;
    q1 += q;
  }
  Sums minus(const Sums& o) const {
    Sums r;
    r.n = n - o.n;
    r.d1 = d1 - o.d1;
    r.d2 = d2 - o.d2;
    r.d3 = d3 - o.d3;
    r.d4 = d4 - o.d4;
    r.e1 = e1 - o.e1;
    r.e2 = e2 - o.e2;
    r.de = de - o.de;
    r.dde = dde - o.dde;
    r.w1 = w1 - o.w1;
    r.dw = dw - o.dw;
    r.q1 = q1 - o.q1;
    return r;
  }
};

struct Shifts {
  double a0 = 0, p0 = 0, w0 = 0, q0 = 0;
};

std::map<std::string, double> moment_terms(const Sums& s, const Shifts& sh, int k) {
  const double n = s.n;
  const double m = s.d1 / n, ed2 = s.d2 / n, ed3 = s.d3 / n, ed4 = s.d4 / n;
  const double var = ed2 - m * m;
  std::map<std::string, double> t;
  t["mean_alpha"] = sh.a0 + m;
  if (k >= 2) {
    t["var_alpha"] = var;
    t["mean_P"] = sh.p0 + s.e1 / n;
  }
  if (k >= 3) {
    const double me = s.e1 / n;
    t["mu3_alpha"] = ed3 - 3.0 * m * ed2 + 2.0 * m * m * m;
    t["cov_alpha_P"] = s.de / n - m * me;
    t["mean_W"] = sh.w0 + s.w1 / n;
  }
  if (k >= 4) {
    const double me = s.e1 / n;
    const double mu4 = ed4 - 4.0 * m * ed3 + 6.0 * m * m * ed2 - 3.0 * m * m * m * m;
    t["kappa4_alpha"] = mu4 - 3.0 * var * var;
    t["d2alpha_dP"] = s.dde / n - 2.0 * m * s.de / n - me * ed2 + 2.0 * m * m * me;
    t["var_P"] = s.e2 / n - me * me;
    t["cov_alpha_W"] = s.dw / n - m * s.w1 / n;
    t["mean_Q"] = sh.q0 + s.q1 / n;
  }
  return t;
}

double combine(const std::map<std::string, double>& t, int k, double n) {
  switch (k) {
    case 1: return t.at("mean_alpha");
    case 2: return n * (t.at("var_alpha") + t.at("mean_P"));
    case 3: return n * n * (t.at("mu3_alpha") + 3.0 * t.at("cov_alpha_P") + t.at("mean_W"));
    case 4:
      return n * n * n *
             (t.at("kappa4_alpha") + 6.0 * t.at("d2alpha_dP") + 3.0 * t.at("var_P") + 4.0 * t.at("cov_alpha_W") +
              t.at("mean_Q"));
    default: throw ContractError("derivative order must be in 1..4");
  }
}

}  // namespace

double recombine(const DerivativeEstimate& e) { return combine(e.terms, e.order, static_cast<double>(e.n)); }

DerivativeEstimate derivative_from_samples(const SampleSet& set, int k) {
  if (k < 1 || k > 4) throw ContractError("derivative order must be in 1..4");
  if (set.config.order < k) throw ContractError("samples were drawn with a lower integrand order than requested");
  const auto& smp = set.samples;
  const auto blocks = sample_blocks(set, 20);
  if (blocks.size() < 2) throw ContractError("entropy derivative: not enough samples for an error estimate");

  Shifts sh;
  for (const auto& s : smp) {
    sh.a0 += s.alpha;
    if (k >= 2) sh.p0 += s.p;
    if (k >= 3) sh.w0 += s.w;
    if (k >= 4) sh.q0 += s.q;
  }
  const double total_n = static_cast<double>(smp.size());
  sh.a0 /= total_n;
  sh.p0 /= total_n;
  sh.w0 /= total_n;
  sh.q0 /= total_n;

  std::vector<Sums> block_sums(blocks.size());
  Sums all;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (std::size_t i = blocks[b].first; i < blocks[b].second; ++i) {
      const auto& s = smp[i];
      block_sums[b].add(s.alpha - sh.a0, k >= 2 ? s.p - sh.p0 : 0.0, k >= 3 ? s.w - sh.w0 : 0.0,
                        k >= 4 ? s.q - sh.q0 : 0.0);
    }
    const Sums& bs = block_sums[b];
    all.n += bs.n;
    all.d1 += bs.d1;
    all.d2 += bs.d2;
    all.d3 += bs.d3;
    all.d4 += bs.d4;
    all.e1 += bs.e1;
    all.e2 += bs.e2;
    all.de += bs.de;
    all.dde += bs.dde;
    all.w1 += bs.w1;
    all.dw += bs.dw;
    all.q1 += bs.q1;
  }

  const double n_sites = static_cast<double>(set.model_size);
  DerivativeEstimate e;
  e.order = k;
  e.n = set.model_size;
  e.vbar = set.config.v / n_sites;
  e.epsilon = set.config.resolved_epsilon();
  e.samples = smp.size();
  e.terms = moment_terms(all, sh, k);
  const Estimate jk = jackknife(static_cast<int>(blocks.size()), [&](int left_out) {
    const Sums s = left_out < 0 ? all : all.minus(block_sums[left_out]);
    return combine(moment_terms(s, sh, k), k, n_sites);
  });
  e.value = jk.value;
  e.error = jk.error;

  const auto& d = set.diagnostics;
  if (d.near_critical_events > 0) e.flags.push_back("near-critical events during sampling");
  if (total_n / std::max(d.tau_alpha, 1.0) < 100.0) e.flags.push_back("fewer than 100 effective samples");
  if (d.acceptance_rate < 0.05) e.flags.push_back("low acceptance rate");
  e.flagged = !e.flags.empty();
  return e;
}

DerivativeEstimate entropy_derivative(const PotentialModel& model, double vbar, int k, ShellSamplerConfig cfg) {
  if (k < 1 || k > 4) throw ContractError("derivative order must be in 1..4");
  cfg.v = vbar * static_cast<double>(model.size());
  cfg.order = std::max(cfg.order, k);
  return derivative_from_samples(sample_level_set(model, cfg), k);
}

BetaEstimate beta_oracle(const DensityOfStatesTable& t, double vbar) {
  const double v = vbar * static_cast<double>(t.n);
  if (v < t.edges.front() || v > t.edges.back()) throw ContractError("beta_oracle: vbar outside the tabulated range");
  const double x = (v - t.edges.front()) / t.bin_width;
  const std::size_t i = std::min(static_cast<std::size_t>(x), t.counts.size() - 1);
  const double frac = x - static_cast<double>(i);
  const double m = t.m[i] + frac * (t.m[i + 1] - t.m[i]);
  if (!(m > 0.0)) throw ContractError("beta_oracle: M = 0 (below the ground state)");

  const double c = (v - t.centers.front()) / t.bin_width;
  double omega, omega_err;
  if (c <= 0.0) {
    omega = t.omega.front();
    omega_err = t.omega_error.front();
  } else if (c >= static_cast<double>(t.centers.size() - 1)) {
    omega = t.omega.back();
    omega_err = t.omega_error.back();
  } else {
    const std::size_t j = static_cast<std::size_t>(c);
    const double f = c - static_cast<double>(j);
    omega = (1.0 - f) * t.omega[j] + f * t.omega[j + 1];
    omega_err = (1.0 - f) * t.omega_error[j] + f * t.omega_error[j + 1];
  }
  BetaEstimate b;
  b.method = "oracle";
  b.value = omega / m;
  b.error = omega_err / m;
  return b;
}

BetaEstimate beta_surface(const PotentialModel& model, double vbar, ShellSamplerConfig cfg) {
  const double n = static_cast<double>(model.size());
  if (model.kind() != ModelKind::Linear && vbar < -model.stability_bound())
    throw ContractError("beta_surface: vbar below the ground state");
  const DerivativeEstimate d = entropy_derivative(model, vbar, 1, cfg);
  BetaEstimate b;
  b.method = "surface";
  b.value = d.value;
  b.error = d.error;
  b.correction = d.value > 0.0 ? std::log(d.value) / n : kNaN;
  return b;
}

LegendreTable legendre(const std::vector<double>& vbar, const std::vector<double>& s,
                       const std::vector<double>& beta, bool refine) {
  const std::size_t n = vbar.size();
  if (n < 20 || s.size() != n) throw ContractError("legendre: need at least 20 matching grid points");
  for (std::size_t i = 1; i < n; ++i)
    if (!(vbar[i] > vbar[i - 1])) throw ContractError("legendre: vbar grid must be strictly increasing");

  LegendreTable t;
  std::vector<double> slopes(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) slopes[i] = (s[i + 1] - s[i]) / (vbar[i + 1] - vbar[i]);
  for (std::size_t i = 1; i < slopes.size(); ++i)
    if (slopes[i] > slopes[i - 1] + 1e-12 * (1.0 + std::abs(slopes[i - 1]))) t.nonconcave = true;
  if (beta.empty()) {
    // chord slopes of the hull include the bridges over nonconcave stretches
    const std::vector<double> hull = concave_hull(vbar, s);
    for (std::size_t i = 0; i + 1 < n; ++i) t.beta.push_back((hull[i + 1] - hull[i]) / (vbar[i + 1] - vbar[i]));
  } else {
    t.beta = beta;
  }

  for (double b : t.beta) {
    std::size_t best = 0;
    double g_best = s[0] - b * vbar[0];
    for (std::size_t i = 1; i < n; ++i) {
      const double g = s[i] - b * vbar[i];
      if (g > g_best) {
        g_best = g;
        best = i;
      }
    }
    double f = g_best, at = vbar[best];
    if (refine && best > 0 && best + 1 < n) {
      const double x0 = vbar[best - 1], x1 = vbar[best], x2 = vbar[best + 1];
      const double y0 = s[best - 1] - b * x0, y1 = g_best, y2 = s[best + 1] - b * x2;
      const double d01 = (y1 - y0) / (x1 - x0), d12 = (y2 - y1) / (x2 - x1);
      const double curv = (d12 - d01) / (x2 - x0);  // half the second derivative
      if (curv < 0.0) {
        // y = y1 + d01 (x - x1) + curv (x - x0)(x - x1) expanded about x1
        const double lin = d01 + curv * (x1 - x0);
        const double xv = x1 - lin / (2.0 * curv);
        if (xv > x0 && xv < x2) {
          at = xv;
          f = y1 + lin * (xv - x1) + curv * (xv - x1) * (xv - x1);
        }
      }
    }
    t.f.push_back(f);
    t.vbar_at.push_back(at);
  }
  return t;
}

std::vector<double> inverse_legendre(const LegendreTable& t, const std::vector<double>& vbar) {
  if (t.beta.empty()) throw ContractError("inverse_legendre: empty table");
  std::vector<double> out;
  out.reserve(vbar.size());
  for (double v : vbar) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < t.beta.size(); ++j) best = std::min(best, t.f[j] + t.beta[j] * v);
    out.push_back(best);
  }
  return out;
}

std::vector<double> concave_hull(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n == 0 || y.size() != n) throw ContractError("concave_hull: size mismatch");
  std::vector<std::size_t> hull;
  for (std::size_t i = 0; i < n; ++i) {
    while (hull.size() >= 2) {
      const std::size_t a = hull[hull.size() - 2], b = hull.back();
      // Drop b when it lies on or below the chord a -> i.
      const double cross = (x[b] - x[a]) * (y[i] - y[a]) - (y[b] - y[a]) * (x[i] - x[a]);
      if (cross >= 0.0)
        hull.pop_back();
      else
        break;
    }
    hull.push_back(i);
  }
  std::vector<double> out(n);
  std::size_t seg = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (seg + 1 < hull.size() && x[hull[seg + 1]] < x[i]) ++seg;
    if (seg + 1 >= hull.size()) {
      out[i] = y[hull.back()];
      continue;
    }
    const std::size_t a = hull[seg], b = hull[seg + 1];
    out[i] = y[a] + (y[b] - y[a]) * (x[i] - x[a]) / (x[b] - x[a]);
  }
  return out;
}

double helmholtz(double f, double beta) {
  if (!(beta > 0.0)) throw ContractError("helmholtz: beta must be > 0");
  return -std::log(std::numbers::pi / beta) / (2.0 * beta) - f / beta;
}

std::vector<double> helmholtz(const std::vector<double>& f, const std::vector<double>& beta) {
  if (f.size() != beta.size()) throw ContractError("helmholtz: size mismatch");
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = helmholtz(f[i], beta[i]);
  return out;
}

namespace harmonic {

double log_unit_ball(int n) {
  return 0.5 * n * std::log(std::numbers::pi) - std::lgamma(0.5 * n + 1.0);
}

double sublevel_entropy(int n, double vbar) {
  if (!(vbar > 0.0)) throw ContractError("harmonic sublevel entropy needs vbar > 0");
  return (log_unit_ball(n) + 0.5 * n * std::log(2.0 * n * vbar)) / n;
}

double free_entropy(int n, double beta) {
  if (!(beta > 0.0)) throw ContractError("harmonic free entropy needs beta > 0");
  return log_unit_ball(n) / n + 0.5 * std::log(n / beta) - 0.5;
}

}  // namespace harmonic

BoundConstants bound_constants(const PotentialModel& model, const SampleSet& set, std::size_t max_samples) {
  const std::size_t n = model.size();
  std::vector<std::size_t> picks;
  for (std::size_t i = 0; i < set.samples.size(); ++i)
    if (set.samples[i].coords.size() == n) picks.push_back(i);
  if (picks.empty()) throw ContractError("bound_constants: samples carry no configurations");
  const std::size_t stride = std::max<std::size_t>(1, picks.size() / std::max<std::size_t>(max_samples, 1));

  std::vector<double> hii(n, 0.0), gi2(n, 0.0), gg(n * n, 0.0);
  std::vector<double> pair_diag(n, 0.0), pair_off;
  double count = 0.0;
  for (std::size_t p = 0; p < picks.size(); p += stride) {
    const auto& q = set.samples[picks[p]].coords;
    const auto g = model.gradient(q);
    const SparseHessian h = model.hessian(q);
    const auto diag = h.diagonal();
    const auto off = h.off_diagonal();
    if (pair_off.empty()) pair_off.assign(off.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      hii[i] += std::abs(diag[i]);
      gi2[i] += g[i] * g[i];
      pair_diag[i] += std::abs(g[i] * diag[i] * g[i]);
      for (std::size_t j = 0; j < n; ++j) gg[i * n + j] += g[i] * g[i] * g[j] * g[j];
    }
    for (std::size_t e = 0; e < off.size() && e < pair_off.size(); ++e)
      pair_off[e] += std::abs(g[off[e].i] * off[e].value * g[off[e].j]);
    count += 1.0;
  }
  BoundConstants b;
  b.max_neighbors = model.topology().max_neighbors();
  b.m1 = *std::max_element(hii.begin(), hii.end()) / count;
  b.m2 = *std::max_element(pair_diag.begin(), pair_diag.end()) / count;
  for (double v : pair_off) b.m2 = std::max(b.m2, v / count);
  b.c1 = *std::min_element(gi2.begin(), gi2.end()) / count;
  b.c2 = *std::min_element(gg.begin(), gg.end()) / count;
  return b;
}

void write_thermo_csv(std::ostream& os, const std::vector<ThermoRow>& rows) {
  os << "vbar,S,dS1,dS2,dS3,dS4,stderr1,stderr2,stderr3,stderr4\n";
  os << std::setprecision(12);
  auto put = [&os](double x) {
    if (std::isnan(x))
      os << "nan";
    else
      os << x;
  };
  for (const auto& r : rows) {
    put(r.vbar);
    os << ',';
    put(r.s);
    for (double d : r.ds) {
      os << ',';
      put(d);
    }
    for (double e : r.err) {
      os << ',';
      put(e);
    }
    os << '\n';
  }
}

}  // namespace sigmav
