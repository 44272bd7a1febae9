#include "sigmav/critical.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <json.hpp>

#include "sigmav/error.hpp"
#include "sigmav/parallel.hpp"

namespace sigmav {
namespace {

// Translation-invariant models lose one Hessian direction; q_0 is pinned.
bool has_shift_mode(const PotentialModel& model) {
  const auto k = model.kind();
  return model.topology().boundary() == Boundary::Periodic &&
         (k == ModelKind::CoupledRotators || k == ModelKind::FPU);
}

Eigen::MatrixXd reduced_hessian(const PotentialModel& model, std::span<const double> q, std::size_t skip) {
  const std::size_t n = model.size();
  const std::vector<double> dense = model.hessian(q).dense();
  const std::size_t m = n - skip;
  Eigen::MatrixXd h(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) h(i, j) = dense[(i + skip) * n + (j + skip)];
  return h;
}

Eigen::VectorXd reduced_gradient(const PotentialModel& model, std::span<const double> q, std::size_t skip) {
  const std::vector<double> g = model.gradient(q);
  Eigen::VectorXd r(g.size() - skip);
  for (std::size_t i = skip; i < g.size(); ++i) r(i - skip) = g[i];
  return r;
}

double coordinate_distance(const PotentialModel& model, const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = model.is_angular() ? wrap_angle(a[i] - b[i]) : a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

bool in_zero_pi_family(const PotentialModel& model, const std::vector<double>& q) {
  for (const Bond& b : model.topology().bonds()) {
    const double qa = b.a == Bond::kWall ? 0.0 : q[b.a];
    const double qb = b.b == Bond::kWall ? 0.0 : q[b.b];
    const double d = std::abs(wrap_angle(qb - qa));
    if (d > 1e-6 && std::abs(d - std::numbers::pi) > 1e-6) return false;
  }
  return true;
}

}  // namespace

std::optional<std::vector<double>> polish_critical_point(const PotentialModel& model, std::vector<double> q,
                                                         const CriticalSearchOptions& opts) {
  if (q.size() != model.size()) throw ContractError("critical search: configuration length mismatch");
  const std::size_t skip = has_shift_mode(model) ? 1 : 0;
  if (skip) {
    const double shift = q[0];
    for (auto& x : q) x -= shift;
  }
  model.wrap(q);
  const std::size_t m = q.size() - skip;
  if (m == 0) return q;

  auto phi_at = [&](const std::vector<double>& x) { return 0.5 * reduced_gradient(model, x, skip).squaredNorm(); };
  double mu = -1.0;
  std::vector<double> trial(q.size());
  for (int it = 0; it < opts.max_iter; ++it) {
    const Eigen::VectorXd g = reduced_gradient(model, q, skip);
    const double gn = g.norm();
    if (gn < 1e-3 * opts.grad_tol) break;
    const Eigen::MatrixXd h = reduced_hessian(model, q, skip);
    if (mu < 0.0) mu = 1e-6 * (h.squaredNorm() / static_cast<double>(m) + 1e-12);
    const Eigen::VectorXd hg = h * g;
    const Eigen::MatrixXd a = h * h + mu * Eigen::MatrixXd::Identity(m, m);
    const Eigen::VectorXd d = -a.ldlt().solve(hg);
    const double slope = hg.dot(d);
    const double phi = 0.5 * gn * gn;
    if (!(slope < 0.0)) {
      mu *= 10.0;
      if (mu > 1e12) return std::nullopt;
      continue;
    }
    double t = 1.0;
    bool accepted = false;
    while (t > 1e-10) {
      for (std::size_t i = 0; i < q.size(); ++i) trial[i] = q[i] + (i >= skip ? t * d(i - skip) : 0.0);
      if (phi_at(trial) <= phi + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      mu *= 10.0;
      if (mu > 1e12) return std::nullopt;
      continue;
    }
    q = trial;
    model.wrap(q);
    mu = t == 1.0 ? std::max(mu * 0.1, 1e-300) : mu * 2.0;
  }
  if (!(reduced_gradient(model, q, skip).norm() < opts.grad_tol)) return std::nullopt;
  return q;
}

MorseData morse_index(const PotentialModel& model, const std::vector<double>& q, double degeneracy_rel,
                      double abs_floor) {
  if (q.size() != model.size()) throw ContractError("morse_index: configuration length mismatch");
  const std::size_t skip = has_shift_mode(model) ? 1 : 0;
  const Eigen::MatrixXd h = reduced_hessian(model, q, skip);
  MorseData md;
  if (h.rows() == 0) return md;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("morse_index: eigen-decomposition failed");
  const Eigen::VectorXd ev = es.eigenvalues();
  md.spectrum.assign(ev.data(), ev.data() + ev.size());
  const double radius = ev.cwiseAbs().maxCoeff();
  const double tol = std::max(degeneracy_rel * radius, abs_floor);
  md.min_abs_eigenvalue = ev.cwiseAbs().minCoeff();
  md.degenerate = !(md.min_abs_eigenvalue > tol);
  for (double l : md.spectrum) md.index += l < -tol;
  return md;
}

CriticalSearchResult find_critical_points(const PotentialModel& model, const CriticalSearchOptions& opts) {
  const std::size_t n = model.size();
  const std::size_t skip = has_shift_mode(model) ? 1 : 0;
  std::vector<std::vector<double>> seeds;
  CriticalSearchResult res;

  if (opts.structured_seeds && model.is_angular()) {
    if (n <= 12) {
      const std::size_t free = n - skip;
      for (std::uint64_t mask = 0; mask < (1ull << free); ++mask) {
        std::vector<double> q(n, 0.0);
        for (std::size_t i = 0; i < free; ++i)
          if (mask >> i & 1u) q[i + skip] = std::numbers::pi;
        seeds.push_back(std::move(q));
      }
    } else {
      res.notes.push_back("structured {0, pi} seeds skipped for N > 12");
    }
  }
  res.structured_seeds = static_cast<std::int64_t>(seeds.size());
  res.random_seeds = opts.random_seeds;

  const std::size_t total = seeds.size() + static_cast<std::size_t>(std::max<std::int64_t>(opts.random_seeds, 0));
  std::vector<std::optional<std::vector<double>>> found(total);
  parallel_for(total, opts.threads, [&](std::size_t s) {
    std::vector<double> start;
    if (s < seeds.size()) {
      start = seeds[s];
    } else {
      auto rng = stream_engine(opts.seed, s - seeds.size());
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      start.resize(n);
      for (auto& x : start) x = (model.is_angular() ? std::numbers::pi : opts.seed_box) * u(rng);
    }
    found[s] = polish_critical_point(model, std::move(start), opts);
  });

  const double dedup = opts.dedup_tol > 0.0 ? opts.dedup_tol : 1e-5 * std::sqrt(static_cast<double>(n));
  std::vector<std::vector<double>> unique;
  for (auto& f : found) {
    if (!f) {
      ++res.failed;
      continue;
    }
    ++res.converged;
    bool dup = false;
    for (const auto& u : unique)
      if (coordinate_distance(model, *f, u) < dedup) {
        dup = true;
        break;
      }
    if (!dup) unique.push_back(std::move(*f));
  }

  for (auto& q : unique) {
    CriticalPoint cp;
    cp.v = model.energy(q);
    cp.vbar = cp.v / static_cast<double>(n);
    if (cp.vbar < opts.vbar_lo - 1e-12 || cp.vbar > opts.vbar_hi + 1e-12) continue;
    // eigenvalues below sqrt(grad_tol) are not resolved by the polish
    const MorseData md = morse_index(model, q, opts.degeneracy_rel, std::sqrt(opts.grad_tol));
    cp.index = md.index;
    cp.spectrum = md.spectrum;
    cp.min_abs_eigenvalue = md.min_abs_eigenvalue;
    cp.degenerate = md.degenerate;
    const auto g = model.gradient(q);
    double g2 = 0.0;
    for (double x : g) g2 += x * x;
    cp.grad_norm = std::sqrt(g2);
    if (model.is_angular() && !in_zero_pi_family(model, q)) res.unknown_family = true;
    cp.q = std::move(q);
    res.points.push_back(std::move(cp));
  }
  std::sort(res.points.begin(), res.points.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
    if (std::abs(a.v - b.v) > 1e-9 * std::max(1.0, std::abs(a.v))) return a.v < b.v;
    return a.q < b.q;
  });
  if (res.unknown_family) res.notes.push_back("unknown family found: critical points outside the {0, pi} difference family");
  return res;
}

std::vector<CriticalLevel> levels_from_points(const std::vector<CriticalPoint>& points) {
  std::vector<CriticalLevel> out;
  for (const auto& p : points) {
    bool merged = false;
    for (auto& l : out) {
      if (std::abs(l.v - p.v) <= 1e-8 * std::max(1.0, std::abs(p.v)) && l.index == p.index &&
          l.degenerate == p.degenerate) {
        l.multiplicity += p.multiplicity;
        merged = true;
        break;
      }
    }
    if (!merged) out.push_back({p.v, p.index, static_cast<double>(p.multiplicity), p.degenerate, "found"});
  }
  std::sort(out.begin(), out.end(), [](const CriticalLevel& a, const CriticalLevel& b) {
    return a.v != b.v ? a.v < b.v : a.index < b.index;
  });
  return out;
}

std::vector<CriticalLevel> rotator_chain_critical_levels(int n) {
  if (n < 1) throw ContractError("rotator chain needs n >= 1");
  const int bonds = n + 1;
  const double pi = std::numbers::pi;
  auto binom = [](int a, int b) {
    return std::exp(std::lgamma(a + 1.0) - std::lgamma(b + 1.0) - std::lgamma(a - b + 1.0));
  };
  std::vector<CriticalLevel> out;
  for (int k = 0; k <= bonds; ++k) {  // k bonds at theta, bonds - k at pi - theta
    const int m = bonds - k;
    const double mult = std::round(binom(bonds, k));
    std::ostringstream fam;
    if (k == m) {
      if (m % 2 == 0)
        out.push_back({static_cast<double>(bonds), -1, mult, true, "continuum n_theta=" + std::to_string(k)});
      continue;
    }
    // (k - m) theta = -m pi (mod 2 pi), theta strictly inside (-pi/2, pi/2)
    const int diff = k - m;
    const double span = std::abs(static_cast<double>(diff)) * 0.5 * pi + m * pi;
    const long jmin = static_cast<long>(std::floor((m * pi - span) / (2.0 * pi))) - 1;
    const long jmax = static_cast<long>(std::ceil((m * pi + span) / (2.0 * pi))) + 1;
    for (long j = jmin; j <= jmax; ++j) {
      const double theta = (2.0 * pi * j - m * pi) / diff;
      if (!(std::abs(theta) < 0.5 * pi - 1e-12)) continue;
      const double c = std::cos(theta);
      CriticalLevel l;
      l.v = k * (1.0 - c) + m * (1.0 + c);
      l.index = k > m ? m : m - 1;
      l.multiplicity = mult;
      l.degenerate = false;
      fam << "n_theta=" << k << " theta=" << theta;
      l.family = fam.str();
      fam.str("");
      out.push_back(l);
    }
  }
  if (bonds % 4 == 0) {
    // every bond at +pi/2 or every bond at -pi/2: zero Hessian
    out.push_back({static_cast<double>(bonds), -1, 2.0, true, "all bonds +-pi/2"});
  }
  std::sort(out.begin(), out.end(), [](const CriticalLevel& a, const CriticalLevel& b) {
    return a.v != b.v ? a.v < b.v : a.index < b.index;
  });
  return out;
}

long long euler_characteristic(const std::vector<CriticalLevel>& levels, double v_limit) {
  long long chi = 0;
  for (const auto& l : levels) {
    if (l.v > v_limit) continue;
    if (l.degenerate) {
      std::ostringstream os;
      os << "euler_characteristic: degenerate critical level at v = " << l.v << " (" << l.family << ")";
      throw ContractError(os.str());
    }
    const long long mult = std::llround(l.multiplicity);
    chi += (l.index % 2 == 0 ? 1 : -1) * mult;
  }
  return chi;
}

long long euler_characteristic(const std::vector<CriticalPoint>& points, double v_limit) {
  long long chi = 0;
  for (const auto& p : points) {
    if (p.v > v_limit) continue;
    if (p.degenerate) {
      std::ostringstream os;
      os << "euler_characteristic: degenerate critical point at v = " << p.v;
      throw ContractError(os.str());
    }
    chi += (p.index % 2 == 0 ? 1 : -1) * static_cast<long long>(p.multiplicity);
  }
  return chi;
}

TopologyReport certify_window(const PotentialModel& model, double vbar_lo, double vbar_hi,
                              const std::vector<CriticalLevel>& levels, const ShellSamplerConfig* sampler,
                              const std::string& caveat) {
  if (!(vbar_hi > vbar_lo)) throw ContractError("certify_window: empty window");
  const double n = static_cast<double>(model.size());
  TopologyReport r;
  r.vbar_lo = vbar_lo;
  r.vbar_hi = vbar_hi;
  r.caveat = caveat;

  for (const auto& l : levels) {
    const double vb = l.v / n;
    if (!(vb > vbar_lo && vb < vbar_hi)) continue;
    std::size_t slot = r.critical_vbars.size();
    for (std::size_t i = 0; i < r.critical_vbars.size(); ++i)
      if (std::abs(r.critical_vbars[i] - vb) <= 1e-10 * std::max(1.0, std::abs(vb))) slot = i;
    if (slot == r.critical_vbars.size()) {
      r.critical_vbars.push_back(vb);
      r.index_counts.emplace_back();
      r.degenerate_values.push_back(false);
    }
    if (l.degenerate) {
      r.degenerate_values[slot] = true;
    } else {
      auto& counts = r.index_counts[slot];
      if (counts.size() <= static_cast<std::size_t>(l.index)) counts.resize(l.index + 1, 0.0);
      counts[l.index] += l.multiplicity;
    }
  }
  // keep the three parallel arrays sorted together
  std::vector<std::size_t> order(r.critical_vbars.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return r.critical_vbars[a] < r.critical_vbars[b]; });
  TopologyReport sorted = r;
  for (std::size_t i = 0; i < order.size(); ++i) {
    sorted.critical_vbars[i] = r.critical_vbars[order[i]];
    sorted.index_counts[i] = r.index_counts[order[i]];
    sorted.degenerate_values[i] = r.degenerate_values[order[i]];
  }
  r = std::move(sorted);

  std::vector<double> cuts{vbar_lo};
  cuts.insert(cuts.end(), r.critical_vbars.begin(), r.critical_vbars.end());
  cuts.push_back(vbar_hi);
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    Subinterval sub;
    sub.lo = cuts[s];
    sub.hi = cuts[s + 1];
    sub.certified = true;
    try {
      sub.euler = euler_characteristic(levels, 0.5 * (sub.lo + sub.hi) * n);
    } catch (const ContractError&) {
      sub.euler.reset();
    }
    if (sampler != nullptr) {
      double c_est = std::numeric_limits<double>::infinity();
      for (int j = 1; j <= 5; ++j) {
        ShellSamplerConfig cfg = *sampler;
        cfg.v = n * (sub.lo + (sub.hi - sub.lo) * j / 6.0);
        cfg.order = 1;
        cfg.seed = splitmix64(sampler->seed + 7919u * s + j);
        const SampleSet set = sample_level_set(model, cfg);
        c_est = std::min(c_est, set.diagnostics.min_grad_norm);
        sub.near_critical_events += set.diagnostics.near_critical_events;
      }
      sub.c_est = c_est;
    }
    r.subintervals.push_back(sub);
  }
  return r;
}

std::string topology_report_json(const TopologyReport& r) {
  using nlohmann::json;
  auto round10 = [](double x) { return std::round(x * 1e10) / 1e10; };
  json j;
  j["window"] = {r.vbar_lo, r.vbar_hi};
  j["critical_values"] = r.critical_vbars;
  j["index_counts"] = r.index_counts;
  j["degenerate_values"] = r.degenerate_values;
  json subs = json::array();
  for (const auto& s : r.subintervals) {
    json e;
    e["lo"] = s.lo;
    e["hi"] = s.hi;
    e["certified"] = s.certified;
    e["euler"] = s.euler ? json(*s.euler) : json(nullptr);
    e["c_est"] = std::isnan(s.c_est) ? json(nullptr) : json(s.c_est);
    e["near_critical_events"] = s.near_critical_events;
    subs.push_back(e);
  }
  j["subintervals"] = subs;
  json pts = json::array();
  for (const auto& p : r.points) {
    json e;
    std::vector<double> q;
    for (double x : p.q) q.push_back(round10(x));
    e["q"] = q;
    e["v"] = p.v;
    e["vbar"] = p.vbar;
    e["index"] = p.index;
    e["degenerate"] = p.degenerate;
    e["min_abs_eigenvalue"] = p.min_abs_eigenvalue;
    e["spectrum"] = p.spectrum;
    e["grad_norm"] = p.grad_norm;
    e["multiplicity"] = p.multiplicity;
    pts.push_back(e);
  }
  j["critical_points"] = pts;
  j["caveat"] = r.caveat;
  return j.dump(2);
}

}  // namespace sigmav
