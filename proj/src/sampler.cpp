#include "sigmav/sampler.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>

#include "sigmav/error.hpp"
#include "sigmav/parallel.hpp"
#include "sigmav/stats.hpp"

namespace sigmav {

double ShellSamplerConfig::resolved_epsilon() const {
  return epsilon > 0.0 ? epsilon : 1e-3 * std::max(std::abs(v), 1.0);
}

void ShellSamplerConfig::validate() const {
  if (!(epsilon >= 0.0)) throw ContractError("sampler: epsilon must be > 0 (or 0 for the default)");
  if (!(step_sigma >= 0.0)) throw ContractError("sampler: step_sigma must be > 0 (or 0 for automatic)");
  if (!(tangent_sigma > 0.0)) throw ContractError("sampler: tangent_sigma must be > 0");
  if (!(manifold_fraction >= 0.0 && manifold_fraction <= 1.0))
    throw ContractError("sampler: manifold_fraction must be in [0, 1]");
  if (n_steps <= burn_in) throw ContractError("sampler: n_steps must exceed burn_in");
  if (burn_in < 0) throw ContractError("sampler: burn_in must be >= 0");
  if (thinning < 1) throw ContractError("sampler: thinning must be >= 1");
  if (n_chains < 1) throw ContractError("sampler: n_chains must be >= 1");
  if (order < 1 || order > 4) throw ContractError("sampler: order must be in 1..4");
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

class ShellChain {
 public:
  ShellChain(const PotentialModel& model, const ShellSamplerConfig& cfg, int id)
      : model_(model),
        cfg_(cfg),
        id_(id),
        eps_(cfg.resolved_epsilon()),
        rng_(stream_engine(cfg.seed, static_cast<std::uint64_t>(id))),
        n_(model.size()) {
    initialize();
    sigma_ = cfg.step_sigma > 0.0 ? cfg.step_sigma : eps_ / std::max(gnorm_, 1e-12);
    tau_ = cfg.tangent_sigma;
  }

  void run(std::vector<LevelSetSample>& out, ChainDiagnostics& diag, std::int64_t& iso_tries,
           std::int64_t& iso_acc, std::int64_t& man_tries, std::int64_t& man_acc) {
    std::int64_t win_iso_t = 0, win_iso_a = 0, win_man_t = 0, win_man_a = 0;
    double min_grad = std::numeric_limits<double>::infinity();
    for (std::int64_t step = 0; step < cfg_.n_steps; ++step) {
      const bool manifold = uniform_(rng_) < cfg_.manifold_fraction;
      const bool accepted = manifold ? manifold_move() : isotropic_move();
      const bool production = step >= cfg_.burn_in;
      if (manifold) {
        ++win_man_t;
        win_man_a += accepted;
        if (production) {
          ++man_tries;
          man_acc += accepted;
        }
      } else {
        ++win_iso_t;
        win_iso_a += accepted;
        if (production) {
          ++iso_tries;
          iso_acc += accepted;
        }
      }
      if (!production && cfg_.tune) {
        if (win_iso_t >= 100) {
          sigma_ = adapt(sigma_, static_cast<double>(win_iso_a) / win_iso_t);
          win_iso_t = win_iso_a = 0;
        }
        if (win_man_t >= 100) {
          tau_ = std::min(adapt(tau_, static_cast<double>(win_man_a) / win_man_t), tau_cap());
          win_man_t = win_man_a = 0;
        }
      }
      if (production && (step - cfg_.burn_in) % cfg_.thinning == 0) record(step, out, diag, min_grad);
    }
    diag.min_grad_norm = std::min(diag.min_grad_norm, min_grad);
    diag.final_step_sigma = sigma_;
    diag.final_tangent_sigma = tau_;
  }

 private:
  static double adapt(double s, double rate) {
    // Log-scale Robbins-Monro step toward the centre of [0.2, 0.5].
    if (rate >= 0.2 && rate <= 0.5) return s;
    return s * std::exp(2.0 * (rate - 0.35));
  }

  double tau_cap() const { return model_.is_angular() ? 1.0 : 1e6; }

  void initialize() {
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double scale = std::sqrt(2.0 * std::max(std::abs(cfg_.v), 1.0) / static_cast<double>(n_));
    x_.assign(n_, 0.0);
    for (int attempt = 0; attempt <= cfg_.max_init_restarts; ++attempt) {
      for (auto& xi : x_) {
        xi = model_.is_angular() ? std::numbers::pi * (2.0 * uniform_(rng_) - 1.0) : scale * gauss(rng_);
      }
      if (relax_to_shell(model_, x_, cfg_.v, eps_)) {
        model_.wrap(x_);
        refresh();
        if (gnorm_ > 0.0) return;
      }
    }
    throw NumericalError("sampler: initializer could not reach the shell |V - " + std::to_string(cfg_.v) +
                         "| <= " + std::to_string(eps_));
  }

  void refresh() {
    vx_ = model_.energy(x_);
    gx_ = model_.gradient(x_);
    gnorm_ = std::sqrt(dot(gx_, gx_));
  }

  bool isotropic_move() {
    y_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) y_[i] = x_[i] + sigma_ * gauss_(rng_);
    const double vy = model_.energy(y_);
    if (!(std::abs(vy - cfg_.v) <= eps_)) return false;
    x_.swap(y_);
    model_.wrap(x_);
    refresh();
    return true;
  }

  // Solves V(base + t + a n) = level for a by Newton, starting at a = 0.
  std::optional<double> project(std::span<const double> base, std::span<const double> t,
                                std::span<const double> n, double level, std::vector<double>& y) const {
    const double tol = 1e-12 * std::max(1.0, std::abs(level));
    const double bound = 10.0 * (std::sqrt(dot(t, t)) + 1.0);
    double a = 0.0;
    y.resize(n_);
    std::vector<double> g(n_);
    for (int it = 0; it < 40; ++it) {
      for (std::size_t i = 0; i < n_; ++i) y[i] = base[i] + t[i] + a * n[i];
      const double f = model_.energy(y) - level;
      if (std::abs(f) <= tol) return a;
      model_.gradient(y, g);
      const double d = dot(g, n);
      if (!(std::abs(d) > 1e-300)) return std::nullopt;
      a -= f / d;
      if (!(std::abs(a) < bound)) return std::nullopt;
    }
    return std::nullopt;
  }

  bool manifold_move() {
    if (!(gnorm_ > 0.0)) return false;
    const double level = vx_;
    std::vector<double> nx(n_), t(n_);
    for (std::size_t i = 0; i < n_; ++i) nx[i] = gx_[i] / gnorm_;
    for (std::size_t i = 0; i < n_; ++i) t[i] = tau_ * gauss_(rng_);
    const double tn = dot(t, nx);
    for (std::size_t i = 0; i < n_; ++i) t[i] -= tn * nx[i];

    std::vector<double> y;
    const auto a = project(x_, t, nx, level, y);
    if (!a) return false;
    if (!(std::abs(model_.energy(y) - cfg_.v) <= eps_)) return false;
    const std::vector<double> gy = model_.gradient(y);
    const double gy_norm = std::sqrt(dot(gy, gy));
    if (!(gy_norm > 0.0)) return false;

    std::vector<double> ny(n_), tr(n_);
    for (std::size_t i = 0; i < n_; ++i) ny[i] = gy[i] / gy_norm;
    for (std::size_t i = 0; i < n_; ++i) tr[i] = x_[i] - y[i];
    const double ar = dot(tr, ny);
    for (std::size_t i = 0; i < n_; ++i) tr[i] -= ar * ny[i];

    std::vector<double> back;
    const auto a_back = project(y, tr, ny, level, back);
    if (!a_back || std::abs(*a_back - ar) > 1e-7 * (1.0 + std::abs(ar))) return false;

    const double log_ratio =
        -(dot(tr, tr) - dot(t, t)) / (2.0 * tau_ * tau_) + std::log(gnorm_) - std::log(gy_norm);
    if (!(std::log(uniform_(rng_)) < log_ratio)) return false;

    x_ = std::move(y);
    model_.wrap(x_);
    refresh();
    return true;
  }

  void record(std::int64_t step, std::vector<LevelSetSample>& out, ChainDiagnostics& diag, double& min_grad) {
    min_grad = std::min(min_grad, gnorm_);
    try {
      const GeometryPoint gp = integrand_suite(model_, x_, cfg_.order, cfg_.geometry);
      LevelSetSample s;
      s.chain = id_;
      s.step = step;
      s.energy = gp.energy;
      s.grad_norm = gp.grad_norm;
      s.alpha = gp.alpha;
      s.p = gp.alpha_d1.value_or(kNaN);
      s.w = gp.alpha_d2.value_or(kNaN);
      s.q = gp.alpha_d3.value_or(kNaN);
      if (cfg_.keep_configurations) s.coords = x_;
      out.push_back(std::move(s));
    } catch (const NearCriticalError&) {
      ++diag.near_critical_events;
    }
  }

  const PotentialModel& model_;
  const ShellSamplerConfig& cfg_;
  int id_;
  double eps_;
  std::mt19937_64 rng_;
  std::size_t n_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::normal_distribution<double> gauss_{0.0, 1.0};
  std::vector<double> x_, y_, gx_;
  double vx_ = 0.0;
  double gnorm_ = 0.0;
  double sigma_ = 0.0;
  double tau_ = 0.0;
};

}  // namespace

bool relax_to_shell(const PotentialModel& model, std::vector<double>& q, double v, double epsilon, int max_iter) {
  const double cap = model.is_angular() ? 0.5 : 1.0 + std::sqrt(std::abs(v));
  std::vector<double> g(q.size());
  for (int it = 0; it < max_iter; ++it) {
    const double f = model.energy(q) - v;
    if (std::abs(f) <= 0.5 * epsilon) return true;
    model.gradient(q, g);
    const double g2 = dot(g, g);
    if (!(g2 > 1e-24)) return false;
    double step = f / g2;
    const double len = std::abs(step) * std::sqrt(g2);
    if (len > cap) step *= cap / len;
    for (std::size_t i = 0; i < q.size(); ++i) q[i] -= step * g[i];
  }
  return std::abs(model.energy(q) - v) <= epsilon;
}

SampleSet sample_level_set(const PotentialModel& model, const ShellSamplerConfig& cfg) {
  cfg.validate();
  const int nc = cfg.n_chains;
  std::vector<std::vector<LevelSetSample>> per_chain(nc);
  std::vector<ChainDiagnostics> per_diag(nc);
  std::vector<std::array<std::int64_t, 4>> counts(nc, {0, 0, 0, 0});

  parallel_for(static_cast<std::size_t>(nc), cfg.threads, [&](std::size_t c) {
    per_diag[c].min_grad_norm = std::numeric_limits<double>::infinity();
    ShellChain chain(model, cfg, static_cast<int>(c));
    per_chain[c].reserve(static_cast<std::size_t>((cfg.n_steps - cfg.burn_in) / cfg.thinning + 1));
    chain.run(per_chain[c], per_diag[c], counts[c][0], counts[c][1], counts[c][2], counts[c][3]);
  });

  SampleSet set;
  set.config = cfg;
  set.model_size = model.size();
  ChainDiagnostics& d = set.diagnostics;
  d.min_grad_norm = std::numeric_limits<double>::infinity();
  std::int64_t it = 0, ia = 0, mt = 0, ma = 0;
  std::vector<std::vector<double>> alpha_series, energy_series;
  double tau_a = 0.0, tau_e = 0.0;
  for (int c = 0; c < nc; ++c) {
    it += counts[c][0];
    ia += counts[c][1];
    mt += counts[c][2];
    ma += counts[c][3];
    d.near_critical_events += per_diag[c].near_critical_events;
    d.min_grad_norm = std::min(d.min_grad_norm, per_diag[c].min_grad_norm);
    d.final_step_sigma += per_diag[c].final_step_sigma / nc;
    d.final_tangent_sigma += per_diag[c].final_tangent_sigma / nc;
    std::vector<double> a, e;
    for (const auto& s : per_chain[c]) {
      a.push_back(s.alpha);
      e.push_back(s.energy);
    }
    tau_a += integrated_autocorrelation_time(a) / nc;
    tau_e += integrated_autocorrelation_time(e) / nc;
    alpha_series.push_back(std::move(a));
    energy_series.push_back(std::move(e));
  }
  d.tau_alpha = tau_a;
  d.tau_energy = tau_e;
  d.isotropic_acceptance = it > 0 ? static_cast<double>(ia) / it : 0.0;
  d.manifold_acceptance = mt > 0 ? static_cast<double>(ma) / mt : 0.0;
  d.acceptance_rate = (it + mt) > 0 ? static_cast<double>(ia + ma) / (it + mt) : 0.0;
  bool long_enough = true;
  for (const auto& a : alpha_series) long_enough = long_enough && a.size() >= 4;
  if (long_enough) {
    d.rhat_alpha = split_rhat(alpha_series);
    d.rhat_energy = split_rhat(energy_series);
  }
  if (d.acceptance_rate < 0.05) d.warnings.push_back("low acceptance rate " + std::to_string(d.acceptance_rate));
  if (d.near_critical_events > 0)
    d.warnings.push_back("near-critical events: " + std::to_string(d.near_critical_events));

  std::size_t total = 0;
  for (const auto& pc : per_chain) total += pc.size();
  set.samples.reserve(total);
  for (auto& pc : per_chain)
    for (auto& s : pc) set.samples.push_back(std::move(s));
  return set;
}

std::vector<std::pair<std::size_t, std::size_t>> sample_blocks(const SampleSet& set, int min_blocks) {
  std::vector<std::pair<std::size_t, std::size_t>> chains;
  const auto& s = set.samples;
  std::size_t start = 0;
  for (std::size_t i = 1; i <= s.size(); ++i) {
    if (i == s.size() || s[i].chain != s[start].chain) {
      chains.emplace_back(start, i);
      start = i;
    }
  }
  if (chains.empty()) return {};
  const int per_chain = std::max(1, (min_blocks + static_cast<int>(chains.size()) - 1) / static_cast<int>(chains.size()));
  std::vector<std::pair<std::size_t, std::size_t>> blocks;
  for (auto [b, e] : chains) {
    const std::size_t len = e - b;
    for (int k = 0; k < per_chain; ++k) {
      const std::size_t lo = b + len * k / per_chain;
      const std::size_t hi = b + len * (k + 1) / per_chain;
      if (hi > lo) blocks.emplace_back(lo, hi);
    }
  }
  return blocks;
}

SurfaceAverage surface_average(const SampleSet& set, const SampleObservable& observable) {
  const auto blocks = sample_blocks(set, 20);
  if (blocks.size() < 2) throw ContractError("surface_average: not enough samples");
  std::vector<double> values(set.samples.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = observable(set.samples[i]);

  SurfaceAverage r;
  double total = 0.0;
  for (double v : values) total += v;
  const double n = static_cast<double>(values.size());
  r.mean = total / n;
  // Batch means with unequal batch lengths: weighted by length.
  double s2 = 0.0;
  for (auto [lo, hi] : blocks) {
    double bs = 0.0;
    for (std::size_t i = lo; i < hi; ++i) bs += values[i];
    const double len = static_cast<double>(hi - lo);
    const double dev = bs / len - r.mean;
    s2 += len * len * dev * dev;
  }
  const double nb = static_cast<double>(blocks.size());
  r.error = std::sqrt(s2 * nb / (nb - 1.0)) / n;

  double tau = 0.0;
  int chains = 0;
  std::size_t start = 0;
  for (std::size_t i = 1; i <= values.size(); ++i) {
    if (i == values.size() || set.samples[i].chain != set.samples[start].chain) {
      tau += integrated_autocorrelation_time(std::span<const double>(values).subspan(start, i - start));
      ++chains;
      start = i;
    }
  }
  tau /= std::max(chains, 1);
  r.effective_samples = n / std::max(tau, 1.0);
  r.low_confidence = r.effective_samples < 100.0;
  return r;
}

Extrapolated epsilon_extrapolate(const PotentialModel& model, const ShellSamplerConfig& cfg,
                                 const SampleObservable& observable) {
  ShellSamplerConfig coarse_cfg = cfg;
  coarse_cfg.epsilon = cfg.resolved_epsilon();
  ShellSamplerConfig fine_cfg = coarse_cfg;
  fine_cfg.epsilon = 0.5 * coarse_cfg.epsilon;
  fine_cfg.seed = splitmix64(cfg.seed ^ 0x5bd1e995ull);

  const SurfaceAverage a = surface_average(sample_level_set(model, coarse_cfg), observable);
  const SurfaceAverage b = surface_average(sample_level_set(model, fine_cfg), observable);
  Extrapolated r;
  r.coarse = a.mean;
  r.fine = b.mean;
  r.coarse_error = a.error;
  r.fine_error = b.error;
  const double combined = std::hypot(a.error, b.error);
  if (std::abs(a.mean - b.mean) > 5.0 * combined && combined > 0.0) {
    r.consistent = false;
    r.value = b.mean;
    r.warning = "epsilon pair inconsistent: difference " + std::to_string(a.mean - b.mean) +
                " exceeds 5 combined errors; returning the epsilon/2 estimate";
    return r;
  }
  r.value = (4.0 * b.mean - a.mean) / 3.0;
  return r;
}

void write_samples_csv(std::ostream& os, const SampleSet& set) {
  const int order = set.config.order;
  os << "chain_id,step,V,grad_norm,alpha";
  if (order >= 2) os << ",P";
  if (order >= 3) os << ",W";
  if (order >= 4) os << ",Q";
  os << '\n';
  os << std::setprecision(17);
  for (const auto& s : set.samples) {
    os << s.chain << ',' << s.step << ',' << s.energy << ',' << s.grad_norm << ',' << s.alpha;
    if (order >= 2) os << ',' << s.p;
    if (order >= 3) os << ',' << s.w;
    if (order >= 4) os << ',' << s.q;
    os << '\n';
  }
}

}  // namespace sigmav
