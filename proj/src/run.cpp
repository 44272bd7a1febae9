#include "sigmav/run.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "sigmav/critical.hpp"
#include "sigmav/entropy.hpp"
#include "sigmav/error.hpp"
#include "sigmav/moments.hpp"
#include "sigmav/parallel.hpp"
#include "sigmav/sampler.hpp"

namespace sigmav {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// NaN and infinities are not JSON numbers.
json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::uint64_t substream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(tag * 0x9E3779B97F4A7C15ull + index + 1));
}

ShellSamplerConfig sampler_from_block(const SamplerBlock& b, std::uint64_t seed, int threads) {
  ShellSamplerConfig cfg;
  cfg.epsilon = b.epsilon;
  cfg.step_sigma = b.step_sigma;
  cfg.tangent_sigma = b.tangent_sigma;
  cfg.manifold_fraction = b.manifold_fraction;
  cfg.n_steps = b.n_steps;
  cfg.burn_in = b.burn_in;
  cfg.thinning = b.thinning;
  cfg.n_chains = b.n_chains;
  cfg.seed = seed;
  cfg.threads = threads;
  return cfg;
}

GridSpec grid_from_block(const GridBlock& b, std::uint64_t seed, int threads) {
  GridSpec g;
  g.mode = b.mode == "hit-or-miss" ? GridSpec::Mode::HitOrMiss : GridSpec::Mode::Grid;
  g.coord_lo = b.coord_lo;
  g.coord_hi = b.coord_hi;
  g.points_per_axis = b.points_per_axis;
  g.samples = b.samples;
  g.seed = seed;
  g.v_lo = b.v_lo;
  g.v_hi = b.v_hi;
  g.bins = b.bins;
  g.threads = threads;
  return g;
}

/// Collects what one experiment produced.
struct Context {
  const RunConfig& config;
  fs::path dir;
  std::uint64_t seed;
  int threads;
  RunOutcome outcome;
  json summary = json::object();
  json tolerances = json::object();

  std::ofstream open(const std::string& name) {
    std::ofstream os(dir / name, std::ios::binary);
    if (!os) throw Error("cannot open " + (dir / name).string() + " for writing");
    outcome.files.push_back(name);
    return os;
  }
  void warn(const std::string& w) { outcome.warnings.push_back(w); }
  void flag(const std::string& w) {
    warn(w);
    outcome.exit_code = 2;
  }
};

void sampler_warnings(Context& ctx, const SampleSet& set, const std::string& where) {
  for (const auto& w : set.diagnostics.warnings) ctx.warn(where + ": " + w);
}

json diagnostics_json(const ChainDiagnostics& d) {
  return {{"acceptance_rate", num(d.acceptance_rate)},
          {"isotropic_acceptance", num(d.isotropic_acceptance)},
          {"manifold_acceptance", num(d.manifold_acceptance)},
          {"tau_alpha", num(d.tau_alpha)},
          {"tau_energy", num(d.tau_energy)},
          {"rhat_alpha", num(d.rhat_alpha)},
          {"rhat_energy", num(d.rhat_energy)},
          {"near_critical_events", d.near_critical_events},
          {"min_grad_norm", num(d.min_grad_norm)},
          {"final_step_sigma", num(d.final_step_sigma)},
          {"final_tangent_sigma", num(d.final_tangent_sigma)}};
}

json estimate_json(const DerivativeEstimate& e) {
  json terms = json::object();
  for (const auto& [k, v] : e.terms) terms[k] = num(v);
  return {{"order", e.order}, {"value", num(e.value)}, {"stderr", num(e.error)}, {"terms", terms},
          {"flagged", e.flagged}, {"flags", e.flags}};
}

void run_critical_scan(Context& ctx) {
  const RunConfig& c = ctx.config;
  const PotentialModel model = model_from_block(*c.model);
  const CriticalBlock cb = c.critical.value_or(CriticalBlock{});
  const WindowBlock& w = *c.window;

  CriticalSearchOptions opts;
  opts.vbar_hi = w.vbar_hi;
  opts.random_seeds = cb.random_seeds;
  opts.structured_seeds = cb.structured_seeds;
  opts.seed = substream(ctx.seed, 1, 0);
  opts.seed_box = cb.seed_box;
  opts.grad_tol = cb.grad_tol;
  opts.threads = ctx.threads;
  const CriticalSearchResult found = find_critical_points(model, opts);

  std::vector<CriticalLevel> levels = levels_from_points(found.points);
  std::string caveat =
      "critical values come from a finite multistart search; values missed by every seed are not excluded";
  const bool analytic = cb.analytic_levels && model.kind() == ModelKind::CoupledRotators &&
                        model.topology().dimension() == 1 && model.topology().boundary() == Boundary::Fixed;
  if (cb.analytic_levels && !analytic) ctx.warn("analytic_levels only applies to the fixed-end rotator chain");
  if (analytic) {
    levels = rotator_chain_critical_levels(static_cast<int>(model.size()));
    caveat = "critical values from the exact enumeration of the fixed-end rotator chain";
  }

  std::optional<ShellSamplerConfig> scfg;
  if (cb.estimate_gradient_floor) scfg = sampler_from_block(*c.sampler, substream(ctx.seed, 2, 0), ctx.threads);
  TopologyReport report = certify_window(model, w.vbar_lo, w.vbar_hi, levels, scfg ? &*scfg : nullptr, caveat);
  report.points = found.points;

  ctx.open("critical_points.json") << topology_report_json(report) << '\n';

  for (std::size_t i = 0; i < report.degenerate_values.size(); ++i)
    if (report.degenerate_values[i])
      ctx.flag("degenerate critical value at vbar = " + std::to_string(report.critical_vbars[i]));
  for (const auto& p : found.points)
    if (p.degenerate) ctx.flag("degenerate critical point at v = " + std::to_string(p.v));
  if (found.unknown_family) ctx.flag("critical point outside the {0, pi} difference family");
  if (found.failed > 0) ctx.warn(std::to_string(found.failed) + " seeds stalled away from a critical point");
  for (const auto& n : found.notes) ctx.warn(n);

  ctx.summary = {{"points", found.points.size()},
                 {"structured_seeds", found.structured_seeds},
                 {"random_seeds", found.random_seeds},
                 {"converged", found.converged},
                 {"failed", found.failed},
                 {"unknown_family", found.unknown_family},
                 {"analytic_levels", analytic}};
  ctx.tolerances = {{"grad_tol", opts.grad_tol},
                    {"dedup_tol", 1e-5 * std::sqrt(static_cast<double>(model.size()))},
                    {"degeneracy_rel", opts.degeneracy_rel}};
}

void run_entropy_derivs(Context& ctx) {
  const RunConfig& c = ctx.config;
  const PotentialModel model = model_from_block(*c.model);
  const EntropyBlock& e = *c.entropy;
  const double n = static_cast<double>(model.size());

  std::vector<ThermoRow> rows;
  json points = json::array();
  for (std::size_t i = 0; i < e.vbar.size(); ++i) {
    const double vbar = e.vbar[i];
    ShellSamplerConfig cfg = sampler_from_block(*c.sampler, substream(ctx.seed, 3, i), ctx.threads);
    cfg.v = n * vbar;
    cfg.order = e.max_order;
    const SampleSet set = sample_level_set(model, cfg);
    sampler_warnings(ctx, set, "vbar " + std::to_string(vbar));

    ThermoRow row{vbar, std::numeric_limits<double>::quiet_NaN(), {}, {}};
    json ests = json::array();
    for (int k = 1; k <= 4; ++k) {
      row.ds[k - 1] = row.err[k - 1] = std::numeric_limits<double>::quiet_NaN();
      if (k > e.max_order) continue;
      const DerivativeEstimate est = derivative_from_samples(set, k);
      row.ds[k - 1] = est.value;
      row.err[k - 1] = est.error;
      ests.push_back(estimate_json(est));
      if (est.flagged)
        for (const auto& f : est.flags) ctx.flag("vbar " + std::to_string(vbar) + " k=" + std::to_string(k) + ": " + f);
    }
    rows.push_back(row);
    points.push_back({{"vbar", vbar},
                      {"v", cfg.v},
                      {"epsilon", cfg.resolved_epsilon()},
                      {"seed", cfg.seed},
                      {"samples", set.samples.size()},
                      {"diagnostics", diagnostics_json(set.diagnostics)},
                      {"estimates", ests}});
    if (c.sampler->dump_samples) {
      std::ostringstream name;
      name << "samples_" << i << ".csv";
      auto os = ctx.open(name.str());
      write_samples_csv(os, set);
    }
  }
  {
    auto os = ctx.open("entropy_derivs.csv");
    write_thermo_csv(os, rows);
  }
  ctx.open("derivatives.json") << json{{"model", model.describe()}, {"n", model.size()}, {"points", points}}.dump(2)
                               << '\n';
  ctx.summary = {{"vbar_points", e.vbar.size()}, {"max_order", e.max_order}};
  ctx.tolerances = {{"grad_floor", GeometryOptions{}.grad_floor}, {"fd_rel_step", GeometryOptions{}.rel_step}};
}

void run_khinchin(Context& ctx) {
  const KhinchinBlock& k = *ctx.config.khinchin;
  json fits = json::object();
  for (std::size_t i = 0; i < k.bases.size(); ++i) {
    const BaseSpec base = BaseSpec::parse(k.bases[i]);
    const MomentReport rep = sum_function_moments(base, k.ladder, k.trials, substream(ctx.seed, 4, i), ctx.threads);
    auto os = ctx.open("moments_" + base.name() + ".csv");
    write_moment_csv(os, rep);
    json f = {{"kappa2", base.variance()}, {"kappa4", base.kappa4()}};
    if (k.ladder.size() >= 2 && base.kind != BaseKind::Constant) {
      f["b_exponent"] = num(rep.b_fit.slope);
      f["b_exponent_ci"] = {num(rep.b_fit.ci_low), num(rep.b_fit.ci_high)};
      f["k_exponent"] = num(rep.k_fit.slope);
      f["k_exponent_ci"] = {num(rep.k_fit.ci_low), num(rep.k_fit.ci_high)};
    }
    fits[base.name()] = f;
  }
  json ratio = nullptr;
  if (k.ratio_check) {
    const RatioReport rr = ratio_average_check(BaseSpec::uniform(k.x_lo, k.x_hi), BaseSpec::uniform(k.y_lo, k.y_hi),
                                               k.ratio_ladder, k.trials, substream(ctx.seed, 5, 0), ctx.threads);
    auto os = ctx.open("ratio.csv");
    os << "N,gap,gap_err,mean_ratio,ratio_of_means\n" << std::setprecision(12);
    for (const auto& r : rr.rows)
      os << r.n << ',' << r.gap << ',' << r.error << ',' << r.mean_ratio << ',' << r.ratio_of_means << '\n';
    if (rr.fitted) ratio = {{"gap_exponent", num(rr.fit.slope)}, {"ci", {num(rr.fit.ci_low), num(rr.fit.ci_high)}}};
  }
  ctx.open("khinchin.json") << json{{"trials", k.trials}, {"bases", fits}, {"ratio", ratio}}.dump(2) << '\n';
  ctx.summary = {{"bases", k.bases}, {"ladder", k.ladder}};
  ctx.tolerances = {{"jackknife_blocks", 20}, {"fit_interval", "95% Student t"}};
}

void run_oracle_compare(Context& ctx) {
  const RunConfig& c = ctx.config;
  const PotentialModel model = model_from_block(*c.model);
  const EntropyBlock& e = *c.entropy;
  const GridBlock& gb = *c.grid;
  const double n = static_cast<double>(model.size());

  const DensityOfStatesTable table = oracle_density_of_states(model, grid_from_block(gb, substream(ctx.seed, 6, 0),
                                                                                     ctx.threads));
  {
    auto os = ctx.open("dos.csv");
    os << "v_center,count,omega,omega_err,M_upper,S\n" << std::setprecision(12);
    for (std::size_t b = 0; b < table.centers.size(); ++b)
      os << table.centers[b] << ',' << table.counts[b] << ',' << table.omega[b] << ',' << table.omega_error[b] << ','
         << table.m[b + 1] << ',' << table.entropy_at(b) << '\n';
  }

  auto os = ctx.open("compare.csv");
  os << "vbar,k,surface,surface_err,oracle,oracle_err,z\n" << std::setprecision(12);
  for (std::size_t i = 0; i < e.vbar.size(); ++i) {
    const double vbar = e.vbar[i];
    ShellSamplerConfig cfg = sampler_from_block(*c.sampler, substream(ctx.seed, 7, i), ctx.threads);
    cfg.v = n * vbar;
    cfg.order = e.max_order;
    const SampleSet set = sample_level_set(model, cfg);
    sampler_warnings(ctx, set, "vbar " + std::to_string(vbar));
    for (int k = 1; k <= e.max_order; ++k) {
      const DerivativeEstimate est = derivative_from_samples(set, k);
      const StencilDerivative orc = oracle_derivative(table, vbar, k, gb.step_bins);
      const double z = (est.value - orc.value) / std::hypot(est.error, orc.error);
      os << vbar << ',' << k << ',' << est.value << ',' << est.error << ',' << orc.value << ',' << orc.error << ','
         << z << '\n';
      const double limit = k <= 2 ? 3.0 : 5.0;
      if (!(std::abs(z) <= limit))
        ctx.flag("vbar " + std::to_string(vbar) + " k=" + std::to_string(k) + ": surface and oracle differ by " +
                 std::to_string(z) + " combined errors");
    }
  }
  ctx.summary = {{"oracle_points", table.total_points}, {"box_volume", table.box_volume}};
  ctx.tolerances = {{"combined_errors_k12", 3.0}, {"combined_errors_k34", 5.0}, {"step_bins", gb.step_bins}};
}

void run_legendre(Context& ctx) {
  const RunConfig& c = ctx.config;
  const LegendreBlock& l = *c.legendre;
  std::vector<double> vbar, s;
  int n = l.n;
  if (l.source == "harmonic") {
    for (int i = 0; i < l.points; ++i) {
      const double x = l.vbar_lo + (l.vbar_hi - l.vbar_lo) * i / (l.points - 1);
      vbar.push_back(x);
      s.push_back(harmonic::sublevel_entropy(n, x));
    }
  } else {
    const PotentialModel model = model_from_block(*c.model);
    n = static_cast<int>(model.size());
    const DensityOfStatesTable table =
        oracle_density_of_states(model, grid_from_block(*c.grid, substream(ctx.seed, 8, 0), ctx.threads));
    for (std::size_t b = 1; b < table.edges.size(); ++b) {
      const double x = table.edges[b] / n;
      if (table.m[b] > 0.0 && x >= l.vbar_lo && x <= l.vbar_hi) {
        vbar.push_back(x);
        s.push_back(std::log(table.m[b]) / n);
      }
    }
    if (vbar.size() < 20) throw ContractError("legendre: fewer than 20 oracle points inside the vbar range");
  }

  std::vector<double> beta;
  for (int i = 0; i < l.beta_points; ++i)
    beta.push_back(l.beta_points == 1 ? l.beta_lo : l.beta_lo + (l.beta_hi - l.beta_lo) * i / (l.beta_points - 1));
  const LegendreTable table = legendre(vbar, s, beta, l.refine);
  const std::vector<double> big_f = helmholtz(table.f, table.beta);

  {
    auto os = ctx.open("legendre.csv");
    os << "beta,f,vbar_star,F";
    if (l.source == "harmonic") os << ",f_exact,f_limit";
    os << '\n' << std::setprecision(15);
    for (std::size_t i = 0; i < table.beta.size(); ++i) {
      os << table.beta[i] << ',' << table.f[i] << ',' << table.vbar_at[i] << ',' << big_f[i];
      if (l.source == "harmonic")
        os << ',' << harmonic::free_entropy(n, table.beta[i]) << ',' << 0.5 * std::log(2.0 * M_PI / table.beta[i]);
      os << '\n';
    }
  }

  // Double conjugation on the chord slopes returns the concave hull.
  const LegendreTable chords = legendre(vbar, s, {}, false);
  const std::vector<double> back = inverse_legendre(chords, vbar);
  const std::vector<double> hull = concave_hull(vbar, s);
  double dd = 0.0;
  for (std::size_t i = 0; i < vbar.size(); ++i) dd = std::max(dd, std::abs(back[i] - hull[i]));
  if (table.nonconcave) ctx.warn("input entropy is not concave; the transform returns its concave hull");

  json summary = {{"source", l.source}, {"n", n}, {"points", vbar.size()}, {"double_conjugation_max_error", num(dd)},
                  {"nonconcave", table.nonconcave}};
  if (l.source == "harmonic") {
    double worst_exact = 0.0, worst_limit = 0.0;
    for (std::size_t i = 0; i < table.beta.size(); ++i) {
      worst_exact = std::max(worst_exact, std::abs(table.f[i] - harmonic::free_entropy(n, table.beta[i])));
      worst_limit = std::max(worst_limit, std::abs(table.f[i] - 0.5 * std::log(2.0 * M_PI / table.beta[i])));
    }
    summary["max_error_vs_exact"] = num(worst_exact);
    summary["max_error_vs_limit"] = num(worst_limit);
  }
  ctx.open("legendre.json") << summary.dump(2) << '\n';
  ctx.summary = summary;
  ctx.tolerances = {{"min_points", 20}, {"refine", l.refine}};
}

}  // namespace

PotentialModel model_from_block(const ModelBlock& b) {
  LatticeTopology topo(b.dimension, b.sites, b.boundary == "periodic" ? Boundary::Periodic : Boundary::Fixed);
  PotentialModel::Params p;
  p.lambda = b.lambda;
  p.r = b.r;
  p.u = b.u;
  p.slope = b.slope;
  return PotentialModel::make(model_kind_from_string(b.kind), std::move(topo), p);
}

std::string content_hash(const std::string& text) {
  const std::string blob = "blob " + std::to_string(text.size()) + '\0' + text;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(blob.data(), blob.size(), digest, &len, EVP_sha1(), nullptr) != 1)
    throw Error("SHA-1 digest failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

RunOutcome run_experiment(const RunConfig& config, const std::string& out_dir, const std::string& config_text) {
  const std::string started = utc_now();
  const std::string echo = emit_config(config);
  const std::string hashed = config_text.empty() ? echo : config_text;
  fs::path dir = out_dir.empty() ? fs::path(config.output.empty() ? "." : config.output) : fs::path(out_dir);
  fs::create_directories(dir);

  Context ctx{config, dir, config.seed.value_or(0), resolve_threads(config.threads), {}};
  try {
    validate_config(config);
    if (config.experiment == "critical-scan") run_critical_scan(ctx);
    else if (config.experiment == "entropy-derivs") run_entropy_derivs(ctx);
    else if (config.experiment == "khinchin") run_khinchin(ctx);
    else if (config.experiment == "oracle-compare") run_oracle_compare(ctx);
    else if (config.experiment == "legendre") run_legendre(ctx);
  } catch (const std::exception& ex) {
    ctx.outcome.exit_code = 1;
    ctx.outcome.error = ex.what();
  }

  json manifest = {{"version", kVersion},
                   {"experiment", config.experiment},
                   {"seed", ctx.seed},
                   {"threads", ctx.threads},
                   {"config", echo},
                   {"config_hash", content_hash(hashed)},
                   {"started", started},
                   {"finished", utc_now()},
                   {"exit_code", ctx.outcome.exit_code},
                   {"error", ctx.outcome.error.empty() ? json(nullptr) : json(ctx.outcome.error)},
                   {"warnings", ctx.outcome.warnings},
                   {"tolerances", ctx.tolerances},
                   {"summary", ctx.summary},
                   {"files", ctx.outcome.files}};
  std::ofstream os(dir / "manifest.json", std::ios::binary);
  os << manifest.dump(2) << '\n';
  if (!os) {
    ctx.outcome.exit_code = 1;
    ctx.outcome.error = "cannot write manifest.json";
  }
  return ctx.outcome;
}

}  // namespace sigmav
