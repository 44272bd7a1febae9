#include "sigmav/config.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "sigmav/error.hpp"

namespace sigmav {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
T parse_number(const std::string& text, const std::string& name, int line) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty())
    throw ConfigError(line, name + ": cannot parse '" + text + "' as a number");
  return value;
}

bool parse_bool(const std::string& text, const std::string& name, int line) {
  if (text == "true" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "no" || text == "0") return false;
  throw ConfigError(line, name + ": expected true or false, got '" + text + "'");
}

template <class T>
std::string show(const T& v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}
std::string show(bool v) { return v ? "true" : "false"; }
std::string show(const std::string& v) { return v; }
template <class T>
std::string show(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + show(v[i]);
  return s;
}

struct Field {
  std::string key;
  std::function<void(const std::string&, int)> set;
  std::function<std::string()> get;
};

template <class T>
Field field(const std::string& section, const std::string& key, T& ref) {
  const std::string name = section + "." + key;
  Field f;
  f.key = key;
  f.get = [&ref] { return show(ref); };
  f.set = [&ref, name](const std::string& text, int line) {
    if constexpr (std::is_same_v<T, bool>) {
      ref = parse_bool(text, name, line);
    } else if constexpr (std::is_same_v<T, std::string>) {
      ref = text;
    } else if constexpr (std::is_same_v<T, std::vector<double>> || std::is_same_v<T, std::vector<int>>) {
      ref.clear();
      for (const auto& item : split_list(text)) ref.push_back(parse_number<typename T::value_type>(item, name, line));
    } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
      ref = split_list(text);
    } else {
      ref = parse_number<T>(text, name, line);
    }
  };
  return f;
}

std::vector<Field> bind(ModelBlock& b) {
  return {field("model", "kind", b.kind),     field("model", "dimension", b.dimension),
          field("model", "sites", b.sites),   field("model", "boundary", b.boundary),
          field("model", "lambda", b.lambda), field("model", "r", b.r),
          field("model", "u", b.u),           field("model", "slope", b.slope)};
}

std::vector<Field> bind(SamplerBlock& b) {
  return {field("sampler", "epsilon", b.epsilon),
          field("sampler", "step_sigma", b.step_sigma),
          field("sampler", "tangent_sigma", b.tangent_sigma),
          field("sampler", "manifold_fraction", b.manifold_fraction),
          field("sampler", "n_steps", b.n_steps),
          field("sampler", "burn_in", b.burn_in),
          field("sampler", "thinning", b.thinning),
          field("sampler", "n_chains", b.n_chains),
          field("sampler", "dump_samples", b.dump_samples)};
}

std::vector<Field> bind(WindowBlock& b) {
  return {field("window", "vbar_lo", b.vbar_lo), field("window", "vbar_hi", b.vbar_hi)};
}

std::vector<Field> bind(CriticalBlock& b) {
  return {field("critical", "random_seeds", b.random_seeds), field("critical", "structured_seeds", b.structured_seeds),
          field("critical", "seed_box", b.seed_box),         field("critical", "grad_tol", b.grad_tol),
          field("critical", "analytic_levels", b.analytic_levels),
          field("critical", "estimate_gradient_floor", b.estimate_gradient_floor)};
}

std::vector<Field> bind(EntropyBlock& b) {
  return {field("entropy", "vbar", b.vbar), field("entropy", "max_order", b.max_order)};
}

std::vector<Field> bind(GridBlock& b) {
  return {field("grid", "mode", b.mode),         field("grid", "points_per_axis", b.points_per_axis),
          field("grid", "samples", b.samples),   field("grid", "coord_lo", b.coord_lo),
          field("grid", "coord_hi", b.coord_hi), field("grid", "v_lo", b.v_lo),
          field("grid", "v_hi", b.v_hi),         field("grid", "bins", b.bins),
          field("grid", "step_bins", b.step_bins)};
}

std::vector<Field> bind(KhinchinBlock& b) {
  return {field("khinchin", "bases", b.bases),       field("khinchin", "ladder", b.ladder),
          field("khinchin", "trials", b.trials),     field("khinchin", "ratio_check", b.ratio_check),
          field("khinchin", "x_lo", b.x_lo),         field("khinchin", "x_hi", b.x_hi),
          field("khinchin", "y_lo", b.y_lo),         field("khinchin", "y_hi", b.y_hi),
          field("khinchin", "ratio_ladder", b.ratio_ladder)};
}

std::vector<Field> bind(LegendreBlock& b) {
  return {field("legendre", "source", b.source),     field("legendre", "n", b.n),
          field("legendre", "vbar_lo", b.vbar_lo),   field("legendre", "vbar_hi", b.vbar_hi),
          field("legendre", "points", b.points),     field("legendre", "beta_lo", b.beta_lo),
          field("legendre", "beta_hi", b.beta_hi),   field("legendre", "beta_points", b.beta_points),
          field("legendre", "refine", b.refine)};
}

std::vector<Field> bind_run(RunConfig& c, std::uint64_t& seed_slot) {
  return {field("run", "experiment", c.experiment), field("run", "seed", seed_slot),
          field("run", "output", c.output), field("run", "threads", c.threads)};
}

using LineMap = std::map<std::string, int>;

void fail(const LineMap* lines, const std::string& name, const std::string& message) {
  int line = 0;
  if (lines != nullptr) {
    const auto it = lines->find(name);
    if (it != lines->end()) line = it->second;
  }
  throw ConfigError(line, message);
}

template <class T>
void require(bool ok, const LineMap* lines, const std::string& name, const T& value, const std::string& constraint) {
  if (!ok) fail(lines, name, name + " = " + show(value) + " violates " + constraint);
}

void validate_impl(const RunConfig& c, bool require_seed, const LineMap* lines) {
  static const std::set<std::string> kinds{"critical-scan", "entropy-derivs", "khinchin", "oracle-compare",
                                           "legendre"};
  if (c.experiment.empty()) fail(lines, "run.experiment", "missing required key run.experiment");
  require(kinds.count(c.experiment) > 0, lines, "run.experiment", c.experiment,
          "experiment in {critical-scan, entropy-derivs, khinchin, oracle-compare, legendre}");
  if (require_seed && !c.seed) fail(lines, "run.seed", "missing required key run.seed (no wall-clock seeding)");
  require(c.threads >= 0, lines, "run.threads", c.threads, "threads >= 0");

  auto need = [&](bool present, const std::string& block) {
    if (!present) throw ConfigError(0, "experiment " + c.experiment + " requires a [" + block + "] section");
  };
  if (c.experiment == "critical-scan") {
    need(c.model.has_value(), "model");
    need(c.window.has_value(), "window");
    if (c.critical && c.critical->estimate_gradient_floor) need(c.sampler.has_value(), "sampler");
  } else if (c.experiment == "entropy-derivs") {
    need(c.model.has_value(), "model");
    need(c.sampler.has_value(), "sampler");
    need(c.entropy.has_value(), "entropy");
  } else if (c.experiment == "khinchin") {
    need(c.khinchin.has_value(), "khinchin");
  } else if (c.experiment == "oracle-compare") {
    need(c.model.has_value(), "model");
    need(c.grid.has_value(), "grid");
    need(c.sampler.has_value(), "sampler");
    need(c.entropy.has_value(), "entropy");
  } else if (c.experiment == "legendre") {
    need(c.legendre.has_value(), "legendre");
    if (c.legendre->source == "oracle") {
      need(c.model.has_value(), "model");
      need(c.grid.has_value(), "grid");
    }
  }

  if (const auto& m = c.model) {
    static const std::set<std::string> mk{"harmonic", "rotators", "fpu", "phi4", "linear"};
    require(mk.count(m->kind) > 0, lines, "model.kind", m->kind, "kind in {harmonic, rotators, fpu, phi4, linear}");
    require(m->dimension == 1 || m->dimension == 2, lines, "model.dimension", m->dimension, "dimension in {1, 2}");
    require(m->sites >= 1, lines, "model.sites", m->sites, "sites >= 1");
    require(m->boundary == "fixed" || m->boundary == "periodic", lines, "model.boundary", m->boundary,
            "boundary in {fixed, periodic}");
    require(m->lambda >= 0.0, lines, "model.lambda", m->lambda, "lambda >= 0");
    if (m->kind == "phi4") require(m->u > 0.0, lines, "model.u", m->u, "u > 0");
  }
  if (const auto& s = c.sampler) {
    require(s->epsilon >= 0.0, lines, "sampler.epsilon", s->epsilon, "epsilon > 0 (or 0 for the default width)");
    require(s->step_sigma >= 0.0, lines, "sampler.step_sigma", s->step_sigma, "step_sigma > 0 (or 0 for automatic)");
    require(s->tangent_sigma > 0.0, lines, "sampler.tangent_sigma", s->tangent_sigma, "tangent_sigma > 0");
    require(s->manifold_fraction >= 0.0 && s->manifold_fraction <= 1.0, lines, "sampler.manifold_fraction",
            s->manifold_fraction, "0 <= manifold_fraction <= 1");
    require(s->burn_in >= 0, lines, "sampler.burn_in", s->burn_in, "burn_in >= 0");
    require(s->n_steps > s->burn_in, lines, "sampler.n_steps", s->n_steps, "n_steps > burn_in");
    require(s->thinning >= 1, lines, "sampler.thinning", s->thinning, "thinning >= 1");
    require(s->n_chains >= 1, lines, "sampler.n_chains", s->n_chains, "n_chains >= 1");
  }
  if (const auto& w = c.window)
    require(w->vbar_hi > w->vbar_lo, lines, "window.vbar_hi", w->vbar_hi, "vbar_hi > vbar_lo");
  if (const auto& k = c.critical) {
    require(k->random_seeds >= 0, lines, "critical.random_seeds", k->random_seeds, "random_seeds >= 0");
    require(k->seed_box > 0.0, lines, "critical.seed_box", k->seed_box, "seed_box > 0");
    require(k->grad_tol > 0.0, lines, "critical.grad_tol", k->grad_tol, "grad_tol > 0");
  }
  if (const auto& e = c.entropy) {
    require(!e->vbar.empty(), lines, "entropy.vbar", e->vbar, "at least one vbar value");
    require(e->max_order >= 1 && e->max_order <= 4, lines, "entropy.max_order", e->max_order, "1 <= max_order <= 4");
  }
  if (const auto& g = c.grid) {
    require(g->mode == "grid" || g->mode == "hit-or-miss", lines, "grid.mode", g->mode, "mode in {grid, hit-or-miss}");
    require(g->points_per_axis >= 2, lines, "grid.points_per_axis", g->points_per_axis, "points_per_axis >= 2");
    require(g->bins >= 1, lines, "grid.bins", g->bins, "bins >= 1");
    require(g->v_hi > g->v_lo, lines, "grid.v_hi", g->v_hi, "v_hi > v_lo");
    require(g->step_bins >= 1, lines, "grid.step_bins", g->step_bins, "step_bins >= 1");
    require(g->samples >= 1, lines, "grid.samples", g->samples, "samples >= 1");
  }
  if (const auto& k = c.khinchin) {
    static const std::set<std::string> bases{"uniform", "gaussian", "exponential", "rademacher", "constant"};
    require(!k->bases.empty(), lines, "khinchin.bases", k->bases, "at least one base");
    for (const auto& b : k->bases)
      require(bases.count(b) > 0, lines, "khinchin.bases", b,
              "base in {uniform, gaussian, exponential, rademacher, constant}");
    require(!k->ladder.empty(), lines, "khinchin.ladder", k->ladder, "a non-empty N ladder");
    for (int n : k->ladder) require(n >= 1, lines, "khinchin.ladder", n, "N >= 1");
    for (int n : k->ratio_ladder) require(n >= 1, lines, "khinchin.ratio_ladder", n, "N >= 1");
    require(k->trials >= 10000, lines, "khinchin.trials", k->trials, "trials >= 10000");
    require(k->x_hi > k->x_lo, lines, "khinchin.x_hi", k->x_hi, "x_hi > x_lo");
    require(k->y_hi > k->y_lo && k->y_lo > 0.0, lines, "khinchin.y_lo", k->y_lo, "0 < y_lo < y_hi");
  }
  if (const auto& l = c.legendre) {
    require(l->source == "harmonic" || l->source == "oracle", lines, "legendre.source", l->source,
            "source in {harmonic, oracle}");
    require(l->n >= 1, lines, "legendre.n", l->n, "n >= 1");
    require(l->vbar_lo > 0.0, lines, "legendre.vbar_lo", l->vbar_lo, "vbar_lo > 0");
    require(l->vbar_hi > l->vbar_lo, lines, "legendre.vbar_hi", l->vbar_hi, "vbar_hi > vbar_lo");
    require(l->points >= 20, lines, "legendre.points", l->points, "points >= 20");
    require(l->beta_lo > 0.0, lines, "legendre.beta_lo", l->beta_lo, "beta_lo > 0");
    require(l->beta_hi >= l->beta_lo, lines, "legendre.beta_hi", l->beta_hi, "beta_hi >= beta_lo");
    require(l->beta_points >= 1, lines, "legendre.beta_points", l->beta_points, "beta_points >= 1");
  }
}

}  // namespace

void validate_config(const RunConfig& config, bool require_seed) { validate_impl(config, require_seed, nullptr); }

RunConfig parse_config(const std::string& text, bool require_seed) {
  RunConfig c;
  std::uint64_t seed = 0;
  bool seed_seen = false;
  std::vector<Field> fields;
  std::string section;
  std::set<std::string> seen_sections;
  std::set<std::string> seen_keys;
  LineMap lines;

  std::istringstream is(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    std::string line = raw;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(line_no, "malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      if (!seen_sections.insert(section).second) throw ConfigError(line_no, "duplicate section [" + section + "]");
      if (section == "run") fields = bind_run(c, seed);
      else if (section == "model") fields = bind(c.model.emplace());
      else if (section == "sampler") fields = bind(c.sampler.emplace());
      else if (section == "window") fields = bind(c.window.emplace());
      else if (section == "critical") fields = bind(c.critical.emplace());
      else if (section == "entropy") fields = bind(c.entropy.emplace());
      else if (section == "grid") fields = bind(c.grid.emplace());
      else if (section == "khinchin") fields = bind(c.khinchin.emplace());
      else if (section == "legendre") fields = bind(c.legendre.emplace());
      else throw ConfigError(line_no, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(line_no, "expected 'key = value', got '" + line + "'");
    if (section.empty()) throw ConfigError(line_no, "key outside of any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string name = section + "." + key;
    auto it = std::find_if(fields.begin(), fields.end(), [&](const Field& f) { return f.key == key; });
    if (it == fields.end()) throw ConfigError(line_no, "unknown key '" + key + "' in [" + section + "]");
    if (!seen_keys.insert(name).second) throw ConfigError(line_no, "duplicate key " + name);
    it->set(value, line_no);
    lines[name] = line_no;
    if (name == "run.seed") seed_seen = true;
  }
  if (seed_seen) c.seed = seed;
  validate_impl(c, require_seed, &lines);
  return c;
}

std::string emit_config(const RunConfig& config) {
  RunConfig c = config;
  std::ostringstream os;
  std::uint64_t seed = c.seed.value_or(0);
  auto write = [&os](const std::string& name, const std::vector<Field>& fields, const std::set<std::string>& skip) {
    os << '[' << name << "]\n";
    for (const auto& f : fields)
      if (!skip.count(f.key)) os << f.key << " = " << f.get() << '\n';
    os << '\n';
  };
  std::set<std::string> skip;
  if (!c.seed) skip.insert("seed");
  if (c.output.empty()) skip.insert("output");
  write("run", bind_run(c, seed), skip);
  if (c.model) write("model", bind(*c.model), {});
  if (c.sampler) write("sampler", bind(*c.sampler), {});
  if (c.window) write("window", bind(*c.window), {});
  if (c.critical) write("critical", bind(*c.critical), {});
  if (c.entropy) write("entropy", bind(*c.entropy), {});
  if (c.grid) write("grid", bind(*c.grid), {});
  if (c.khinchin) write("khinchin", bind(*c.khinchin), {});
  if (c.legendre) write("legendre", bind(*c.legendre), {});
  return os.str();
}

}  // namespace sigmav
