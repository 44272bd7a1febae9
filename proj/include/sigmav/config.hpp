#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sigmav {

struct ModelBlock {
  std::string kind = "harmonic";
  int dimension = 1;
  int sites = 4;
  std::string boundary = "fixed";
  double lambda = 0.1;
  double r = 1.0;
  double u = 1.0;
  double slope = 1.0;
  bool operator==(const ModelBlock&) const = default;
};

struct SamplerBlock {
  double epsilon = 0.0;  ///< 0 selects 1e-3 max(|v|, 1)
  double step_sigma = 0.0;
  double tangent_sigma = 0.3;
  double manifold_fraction = 0.5;
  std::int64_t n_steps = 200000;
  std::int64_t burn_in = 20000;
  int thinning = 1;
  int n_chains = 8;
  bool dump_samples = false;
  bool operator==(const SamplerBlock&) const = default;
};

struct WindowBlock {
  double vbar_lo = 0.0;
  double vbar_hi = 1.0;
  bool operator==(const WindowBlock&) const = default;
};

struct CriticalBlock {
  std::int64_t random_seeds = 10000;
  bool structured_seeds = true;
  double seed_box = 2.0;
  double grad_tol = 1e-9;
  /// Also certify with the exact level set of the fixed-end rotator chain.
  bool analytic_levels = false;
  /// Sample shells inside each subinterval for C_est (needs [sampler]).
  bool estimate_gradient_floor = false;
  bool operator==(const CriticalBlock&) const = default;
};

struct EntropyBlock {
  std::vector<double> vbar{0.5};
  int max_order = 2;
  bool operator==(const EntropyBlock&) const = default;
};

struct GridBlock {
  std::string mode = "grid";  ///< grid | hit-or-miss
  int points_per_axis = 128;
  std::int64_t samples = 10000000;
  double coord_lo = 0.0;
  double coord_hi = 0.0;
  double v_lo = 0.0;
  double v_hi = 1.0;
  int bins = 100;
  int step_bins = 2;
  bool operator==(const GridBlock&) const = default;
};

struct KhinchinBlock {
  std::vector<std::string> bases{"uniform"};
  std::vector<int> ladder{16, 32, 64, 128, 256, 512, 1024, 2048, 4096};
  std::int64_t trials = 100000;
  bool ratio_check = true;
  double x_lo = 0.0, x_hi = 1.0;
  double y_lo = 1.0, y_hi = 2.0;
  std::vector<int> ratio_ladder{16, 32, 64, 128, 256, 512, 1024};
  bool operator==(const KhinchinBlock&) const = default;
};

struct LegendreBlock {
  std::string source = "harmonic";  ///< harmonic | oracle
  int n = 20000;                    ///< system size for the harmonic source
  double vbar_lo = 0.1;
  double vbar_hi = 2.0;
  int points = 400;
  double beta_lo = 0.5;
  double beta_hi = 2.0;
  int beta_points = 16;
  bool refine = true;
  bool operator==(const LegendreBlock&) const = default;
};

struct RunConfig {
  std::string experiment;  ///< critical-scan | entropy-derivs | khinchin | oracle-compare | legendre
  std::optional<std::uint64_t> seed;
  std::string output;
  int threads = 1;
  std::optional<ModelBlock> model;
  std::optional<SamplerBlock> sampler;
  std::optional<WindowBlock> window;
  std::optional<CriticalBlock> critical;
  std::optional<EntropyBlock> entropy;
  std::optional<GridBlock> grid;
  std::optional<KhinchinBlock> khinchin;
  std::optional<LegendreBlock> legendre;
  bool operator==(const RunConfig&) const = default;
};

/// Parses "[section]" headers and "key = value" lines ('#' and ';' start
/// comments). Unknown sections or keys, malformed values, failed constraints
/// and missing blocks throw ConfigError carrying the line number (0 when the
/// problem is not tied to a line). With require_seed false a missing seed is
/// accepted so that it can be supplied later.
RunConfig parse_config(const std::string& text, bool require_seed = true);

/// Canonical text form; parse_config(emit_config(c)) == c.
std::string emit_config(const RunConfig& config);

/// Checks cross-field constraints and required blocks.
void validate_config(const RunConfig& config, bool require_seed = true);

}  // namespace sigmav
