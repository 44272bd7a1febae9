#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sigmav/model.hpp"
#include "sigmav/sampler.hpp"

namespace sigmav {

struct CriticalPoint {
  std::vector<double> q;
  double v = 0.0;
  double vbar = 0.0;
  int index = 0;  ///< Morse index
  std::vector<double> spectrum;
  double min_abs_eigenvalue = 0.0;
  bool degenerate = false;
  int multiplicity = 1;
  double grad_norm = 0.0;
};

struct CriticalSearchOptions {
  double vbar_lo = -std::numeric_limits<double>::infinity();
  double vbar_hi = std::numeric_limits<double>::infinity();
  std::int64_t random_seeds = 10000;
  /// Rotators: every configuration with coordinates in {0, pi} (N <= 12).
  bool structured_seeds = true;
  std::uint64_t seed = 1;
  /// Half-width of the box random seeds are drawn from (non-angular models).
  double seed_box = 2.0;
  double grad_tol = 1e-9;
  int max_iter = 300;
  double dedup_tol = 0.0;       ///< <= 0 selects 1e-5 sqrt(N)
  double degeneracy_rel = 1e-8;  ///< relative to the spectral radius
  int threads = 1;
};

struct CriticalSearchResult {
  std::vector<CriticalPoint> points;  ///< sorted by (v, q)
  std::int64_t structured_seeds = 0;
  std::int64_t random_seeds = 0;
  std::int64_t converged = 0;
  std::int64_t failed = 0;  ///< seeds whose descent stalled away from a critical point
  /// Rotators only: a point whose bond differences are not all in {0, pi}.
  bool unknown_family = false;
  std::vector<std::string> notes;
};

/// Damped Newton descent on |grad V|^2 from structured and random seeds,
/// followed by deduplication. Periodic rotators are searched with q_0 = 0.
CriticalSearchResult find_critical_points(const PotentialModel& model, const CriticalSearchOptions& opts = {});

/// Polishes one start point; returns nullopt if |grad V| does not reach grad_tol.
std::optional<std::vector<double>> polish_critical_point(const PotentialModel& model, std::vector<double> q,
                                                         const CriticalSearchOptions& opts = {});

struct MorseData {
  int index = 0;
  std::vector<double> spectrum;  ///< ascending
  double min_abs_eigenvalue = 0.0;
  bool degenerate = false;
};

/// Hessian eigen-decomposition at q (reduced by q_0 for periodic rotators).
/// Eigenvalues below max(degeneracy_rel * spectral radius, abs_floor) count
/// as zero.
MorseData morse_index(const PotentialModel& model, const std::vector<double>& q, double degeneracy_rel = 1e-8,
                      double abs_floor = 0.0);

/// One critical value with its Morse index and how many points share it.
struct CriticalLevel {
  double v = 0.0;
  int index = 0;
  double multiplicity = 1.0;
  bool degenerate = false;
  std::string family;
};

std::vector<CriticalLevel> levels_from_points(const std::vector<CriticalPoint>& points);

/// Exact critical set of the fixed-end rotator chain with n sites: all bonds
/// share sin d_b, so d_b is theta or pi - theta. Families with equally many
/// of both kinds (even count) form degenerate continua at v = n + 1.
std::vector<CriticalLevel> rotator_chain_critical_levels(int n);

/// Sum of (-1)^index * multiplicity over levels with v <= v_limit. Throws
/// ContractError naming the offending level if a degenerate one is included.
long long euler_characteristic(const std::vector<CriticalLevel>& levels, double v_limit);
long long euler_characteristic(const std::vector<CriticalPoint>& points, double v_limit);

struct Subinterval {
  double lo = 0.0;  ///< vbar
  double hi = 0.0;
  bool certified = false;
  std::optional<long long> euler;  ///< chi(M_v) inside; empty when a degenerate level lies below
  double c_est = std::numeric_limits<double>::quiet_NaN();  ///< min sampled |grad V|
  std::int64_t near_critical_events = 0;
};

struct TopologyReport {
  double vbar_lo = 0.0;
  double vbar_hi = 0.0;
  std::vector<double> critical_vbars;          ///< distinct, strictly inside the window
  std::vector<std::vector<double>> index_counts;  ///< per value: index -> multiplicity
  std::vector<bool> degenerate_values;
  std::vector<Subinterval> subintervals;
  std::string caveat;
  std::vector<CriticalPoint> points;  ///< for serialization, may be empty
};

/// Splits the window at the critical values inside it. With a sampler
/// configuration, each subinterval gets C_est from shells at 5 interior
/// vbar values (the configuration's v is overwritten).
TopologyReport certify_window(const PotentialModel& model, double vbar_lo, double vbar_hi,
                              const std::vector<CriticalLevel>& levels, const ShellSamplerConfig* sampler = nullptr,
                              const std::string& caveat = {});

/// JSON text of a report; coordinates are rounded to 1e-10.
std::string topology_report_json(const TopologyReport& report);

}  // namespace sigmav
