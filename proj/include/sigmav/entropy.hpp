#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "sigmav/model.hpp"
#include "sigmav/sampler.hpp"

namespace sigmav {

/// Brute-force density of states over the uniform configuration measure.
struct GridSpec {
  enum class Mode { Grid, HitOrMiss };
  Mode mode = Mode::Grid;
  /// Per-coordinate box; angular models default to (-pi, pi] when empty.
  double coord_lo = 0.0;
  double coord_hi = 0.0;
  int points_per_axis = 128;       ///< Grid mode (cell centres)
  std::int64_t samples = 10000000;  ///< HitOrMiss mode
  std::uint64_t seed = 1;
  double v_lo = 0.0;  ///< histogram range in v (extensive)
  double v_hi = 1.0;
  int bins = 100;
  int threads = 1;
};

struct DensityOfStatesTable {
  std::string model_id;
  std::size_t n = 0;
  double bin_width = 0.0;
  std::vector<double> edges;    ///< bins + 1 entries
  std::vector<double> centers;  ///< bins entries
  std::vector<double> counts;
  /// Omega per bin, normalized as (count / (total * width)) * box volume.
  std::vector<double> omega;
  std::vector<double> omega_error;  ///< Poisson
  /// M at each edge: volume of {V <= edge}.
  std::vector<double> m;
  double total_points = 0.0;
  double box_volume = 0.0;

  /// S_N(vbar) = log(Omega(N vbar)) / N at a bin centre index.
  double entropy_at(std::size_t bin) const;
};

/// Throws ContractError when N is too large for the chosen mode (grid N <= 4,
/// hit-or-miss N <= 8 with >= 1e7 points) or when the coordinate box cuts
/// off more than 0.1% of the sublevel mass below v_hi.
DensityOfStatesTable oracle_density_of_states(const PotentialModel& model, const GridSpec& spec);

struct StencilDerivative {
  double value = 0.0;
  double error = 0.0;     ///< propagated Poisson noise
  double amplification = 0.0;  ///< sqrt(sum c_i^2) / h^k
};

/// k-th derivative of S_N with respect to vbar from the table by central
/// stencils of step step_bins bins (3-point for k = 1, 2; 5-point for k = 3;
/// 7-point for k = 4), linearly interpolated between bracketing centres.
StencilDerivative oracle_derivative(const DensityOfStatesTable& table, double vbar, int k, int step_bins = 2);

struct DerivativeEstimate {
  int order = 1;
  double value = 0.0;
  double error = 0.0;
  std::map<std::string, double> terms;
  std::size_t n = 0;
  double vbar = 0.0;
  double epsilon = 0.0;
  std::size_t samples = 0;
  bool flagged = false;
  std::vector<std::string> flags;
};

/// Order-k combination of level-set moments of alpha and its flow
/// derivatives, with a delete-one-block jackknife error. The set must have
/// been sampled with order >= k.
DerivativeEstimate derivative_from_samples(const SampleSet& set, int k);

/// Samples the level set at v = N vbar and returns the order-k estimate.
DerivativeEstimate entropy_derivative(const PotentialModel& model, double vbar, int k, ShellSamplerConfig cfg);

/// Recomputes an estimate's value from its own term breakdown.
double recombine(const DerivativeEstimate& e);

struct BetaEstimate {
  double value = 0.0;
  double error = 0.0;
  /// Surface method: the (1/N) log beta term separating dS/dvbar from Omega/M.
  double correction = 0.0;
  std::string method;
};

/// Omega(N vbar) / M(N vbar) from an oracle table. Throws when M = 0.
BetaEstimate beta_oracle(const DensityOfStatesTable& table, double vbar);
/// <alpha> on the level set; throws when vbar is below the ground state.
BetaEstimate beta_surface(const PotentialModel& model, double vbar, ShellSamplerConfig cfg);

struct LegendreTable {
  std::vector<double> beta;
  std::vector<double> f;
  std::vector<double> vbar_at;  ///< maximizer of S - beta vbar
  bool nonconcave = false;
};

/// f(beta) = sup_vbar [S(vbar) - beta vbar] over a monotone grid of at least
/// 20 points. An empty beta list selects the chord slopes of the concave
/// hull of S. With refine,
/// interior maxima are refined by a 3-point parabola.
LegendreTable legendre(const std::vector<double>& vbar, const std::vector<double>& s,
                       const std::vector<double>& beta = {}, bool refine = true);

/// S**(vbar) = inf_beta [f(beta) + beta vbar] on the given vbar points.
std::vector<double> inverse_legendre(const LegendreTable& table, const std::vector<double>& vbar);

/// Upper concave envelope of (vbar, s) evaluated on the same grid.
std::vector<double> concave_hull(const std::vector<double>& vbar, const std::vector<double>& s);

/// F(beta) = -(2 beta)^-1 log(pi / beta) - f / beta; throws for beta <= 0.
double helmholtz(double f, double beta);
std::vector<double> helmholtz(const std::vector<double>& f, const std::vector<double>& beta);

/// Closed forms for V = |q|^2 / 2.
namespace harmonic {
/// log of the volume of the unit ball in R^n.
double log_unit_ball(int n);
/// S^(-)_N(vbar) = (1/N) log M(N vbar), M(v) = C_N (2v)^{N/2}.
double sublevel_entropy(int n, double vbar);
/// Exact finite-N conjugate of sublevel_entropy.
double free_entropy(int n, double beta);
}  // namespace harmonic

/// Empirical versions of the bound constants:
/// m1 = max_i <|d_ii V|>, m2 = max_ij <|d_i V d_ij V d_j V|>,
/// c1 = min_i <(d_i V)^2>, c2 = min_ij <(d_i V)^2 (d_j V)^2>.
struct BoundConstants {
  double m1 = 0.0, m2 = 0.0, c1 = 0.0, c2 = 0.0;
  int max_neighbors = 0;
};
/// Needs samples drawn with keep_configurations.
BoundConstants bound_constants(const PotentialModel& model, const SampleSet& set, std::size_t max_samples = 5000);

struct ThermoRow {
  double vbar;
  double s;
  double ds[4];
  double err[4];
};
/// vbar,S,dS1..dS4,stderr1..stderr4; unavailable entries are written as nan.
void write_thermo_csv(std::ostream& os, const std::vector<ThermoRow>& rows);

}  // namespace sigmav
