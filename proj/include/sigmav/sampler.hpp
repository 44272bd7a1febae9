#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "sigmav/geometry.hpp"
#include "sigmav/model.hpp"

namespace sigmav {

struct ShellSamplerConfig {
  double v = 0.0;              ///< target potential energy (extensive)
  double epsilon = 0.0;        ///< shell half-width; <= 0 selects 1e-3 * max(|v|, 1)
  double step_sigma = 0.1;     ///< initial isotropic proposal scale per coordinate
  double tangent_sigma = 0.3;  ///< initial scale of level-preserving moves
  /// Probability of attempting a level-preserving move instead of an
  /// isotropic one. 0 gives the plain isotropic walk.
  double manifold_fraction = 0.5;
  std::int64_t n_steps = 20000;  ///< per chain, burn-in included
  std::int64_t burn_in = 2000;
  int thinning = 1;
  int n_chains = 4;
  std::uint64_t seed = 1;
  int order = 1;  ///< integrand order evaluated at every retained sample (1..4)
  bool tune = true;
  bool keep_configurations = false;
  int threads = 1;
  int max_init_restarts = 200;
  GeometryOptions geometry;

  double resolved_epsilon() const;
  /// Throws ContractError when an invariant does not hold.
  void validate() const;
};

struct LevelSetSample {
  int chain = 0;
  std::int64_t step = 0;
  double energy = 0.0;
  double grad_norm = 0.0;
  double alpha = 0.0;
  double p = 0.0;  ///< D alpha, NaN when not evaluated
  double w = 0.0;  ///< D^2 alpha
  double q = 0.0;  ///< D^3 alpha
  std::vector<double> coords;  ///< filled only with keep_configurations
};

struct ChainDiagnostics {
  double acceptance_rate = 0.0;
  double isotropic_acceptance = 0.0;
  double manifold_acceptance = 0.0;
  double tau_alpha = 1.0;   ///< integrated autocorrelation time of alpha (mean over chains)
  double tau_energy = 1.0;
  double rhat_alpha = 1.0;  ///< split-chain R-hat of alpha
  double rhat_energy = 1.0;
  std::int64_t near_critical_events = 0;
  double min_grad_norm = 0.0;  ///< smallest |grad V| met at retained steps
  double final_step_sigma = 0.0;
  double final_tangent_sigma = 0.0;
  std::vector<std::string> warnings;
};

struct SampleSet {
  ShellSamplerConfig config;
  std::vector<LevelSetSample> samples;  ///< ordered by chain, then step
  ChainDiagnostics diagnostics;
  std::size_t model_size = 0;
};

/// Metropolis walk on the shell {|V - v| <= epsilon} targeting the uniform
/// measure there. As epsilon -> 0 its marginal on the level set is
/// proportional to dsigma / |grad V|.
SampleSet sample_level_set(const PotentialModel& model, const ShellSamplerConfig& cfg);

/// Places q on the shell by 1-D Newton steps along grad V. Returns false when
/// max_iter iterations do not reach it.
bool relax_to_shell(const PotentialModel& model, std::vector<double>& q, double v, double epsilon,
                    int max_iter = 200);

struct SurfaceAverage {
  double mean = 0.0;
  double error = 0.0;
  double effective_samples = 0.0;
  bool low_confidence = false;
};

using SampleObservable = std::function<double(const LevelSetSample&)>;

/// Plain average with a batch-means error over at least 20 within-chain batches.
SurfaceAverage surface_average(const SampleSet& set, const SampleObservable& observable);

struct Extrapolated {
  double value = 0.0;
  double coarse = 0.0;  ///< estimate at epsilon
  double fine = 0.0;    ///< estimate at epsilon / 2
  double coarse_error = 0.0;
  double fine_error = 0.0;
  bool consistent = true;
  std::string warning;
};

/// Runs the sampler at epsilon and epsilon/2 and removes an O(epsilon^2) bias.
Extrapolated epsilon_extrapolate(const PotentialModel& model, const ShellSamplerConfig& cfg,
                                 const SampleObservable& observable);

/// chain_id,step,V,grad_norm,alpha[,P,W,Q]
void write_samples_csv(std::ostream& os, const SampleSet& set);

/// Contiguous within-chain index ranges covering the retained samples, at
/// least min_blocks of them. Shared by error estimators.
std::vector<std::pair<std::size_t, std::size_t>> sample_blocks(const SampleSet& set, int min_blocks = 20);

}  // namespace sigmav
