#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <map>
#include <sstream>

#include "helpers.hpp"
#include "oracles.hpp"
#include "sigmav/error.hpp"
#include "sigmav/sampler.hpp"

using namespace sigmav;
using testing::chain;

namespace {

ShellSamplerConfig base_config(double v, std::uint64_t seed, std::int64_t steps = 40000) {
  ShellSamplerConfig cfg;
  cfg.v = v;
  cfg.n_steps = steps;
  cfg.burn_in = steps / 10;
  cfg.n_chains = 4;
  cfg.seed = seed;
  return cfg;
}

double coord(const LevelSetSample& s, std::size_t i) { return s.coords.at(i); }

}  // namespace

TEST_SUITE("sampler") {

TEST_CASE("constant observable averages to the constant") {
  const auto h = chain(ModelKind::Harmonic, 4);
  auto cfg = base_config(1.0, 3, 5000);
  cfg.epsilon = 0.01;
  const auto set = sample_level_set(h, cfg);
  const auto avg = surface_average(set, [](const LevelSetSample&) { return 1.0; });
  CHECK(avg.mean == 1.0);
  CHECK(avg.error == 0.0);
  for (const auto& s : set.samples) CHECK(std::abs(s.energy - 1.0) <= 0.01);
}

TEST_CASE("alpha on the harmonic shell") {
  const auto h = chain(ModelKind::Harmonic, 4);
  const auto set = sample_level_set(h, base_config(1.0, 4, 20000));
  const auto avg = surface_average(set, [](const LevelSetSample& s) { return s.alpha; });
  CHECK(std::abs(avg.mean - 1.0) <= std::max(3 * avg.error, 1e-5));
  CHECK(avg.error < 1e-4);
  CHECK_FALSE(avg.low_confidence);
}

TEST_CASE("two-site rotator shell averages match the co-area quadrature") {
  const auto rot = chain(ModelKind::CoupledRotators, 2);
  auto cfg = base_config(0.5, 17, 100000);
  cfg.keep_configurations = true;
  const auto set = sample_level_set(rot, cfg);
  using Obs = std::function<double(double, double)>;
  const std::vector<std::pair<std::string, Obs>> observables{
      {"cos(q1 - q0)", [](double a, double b) { return std::cos(b - a); }},
      {"cos q0", [](double a, double) { return std::cos(a); }},
      {"q0^2", [](double a, double) { return a * a; }},
      {"sin q0 sin q1", [](double a, double b) { return std::sin(a) * std::sin(b); }},
      {"(q0 - q1)^2 q1^2", [](double a, double b) { return (a - b) * (a - b) * b * b; }},
  };
  for (const auto& [name, f] : observables) {
    const double exact = oracle::rotor2_surface_average(0.5, f);
    const auto avg = surface_average(set, [&](const LevelSetSample& s) { return f(coord(s, 0), coord(s, 1)); });
    CHECK_MESSAGE(std::abs(avg.mean - exact) <= 3 * avg.error, name << ": " << avg.mean << " vs " << exact << " +- "
                                                                      << avg.error);
  }
}

TEST_CASE("three-site rotator alpha matches the log-Omega slope") {
  const auto rot = chain(ModelKind::CoupledRotators, 3);
  const auto set = sample_level_set(rot, base_config(0.6, 23, 100000));
  const auto avg = surface_average(set, [](const LevelSetSample& s) { return s.alpha; });
  const double exact = oracle::rotor3_log_omega_derivative(0.6, 1);
  CHECK_MESSAGE(std::abs(avg.mean - exact) <= 3 * avg.error, avg.mean << " vs " << exact << " +- " << avg.error);
}

TEST_CASE("epsilon extrapolation") {
  const auto h = chain(ModelKind::Harmonic, 4);
  auto cfg = base_config(1.0, 8, 20000);
  const auto c = epsilon_extrapolate(h, cfg, [](const LevelSetSample&) { return 2.5; });
  CHECK(c.value == 2.5);
  CHECK(c.consistent);
  const auto a = epsilon_extrapolate(h, cfg, [](const LevelSetSample& s) { return s.alpha; });
  CHECK(a.value == doctest::Approx(1.0).epsilon(1e-4));

  // a deliberately wide shell makes the O(eps^2) bias visible against the noise
  const auto rot = chain(ModelKind::CoupledRotators, 3);
  auto wide = base_config(1.2, 29, 400000);
  wide.epsilon = 0.6;
  const double exact = oracle::rotor3_log_omega_derivative(1.2, 1);
  const auto r = epsilon_extrapolate(rot, wide, [](const LevelSetSample& s) { return s.alpha; });
  CHECK(r.consistent);
  CHECK_MESSAGE(std::abs(r.value - exact) < std::abs(r.coarse - exact),
                "extrapolated " << r.value << ", coarse " << r.coarse << ", exact " << exact);
}

TEST_CASE("forward and backward transition counts balance") {
  const auto rot = chain(ModelKind::CoupledRotators, 2);
  auto cfg = base_config(1.5, 41, 200000);
  cfg.n_chains = 2;
  cfg.keep_configurations = true;
  const auto set = sample_level_set(rot, cfg);
  auto bin = [](const LevelSetSample& s) {
    const int a = static_cast<int>(std::floor((s.coords[0] + M_PI) / (2 * M_PI) * 4)) % 4;
    const int b = static_cast<int>(std::floor((s.coords[1] + M_PI) / (2 * M_PI) * 4)) % 4;
    return a * 4 + b;
  };
  std::map<std::pair<int, int>, double> moves;
  for (std::size_t i = 1; i < set.samples.size(); ++i) {
    const auto& a = set.samples[i - 1];
    const auto& b = set.samples[i];
    if (a.chain != b.chain) continue;
    const int x = bin(a), y = bin(b);
    if (x != y) moves[{x, y}] += 1.0;
  }
  double chi2 = 0.0;
  int dof = 0;
  for (const auto& [key, n_xy] : moves) {
    if (key.first > key.second) continue;
    const double n_yx = moves.count({key.second, key.first}) ? moves.at({key.second, key.first}) : 0.0;
    if (n_xy + n_yx < 20) continue;
    chi2 += (n_xy - n_yx) * (n_xy - n_yx) / (n_xy + n_yx);
    ++dof;
  }
  REQUIRE(dof >= 4);
  const double p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), chi2));
  CHECK_MESSAGE(p > 0.01, "chi2 " << chi2 << " on " << dof << " dof");
}

TEST_CASE("identical seeds give identical streams at any thread count") {
  const auto m = chain(ModelKind::FPU, 6);
  auto cfg = base_config(3.0, 99, 4000);
  cfg.order = 3;
  cfg.threads = 1;
  const auto a = sample_level_set(m, cfg);
  cfg.threads = 4;
  const auto b = sample_level_set(m, cfg);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(a.samples[i].energy == b.samples[i].energy);
    CHECK(a.samples[i].alpha == b.samples[i].alpha);
    CHECK(a.samples[i].w == b.samples[i].w);
  }
  cfg.seed = 100;
  const auto c = sample_level_set(m, cfg);
  CHECK(c.samples.front().energy != a.samples.front().energy);
}

TEST_CASE("no near-critical events inside a critical-free window") {
  const auto rot = chain(ModelKind::CoupledRotators, 8);
  const auto set = sample_level_set(rot, base_config(8 * 0.5, 5, 20000));
  CHECK(set.diagnostics.near_critical_events == 0);
  CHECK(set.diagnostics.min_grad_norm > 1e-3);
}

TEST_CASE("diagnostics are in range") {
  const auto rot = chain(ModelKind::CoupledRotators, 6);
  const auto set = sample_level_set(rot, base_config(6 * 0.7, 6, 20000));
  const auto& d = set.diagnostics;
  CHECK(d.acceptance_rate >= 0.0);
  CHECK(d.acceptance_rate <= 1.0);
  CHECK(d.rhat_alpha > 0.95);
  CHECK(d.rhat_alpha < 1.1);
  CHECK(d.tau_alpha >= 0.5);
  CHECK(d.warnings.empty());
}

TEST_CASE("configuration contracts and initializer failure") {
  const auto h = chain(ModelKind::Harmonic, 4);
  auto cfg = base_config(1.0, 1, 1000);
  cfg.epsilon = -1.0;
  CHECK_THROWS_AS(sample_level_set(h, cfg), ContractError);
  cfg = base_config(1.0, 1, 1000);
  cfg.burn_in = 1000;
  CHECK_THROWS_AS(sample_level_set(h, cfg), ContractError);
  cfg = base_config(1.0, 1, 1000);
  cfg.thinning = 0;
  CHECK_THROWS_AS(sample_level_set(h, cfg), ContractError);
  cfg = base_config(-1.0, 1, 1000);
  cfg.max_init_restarts = 3;
  CHECK_THROWS_AS(sample_level_set(h, cfg), NumericalError);
}

TEST_CASE("oversized fixed steps are reported as a low acceptance warning") {
  const auto h = chain(ModelKind::Harmonic, 8);
  auto cfg = base_config(4.0, 2, 4000);
  cfg.step_sigma = 50.0;
  cfg.manifold_fraction = 0.0;
  cfg.tune = false;
  const auto set = sample_level_set(h, cfg);
  CHECK(set.diagnostics.acceptance_rate < 0.05);
  bool warned = false;
  for (const auto& w : set.diagnostics.warnings) warned |= w.find("low acceptance") != std::string::npos;
  CHECK(warned);
}

TEST_CASE("raw sample dump format") {
  const auto h = chain(ModelKind::Harmonic, 4);
  auto cfg = base_config(1.0, 1, 2000);
  cfg.order = 2;
  cfg.n_chains = 1;
  const auto set = sample_level_set(h, cfg);
  std::ostringstream os;
  write_samples_csv(os, set);
  std::istringstream is(os.str());
  std::string header, row;
  std::getline(is, header);
  CHECK(header == "chain_id,step,V,grad_norm,alpha,P");
  std::size_t rows = 0;
  while (std::getline(is, row)) ++rows;
  CHECK(rows == set.samples.size());
}

TEST_CASE("thinning and burn-in determine the retained count") {
  const auto h = chain(ModelKind::Harmonic, 3);
  auto cfg = base_config(1.0, 1, 3000);
  cfg.burn_in = 1000;
  cfg.thinning = 4;
  cfg.n_chains = 3;
  const auto set = sample_level_set(h, cfg);
  CHECK(set.samples.size() == 3u * 500u);
  for (std::size_t i = 1; i < set.samples.size(); ++i) {
    const auto& a = set.samples[i - 1];
    const auto& b = set.samples[i];
    CHECK((a.chain < b.chain || (a.chain == b.chain && a.step < b.step)));
  }
}

}
