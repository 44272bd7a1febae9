#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "sigmav/critical.hpp"
#include "sigmav/error.hpp"

using namespace sigmav;
using testing::chain;

namespace {

CriticalSearchOptions options(std::int64_t seeds, std::uint64_t seed = 1) {
  CriticalSearchOptions o;
  o.random_seeds = seeds;
  o.seed = seed;
  o.threads = 0;
  return o;
}

double torus_distance(double a, double b) {
  const double d = std::remainder(a - b, 2 * M_PI);
  return std::abs(d);
}

}  // namespace

TEST_SUITE("critical") {

TEST_CASE("harmonic chain has the origin only") {
  const auto r = find_critical_points(chain(ModelKind::Harmonic, 5), options(200));
  REQUIRE(r.points.size() == 1u);
  CHECK(r.points[0].v == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.points[0].index == 0);
  CHECK_FALSE(r.points[0].degenerate);
}

TEST_CASE("convex FPU chain has a single minimum") {
  const auto r = find_critical_points(chain(ModelKind::FPU, 6), options(10000, 3));
  REQUIRE(r.points.size() == 1u);
  for (double x : r.points[0].q) CHECK(std::abs(x) < 1e-8);
  CHECK(r.points[0].index == 0);
  CHECK(r.converged == 10000);
}

TEST_CASE("two-site rotator critical set matches a grid scan of |grad V|^2") {
  const auto rot = chain(ModelKind::CoupledRotators, 2);
  const auto r = find_critical_points(rot, options(2000, 5));

  // local minima of |grad V|^2 on a periodic 400 x 400 grid
  const int m = 400;
  const double h = 2 * M_PI / m;
  std::vector<double> g2(m * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const auto g = rot.gradient(std::vector<double>{-M_PI + (i + 0.5) * h, -M_PI + (j + 0.5) * h});
      g2[i * m + j] = g[0] * g[0] + g[1] * g[1];
    }
  std::vector<std::pair<double, double>> minima;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const double c = g2[i * m + j];
      if (c > 2e-3) continue;  // (3 h)^2 bounds |grad V|^2 within half a cell of a critical point
      bool local = true;
      for (int di = -1; di <= 1 && local; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
          if (di == 0 && dj == 0) continue;
          if (g2[((i + di + m) % m) * m + (j + dj + m) % m] < c) local = false;
        }
      if (!local) continue;
      // ties and shallow valleys near saddles give several cells per basin
      const double a = -M_PI + (i + 0.5) * h, b = -M_PI + (j + 0.5) * h;
      bool seen = false;
      for (const auto& [x, y] : minima) seen |= torus_distance(a, x) < 10 * h && torus_distance(b, y) < 10 * h;
      if (!seen) minima.emplace_back(a, b);
    }
  CHECK(minima.size() == 6u);
  REQUIRE(r.points.size() == minima.size());
  for (const auto& p : r.points) {
    int matches = 0;
    for (const auto& [a, b] : minima)
      if (torus_distance(p.q[0], a) < 10 * h && torus_distance(p.q[1], b) < 10 * h) ++matches;
    CHECK_MESSAGE(matches == 1, "critical point at (" << p.q[0] << ", " << p.q[1] << ")");
  }
  CHECK(r.unknown_family);

  const auto levels = levels_from_points(r.points);
  REQUIRE(levels.size() == 3u);
  CHECK(levels[0].v == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(levels[0].multiplicity == 1.0);
  CHECK(levels[1].v == doctest::Approx(4.0));
  CHECK(levels[1].index == 1);
  CHECK(levels[1].multiplicity == 3.0);
  CHECK(levels[2].v == doctest::Approx(4.5));
  CHECK(levels[2].index == 2);
  CHECK(levels[2].multiplicity == 2.0);
}

TEST_CASE("Morse data on the two-site rotator") {
  const auto rot = chain(ModelKind::CoupledRotators, 2);
  const auto m0 = morse_index(rot, {0.0, 0.0});
  CHECK(m0.index == 0);
  REQUIRE(m0.spectrum.size() == 2u);
  CHECK(m0.spectrum[0] == doctest::Approx(1.0));
  CHECK(m0.spectrum[1] == doctest::Approx(3.0));
  CHECK(m0.min_abs_eigenvalue == doctest::Approx(1.0));
  const auto mp = morse_index(rot, {M_PI, M_PI});
  CHECK(mp.index == 1);
  CHECK_FALSE(mp.degenerate);
}

TEST_CASE("re-polishing a found point does not move it") {
  const auto rot = chain(ModelKind::CoupledRotators, 4);
  const auto r = find_critical_points(rot, options(2000, 8));
  REQUIRE_FALSE(r.points.empty());
  for (const auto& p : r.points) {
    if (p.degenerate) continue;
    const auto again = polish_critical_point(rot, p.q);
    REQUIRE(again.has_value());
    for (std::size_t i = 0; i < p.q.size(); ++i) CHECK(torus_distance((*again)[i], p.q[i]) < 1e-8);
  }
  CHECK_FALSE(polish_critical_point(rot, std::vector<double>(4, 0.3), [] {
                CriticalSearchOptions o;
                o.max_iter = 1;
                return o;
              }()).has_value());
}

TEST_CASE("analytic rotator levels agree with the search") {
  for (int n = 2; n <= 6; ++n) {
    const auto analytic = rotator_chain_critical_levels(n);
    const auto found = levels_from_points(find_critical_points(chain(ModelKind::CoupledRotators, n), options(10000, n)).points);
    for (const auto& a : analytic) {
      if (a.degenerate) continue;
      double count = 0.0;
      for (const auto& f : found)
        if (!f.degenerate && std::abs(f.v - a.v) < 1e-7 && f.index == a.index) count += f.multiplicity;
      // distinct analytic families can share a level
      double expected = 0.0;
      for (const auto& b : analytic)
        if (!b.degenerate && std::abs(b.v - a.v) < 1e-7 && b.index == a.index) expected += b.multiplicity;
      CHECK_MESSAGE(count == expected, "n=" << n << " v=" << a.v << " index " << a.index);
    }
    for (const auto& f : found) {
      if (f.degenerate) continue;
      bool known = false;
      for (const auto& a : analytic) known |= std::abs(f.v - a.v) < 1e-7 && f.index == a.index;
      CHECK_MESSAGE(known, "n=" << n << " unexpected level " << f.v);
    }
  }
}

TEST_CASE("Euler characteristics of two-site sublevel sets") {
  const auto levels = rotator_chain_critical_levels(2);
  CHECK(euler_characteristic(levels, 0.5) == 1);
  CHECK(euler_characteristic(levels, 4.2) == -2);
  CHECK(euler_characteristic(levels, 5.0) == 0);  // the whole torus
  std::vector<CriticalLevel> bad{{0.0, 0, 1.0, false, ""}, {2.0, -1, 1.0, true, "continuum"}};
  CHECK(euler_characteristic(bad, 1.0) == 1);
  try {
    euler_characteristic(bad, 3.0);
    FAIL("expected ContractError");
  } catch (const ContractError& e) {
    CHECK(std::string(e.what()).find("v = 2") != std::string::npos);
  }
}

TEST_CASE("degenerate continua in the analytic rotator set") {
  const auto three = rotator_chain_critical_levels(3);
  bool continuum = false;
  for (const auto& l : three) continuum |= l.degenerate && l.v == 4.0;
  CHECK(continuum);
  for (const auto& l : rotator_chain_critical_levels(2)) CHECK_FALSE(l.degenerate);
}

TEST_CASE("certifying windows on the two-site rotator") {
  const auto rot = chain(ModelKind::CoupledRotators, 2);
  const auto levels = rotator_chain_critical_levels(2);
  const auto clean = certify_window(rot, 0.05, 1.95, levels);
  CHECK(clean.critical_vbars.empty());
  REQUIRE(clean.subintervals.size() == 1u);
  CHECK(clean.subintervals[0].certified);
  CHECK(*clean.subintervals[0].euler == 1);

  const auto split = certify_window(rot, 0.05, 2.2, levels);
  REQUIRE(split.critical_vbars.size() == 1u);
  CHECK(split.critical_vbars[0] == doctest::Approx(2.0));
  CHECK(split.index_counts[0][1] == 3.0);
  REQUIRE(split.subintervals.size() == 2u);
  CHECK(*split.subintervals[0].euler == 1);
  CHECK(*split.subintervals[1].euler == -2);

  ShellSamplerConfig cfg;
  cfg.n_steps = 4000;
  cfg.burn_in = 400;
  cfg.n_chains = 2;
  cfg.seed = 12;
  const auto sampled = certify_window(rot, 0.05, 1.95, levels, &cfg);
  CHECK(sampled.subintervals[0].c_est > 0.0);
  CHECK(sampled.subintervals[0].near_critical_events == 0);
  CHECK_THROWS_AS(certify_window(rot, 1.0, 1.0, levels), ContractError);

  const auto three = rotator_chain_critical_levels(3);
  const auto deg = certify_window(chain(ModelKind::CoupledRotators, 3), 1.0, 1.5, three);
  REQUIRE(deg.subintervals.size() == 2u);
  CHECK(deg.degenerate_values[0]);
  CHECK(deg.subintervals[0].euler.has_value());
  CHECK_FALSE(deg.subintervals[1].euler.has_value());
}

TEST_CASE("topology report serialization") {
  const auto rot = chain(ModelKind::CoupledRotators, 2);
  auto report = certify_window(rot, 0.05, 2.2, rotator_chain_critical_levels(2), nullptr, "spot check");
  report.points = find_critical_points(rot, options(500)).points;
  const auto j = nlohmann::json::parse(topology_report_json(report));
  CHECK(j["window"][1] == 2.2);
  CHECK(j["critical_values"].size() == 1u);
  CHECK(j["subintervals"][1]["euler"] == -2);
  CHECK(j["subintervals"][0]["c_est"].is_null());
  CHECK(j["critical_points"].size() == 6u);
  CHECK(j["caveat"] == "spot check");
}

}
