#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "helpers.hpp"
#include "sigmav/error.hpp"
#include "sigmav/geometry.hpp"
#include "sigmav/stats.hpp"

using namespace sigmav;
using testing::chain;

namespace {

/// Central-difference divergence of a vector field.
double divergence(const std::function<std::vector<double>(const std::vector<double>&)>& field, std::vector<double> q,
                  double h) {
  double div = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double x = q[i];
    q[i] = x + h;
    const double up = field(q)[i];
    q[i] = x - h;
    const double dn = field(q)[i];
    q[i] = x;
    div += (up - dn) / (2 * h);
  }
  return div;
}

std::vector<double> scaled_gradient(const PotentialModel& m, const std::vector<double>& q, double power) {
  auto g = m.gradient(q);
  const double s = std::pow(testing::norm(g), power);
  for (auto& x : g) x /= s;
  return g;
}

/// A point with |q|^2 = 2 v, direction drawn at random.
std::vector<double> sphere_point(std::mt19937_64& rng, std::size_t n, double v) {
  std::normal_distribution<double> z;
  std::vector<double> q(n);
  for (auto& x : q) x = z(rng);
  const double s = std::sqrt(2 * v) / testing::norm(q);
  for (auto& x : q) x *= s;
  return q;
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("alpha on the harmonic sphere") {
  const auto h = chain(ModelKind::Harmonic, 4);
  CHECK(alpha(h, std::vector<double>{1, 1, 0, 0}) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("zero-Hessian potential has vanishing integrands") {
  const auto lin = PotentialModel::linear(LatticeTopology(1, 5, Boundary::Fixed), 0.7);
  std::mt19937_64 rng(1);
  const auto q = testing::random_point(rng, 5);
  CHECK(alpha(lin, q) == 0.0);
  CHECK(alpha_flow_derivative(lin, q) == 0.0);
  const auto g = integrand_suite(lin, q, 4);
  CHECK(g.alpha == 0.0);
  CHECK(*g.alpha_d1 == 0.0);
  CHECK(*g.alpha_d2 == doctest::Approx(0.0));
  CHECK(*g.alpha_d3 == doctest::Approx(0.0));
}

TEST_CASE("alpha is the divergence of grad V / |grad V|^2") {
  const auto rot = chain(ModelKind::CoupledRotators, 3);
  const std::vector<double> q{0.3, 0.7, 0.2};
  const double fd = divergence([&](const std::vector<double>& x) { return scaled_gradient(rot, x, 2.0); }, q, 1e-5);
  CHECK(std::abs(alpha(rot, q) - fd) < 1e-5);
}

TEST_CASE("near-critical points raise with the gradient norm") {
  const auto rot = chain(ModelKind::CoupledRotators, 3);
  try {
    alpha(rot, std::vector<double>{0.0, 0.0, 0.0});
    FAIL("expected NearCriticalError");
  } catch (const NearCriticalError& e) {
    CHECK(e.grad_norm() == 0.0);
  }
  GeometryOptions loose;
  loose.grad_floor = 1e-2;
  CHECK_THROWS_AS(alpha(rot, std::vector<double>{1e-4, 0.0, 0.0}, loose), NearCriticalError);
  CHECK_THROWS_AS(integrand_suite(rot, std::vector<double>{0.0, 0.0, 0.0}, 2), NearCriticalError);
}

TEST_CASE("flow derivative of a constant vanishes") {
  std::mt19937_64 rng(9);
  const auto m = chain(ModelKind::FPU, 5);
  const auto q = testing::random_point(rng, 5);
  const auto d = flow_derivative(m, q, [](std::span<const double>) { return 3.25; });
  CHECK(d.value == 0.0);
  CHECK(d.error == 0.0);
}

TEST_CASE("flow derivative of alpha on the harmonic sphere") {
  const auto h = chain(ModelKind::Harmonic, 4);
  const std::vector<double> q{1, 1, 0, 0};
  const auto d = flow_derivative(h, q, [&](std::span<const double> x) { return alpha(h, x); });
  CHECK(d.value == doctest::Approx(-1.0).epsilon(1e-8));
  CHECK(alpha_flow_derivative(h, q) == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("closed-form and differenced flow derivative of alpha agree") {
  std::mt19937_64 rng(31);
  const auto rot = chain(ModelKind::CoupledRotators, 3);
  const auto fpu = chain(ModelKind::FPU, 4);
  for (const auto* m : {&rot, &fpu}) {
    for (int t = 0; t < 20; ++t) {
      const auto q = testing::random_point(rng, m->size(), 1.2);
      const auto d = flow_derivative(*m, q, [&](std::span<const double> x) { return alpha(*m, x); });
      CHECK(std::abs(alpha_flow_derivative(*m, q) - d.value) < 1e-4);
    }
  }
}

TEST_CASE("closed-form P lies within the Richardson error of the difference on every model") {
  std::mt19937_64 rng(4242);
  const std::vector<PotentialModel> models{
      chain(ModelKind::Harmonic, 5), chain(ModelKind::CoupledRotators, 5), chain(ModelKind::FPU, 5),
      chain(ModelKind::Phi4, 5), PotentialModel::phi4(LatticeTopology(2, 3, Boundary::Periodic), -0.5, 1.0)};
  int worst_fail = 0;
  for (const auto& m : models) {
    for (int t = 0; t < 200; ++t) {
      const auto q = testing::random_point(rng, m.size(), m.is_angular() ? M_PI : 1.5);
      const double closed = alpha_flow_derivative(m, q);
      const auto d = flow_derivative(m, q, [&](std::span<const double> x) { return alpha(m, x); });
      // the estimate bounds truncation; rounding adds about eps |alpha| / (h |g|)
      const double rounding = 1e-11 * std::max(1.0, std::abs(alpha(m, q))) / testing::norm(m.gradient(q));
      if (std::abs(closed - d.value) > d.error + rounding) ++worst_fail;
    }
  }
  CHECK(worst_fail == 0);
}

TEST_CASE("integrand suite orders") {
  const auto h = chain(ModelKind::Harmonic, 4);
  const std::vector<double> q{1, 1, 0, 0};
  const auto g1 = integrand_suite(h, q, 1);
  CHECK(g1.alpha == doctest::Approx(1.0));
  CHECK_FALSE(g1.alpha_d1.has_value());
  CHECK_FALSE(g1.alpha_d2.has_value());
  CHECK_FALSE(g1.alpha_d3.has_value());

  // radial calculus: with r = |q|^2 = 2v, alpha = (N-2)/r and D = 2 d/dr,
  // so P = -2(N-2)/r^2, W = 8(N-2)/r^3, Q = -48(N-2)/r^4
  const auto g4 = integrand_suite(h, q, 4);
  CHECK(*g4.alpha_d1 == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(*g4.alpha_d2 == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(*g4.alpha_d3 == doctest::Approx(-6.0).epsilon(1e-5));
  CHECK(g4.alpha_d2_error < 1e-6);
  CHECK_THROWS_AS(integrand_suite(h, q, 0), ContractError);
  CHECK_THROWS_AS(integrand_suite(h, q, 5), ContractError);
}

TEST_CASE("chi times the gradient norm is one") {
  std::mt19937_64 rng(12);
  for (const auto& m : {chain(ModelKind::CoupledRotators, 6), chain(ModelKind::Phi4, 6)}) {
    for (int t = 0; t < 50; ++t) {
      const auto g = integrand_suite(m, testing::random_point(rng, 6), 1);
      CHECK(g.chi * g.grad_norm == doctest::Approx(1.0).epsilon(1e-15));
    }
  }
}

TEST_CASE("rel1 identity with a differenced unit-normal divergence") {
  std::mt19937_64 rng(21);
  for (const auto& m : {chain(ModelKind::CoupledRotators, 4), chain(ModelKind::FPU, 4), chain(ModelKind::Phi4, 4)}) {
    for (int t = 0; t < 20; ++t) {
      const auto q = testing::random_point(rng, 4, 1.3);
      const double gn = testing::norm(m.gradient(q));
      const double chi = 1.0 / gn;
      const double m1 = divergence([&](const std::vector<double>& x) { return scaled_gradient(m, x, 1.0); }, q, 1e-5);
      CHECK(m1 == doctest::Approx(normal_divergence(m, q)).epsilon(1e-7));
      const double lap = m.hessian(q).trace();
      const auto lhs = flow_derivative(m, q, [&](std::span<const double> x) {
        return 1.0 / testing::norm(m.gradient(std::vector<double>(x.begin(), x.end())));
      });
      const double rhs = chi * chi * m1 - chi * chi * chi * lap;
      CHECK(std::abs(lhs.value - rhs) < 1e-8 * std::max(1.0, std::abs(rhs)));
    }
  }
}

TEST_CASE("alpha is constant on harmonic spheres") {
  std::mt19937_64 rng(100);
  const auto h = chain(ModelKind::Harmonic, 6);
  double lo = 1e300, hi = -1e300;
  for (int t = 0; t < 100; ++t) {
    const double a = alpha(h, sphere_point(rng, 6, 1.7));
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  CHECK(hi - lo < 1e-10);
  CHECK(lo == doctest::Approx(4.0 / (2 * 1.7)));
}

}
