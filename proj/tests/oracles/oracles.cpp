#include "oracles.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/ellint_1.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace oracle {

double square_lattice_density(double e) {
  if (std::abs(e) >= 2.0) return 0.0;
  return boost::math::ellint_1(std::sqrt(1.0 - 0.25 * e * e)) / (M_PI * M_PI);
}

double rotor3_omega(double v) {
  if (!(v > 0.0 && v < 4.0)) throw std::domain_error("rotor3_omega needs 0 < v < 4");
  const double e = 4.0 - v;
  const double t_max = std::acos(e / 4.0);
  auto f = [e](double t) {
    const double c = std::cos(t);
    return square_lattice_density(e / (2.0 * c)) / (2.0 * c);
  };
  boost::math::quadrature::tanh_sinh<double> ts;
  // sigma/2 over (0, pi), folded onto (0, pi/2); (2 pi)^3 box, 1/(2 pi) for sigma
  return 16.0 * M_PI * M_PI * ts.integrate(f, 0.0, t_max, 1e-15);
}

double rotor2_surface_average(double v, const std::function<double(double, double)>& f) {
  if (!(v > 0.0 && v < 4.5)) throw std::domain_error("rotor2_surface_average needs 0 < v < 4.5");
  // 4 cos^2(q0/2) - (3 - cos q0 - v)^2 as a quadratic in u = cos q0 has roots (1+s) -+ sqrt(3+2s), s = 3 - v
  const double s = 3.0 - v;
  const double disc = 3.0 + 2.0 * s;
  const double u_lo = std::max(-1.0, 1.0 + s - std::sqrt(disc));
  const double u_hi = std::min(1.0, 1.0 + s + std::sqrt(disc));
  const double t_lo = std::acos(u_hi), t_hi = std::acos(u_lo);
  auto parts = [&](double q0, double& num, double& den) {
    const double c = std::cos(0.5 * q0);
    const double a = 3.0 - std::cos(q0) - v;
    const double g = 4.0 * c * c - a * a;
    if (!(g > 0.0)) {
      num = den = 0.0;
      return;
    }
    const double w = 1.0 / std::sqrt(g);
    const double phi = std::acos(std::clamp(a / (2.0 * c), -1.0, 1.0));
    num = w * (f(q0, 0.5 * q0 + phi) + f(q0, 0.5 * q0 - phi));
    den = 2.0 * w;
  };
  boost::math::quadrature::tanh_sinh<double> ts;
  double num = 0.0, den = 0.0;
  for (double sign : {1.0, -1.0}) {
    num += ts.integrate([&](double t) { double n, d; parts(sign * t, n, d); return n; }, t_lo, t_hi, 1e-13);
    den += ts.integrate([&](double t) { double n, d; parts(sign * t, n, d); return d; }, t_lo, t_hi, 1e-13);
  }
  return num / den;
}

namespace {

double central(const std::function<double(double)>& f, double x, double h, int k) {
  switch (k) {
    case 1: return (f(x + h) - f(x - h)) / (2 * h);
    case 2: return (f(x + h) - 2 * f(x) + f(x - h)) / (h * h);
    case 3: return (f(x + 2 * h) - 2 * f(x + h) + 2 * f(x - h) - f(x - 2 * h)) / (2 * h * h * h);
    case 4: return (f(x + 2 * h) - 4 * f(x + h) + 6 * f(x) - 4 * f(x - h) + f(x - 2 * h)) / (h * h * h * h);
  }
  throw std::invalid_argument("derivative order must be 1..4");
}

}  // namespace

double rotor3_log_omega_derivative(double v, int k) {
  auto lo = [](double x) { return std::log(rotor3_omega(x)); };
  const double h = 0.04;
  const double coarse = central(lo, v, h, k);
  const double fine = central(lo, v, h / 2, k);
  return (4.0 * fine - coarse) / 3.0;
}

double rotor3_entropy_derivative(double vbar, int k) {
  return std::pow(3.0, k - 1) * rotor3_log_omega_derivative(3.0 * vbar, k);
}

double harmonic_entropy_derivative(int n, double vbar, int k) {
  // (log Omega)^(k)(v) = (n/2 - 1) (-1)^(k-1) (k-1)! / v^k
  const double v = n * vbar;
  double fact = 1.0;
  for (int i = 2; i < k; ++i) fact *= i;
  const double sign = (k % 2 == 1) ? 1.0 : -1.0;
  return std::pow(n, k - 1) * (0.5 * n - 1.0) * sign * fact / std::pow(v, k);
}

}  // namespace oracle
