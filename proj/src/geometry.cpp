#include "sigmav/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "sigmav/error.hpp"

namespace sigmav {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double default_step(std::span<const double> q, const GeometryOptions& opts) {
  double m = 0.0;
  for (double x : q) m = std::max(m, std::abs(x));
  return opts.rel_step * (1.0 + m);
}

struct LocalTerms {
  std::vector<double> g;
  std::vector<double> hg;
  double g2;
  double ghg;
  double lap;
};

LocalTerms local_terms(const PotentialModel& model, std::span<const double> q, const GeometryOptions& opts) {
  LocalTerms t;
  t.g = model.gradient(q);
  t.g2 = dot(t.g, t.g);
  const double norm = std::sqrt(t.g2);
  if (!(norm >= opts.grad_floor)) throw NearCriticalError(norm, opts.grad_floor);
  const SparseHessian h = model.hessian(q);
  t.hg.resize(q.size());
  h.multiply(t.g, t.hg);
  t.ghg = dot(t.g, t.hg);
  t.lap = h.trace();
  return t;
}

double alpha_from(const LocalTerms& t) { return t.lap / t.g2 - 2.0 * t.ghg / (t.g2 * t.g2); }

double alpha_d1_from(const PotentialModel& model, std::span<const double> q, const LocalTerms& t) {
  const ThirdContractions c = model.third_contractions(q, t.g);
  const double g2 = t.g2;
  const double chi2 = 1.0 / g2;
  const double chi4 = chi2 * chi2;
  const double chi3 = chi2 / std::sqrt(g2);
  const double semi = t.ghg / g2;                // <psi V ; psi V>
  const double pipe = dot(t.hg, t.hg) / g2;      // <psi V | psi V>
  const double psi_trace = c.grad_dot_trace / std::sqrt(g2);             // sum psi_i d3_ijj
  const double psi_cubed = c.grad_cubed / (g2 * std::sqrt(g2));          // sum psi_i psi_j psi_k d3_ijk
  return 8.0 * chi4 * semi * semi - 4.0 * chi4 * pipe - 2.0 * chi4 * semi * t.lap + chi3 * psi_trace -
         2.0 * chi3 * psi_cubed;
}

}  // namespace

double alpha(const PotentialModel& model, std::span<const double> q, const GeometryOptions& opts) {
  return alpha_from(local_terms(model, q, opts));
}

FlowDerivative flow_derivative(const PotentialModel& model, std::span<const double> q, const ScalarField& f,
                               double h, const GeometryOptions& opts) {
  const std::vector<double> g = model.gradient(q);
  const double norm = std::sqrt(dot(g, g));
  if (!(norm >= opts.grad_floor)) throw NearCriticalError(norm, opts.grad_floor);
  if (h <= 0.0) h = default_step(q, opts);
  if (!(h > 1e-300)) throw ContractError("directional step underflow");

  std::vector<double> x(q.begin(), q.end());
  auto central = [&](double step) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = q[i] + step * g[i] / norm;
    const double fp = f(x);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = q[i] - step * g[i] / norm;
    const double fm = f(x);
    return (fp - fm) / (2.0 * step * norm);
  };
  const double coarse = central(h);
  const double fine = central(0.5 * h);
  const double extrapolated = (4.0 * fine - coarse) / 3.0;
  return {extrapolated, std::abs(extrapolated - fine)};
}

double alpha_flow_derivative(const PotentialModel& model, std::span<const double> q, const GeometryOptions& opts) {
  const LocalTerms t = local_terms(model, q, opts);
  return alpha_d1_from(model, q, t);
}

double normal_divergence(const PotentialModel& model, std::span<const double> q) {
  GeometryOptions loose;
  loose.grad_floor = 0.0;
  const LocalTerms t = local_terms(model, q, loose);
  const double norm = std::sqrt(t.g2);
  return t.lap / norm - t.ghg / (t.g2 * norm);
}

GeometryPoint integrand_suite(const PotentialModel& model, std::span<const double> q, int order,
                              const GeometryOptions& opts) {
  if (order < 1 || order > 4) throw ContractError("integrand order must be in 1..4");
  const LocalTerms t = local_terms(model, q, opts);

  GeometryPoint p;
  p.q.assign(q.begin(), q.end());
  p.energy = model.energy(q);
  p.grad_norm = std::sqrt(t.g2);
  p.chi = 1.0 / p.grad_norm;
  p.laplacian = t.lap;
  p.alpha = alpha_from(t);
  p.m1 = t.lap / p.grad_norm - t.ghg / (t.g2 * p.grad_norm);
  if (order >= 2) p.alpha_d1 = alpha_d1_from(model, q, t);

  if (order >= 3) {
    const ScalarField d1 = [&](std::span<const double> x) { return alpha_flow_derivative(model, x, opts); };
    const FlowDerivative w = flow_derivative(model, q, d1, 0.0, opts);
    p.alpha_d2 = w.value;
    p.alpha_d2_error = w.error;
    if (order == 4) {
      const ScalarField d2 = [&](std::span<const double> x) {
        return flow_derivative(model, x, d1, 0.0, opts).value;
      };
      const FlowDerivative qv = flow_derivative(model, q, d2, 0.0, opts);
      p.alpha_d3 = qv.value;
      p.alpha_d3_error = qv.error;
    }
  }
  p.grad = t.g;
  return p;
}

}  // namespace sigmav
