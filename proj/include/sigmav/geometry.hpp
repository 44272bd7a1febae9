#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "sigmav/model.hpp"

namespace sigmav {

struct GeometryOptions {
  /// Points with |grad V| below this are reported as near-critical.
  double grad_floor = 1e-10;
  /// Directional-difference step is rel_step * (1 + max|q_i|).
  double rel_step = 1e-4;
};

/// Scalar integrands at one configuration.
///
/// alpha is the first-derivative integrand
///   alpha = lap V / |g|^2 - 2 g.H.g / |g|^4,
/// and alpha_d1, alpha_d2, alpha_d3 are its successive derivatives along the
/// gradient flow, D f = g.grad f / |g|^2 (the psi(V).psi(f) operator). They are
/// the P, W, Q terms entering the second, third and fourth entropy derivatives.
struct GeometryPoint {
  std::vector<double> q;
  std::vector<double> grad;
  double energy = 0.0;
  double grad_norm = 0.0;
  double chi = 0.0;        ///< 1/|g|
  double laplacian = 0.0;  ///< trace of the Hessian
  double alpha = 0.0;
  double m1 = 0.0;  ///< divergence of the unit normal g/|g|
  std::optional<double> alpha_d1;
  std::optional<double> alpha_d2;
  std::optional<double> alpha_d3;
  double alpha_d2_error = 0.0;  ///< Richardson error estimate
  double alpha_d3_error = 0.0;
};

struct FlowDerivative {
  double value;
  double error;
};

using ScalarField = std::function<double(std::span<const double>)>;

/// Throws NearCriticalError when |grad V(q)| < opts.grad_floor.
double alpha(const PotentialModel& model, std::span<const double> q, const GeometryOptions& opts = {});

/// g.grad f / |g|^2 by a central difference of f along the unit normal,
/// Richardson-extrapolated over steps {h, h/2}. A non-positive h selects the
/// default opts.rel_step * (1 + max|q_i|).
FlowDerivative flow_derivative(const PotentialModel& model, std::span<const double> q, const ScalarField& f,
                               double h = 0.0, const GeometryOptions& opts = {});

/// Closed-form D alpha: five terms built from <g;g> = g.H.g/|g|^2,
/// <g|g> = |Hg|^2/|g|^2 and the third-derivative contractions.
double alpha_flow_derivative(const PotentialModel& model, std::span<const double> q,
                             const GeometryOptions& opts = {});

/// Divergence of g/|g| (analytic).
double normal_divergence(const PotentialModel& model, std::span<const double> q);

/// Evaluates the integrands needed up to the given entropy-derivative order
/// (1..4). Orders 3 and 4 difference the closed-form alpha_d1 numerically.
GeometryPoint integrand_suite(const PotentialModel& model, std::span<const double> q, int order,
                              const GeometryOptions& opts = {});

}  // namespace sigmav
