#include "sigmav/sigmav.h"

#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "sigmav/config.hpp"
#include "sigmav/critical.hpp"
#include "sigmav/entropy.hpp"
#include "sigmav/error.hpp"
#include "sigmav/geometry.hpp"
#include "sigmav/run.hpp"
#include "sigmav/sampler.hpp"

struct sigmav_model {
  sigmav::PotentialModel model;
};

struct sigmav_samples {
  sigmav::SampleSet set;
};

struct sigmav_critical_set {
  sigmav::CriticalSearchResult result;
};

namespace {

thread_local std::string last_error;

template <class F>
sigmav_status guard(F&& body) {
  try {
    body();
    return SIGMAV_OK;
  } catch (const sigmav::ConfigError& e) {
    last_error = e.what();
    return SIGMAV_ERR_CONFIG;
  } catch (const sigmav::NearCriticalError& e) {
    last_error = e.what();
    return SIGMAV_ERR_NEAR_CRITICAL;
  } catch (const sigmav::ContractError& e) {
    last_error = e.what();
    return SIGMAV_ERR_CONTRACT;
  } catch (const sigmav::NumericalError& e) {
    last_error = e.what();
    return SIGMAV_ERR_NUMERICAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return SIGMAV_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return SIGMAV_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr) throw sigmav::ContractError(std::string(what) + " is NULL");
}

std::span<const double> coords(const sigmav_model* m, const double* q, size_t n) {
  need(m, "model");
  need(q, "q");
  if (n != m->model.size())
    throw sigmav::ContractError("expected " + std::to_string(m->model.size()) + " coordinates, got " +
                                std::to_string(n));
  return {q, n};
}

sigmav::ShellSamplerConfig to_cpp(const sigmav_sampler_config& c) {
  sigmav::ShellSamplerConfig s;
  s.v = c.v;
  s.epsilon = c.epsilon;
  s.step_sigma = c.step_sigma;
  s.tangent_sigma = c.tangent_sigma;
  s.manifold_fraction = c.manifold_fraction;
  s.n_steps = c.n_steps;
  s.burn_in = c.burn_in;
  s.thinning = c.thinning;
  s.n_chains = c.n_chains;
  s.seed = c.seed;
  s.order = c.order;
  s.threads = c.threads;
  return s;
}

sigmav_estimate to_c(const sigmav::DerivativeEstimate& e) { return {e.order, e.value, e.error, e.flagged ? 1 : 0}; }

}  // namespace

extern "C" {

const char* sigmav_last_error(void) { return last_error.c_str(); }
const char* sigmav_version(void) { return sigmav::kVersion; }

sigmav_status sigmav_model_create(const sigmav_model_spec* spec, sigmav_model** out) {
  return guard([&] {
    need(spec, "spec");
    need(out, "out");
    *out = nullptr;
    if (spec->kind < SIGMAV_HARMONIC || spec->kind > SIGMAV_LINEAR) throw sigmav::ContractError("unknown model kind");
    sigmav::LatticeTopology topo(spec->dimension, spec->sites,
                                 spec->periodic ? sigmav::Boundary::Periodic : sigmav::Boundary::Fixed);
    sigmav::PotentialModel::Params p;
    p.lambda = spec->lambda;
    p.r = spec->r;
    p.u = spec->u;
    p.slope = spec->slope;
    *out = new sigmav_model{sigmav::PotentialModel::make(static_cast<sigmav::ModelKind>(spec->kind), topo, p)};
  });
}

void sigmav_model_destroy(sigmav_model* model) { delete model; }

size_t sigmav_model_size(const sigmav_model* model) { return model ? model->model.size() : 0; }

sigmav_status sigmav_model_energy(const sigmav_model* model, const double* q, size_t n, double* out) {
  return guard([&] {
    need(out, "out");
    *out = model->model.energy(coords(model, q, n));
  });
}

sigmav_status sigmav_model_gradient(const sigmav_model* model, const double* q, size_t n, double* out) {
  return guard([&] {
    need(out, "out");
    model->model.gradient(coords(model, q, n), std::span<double>(out, n));
  });
}

sigmav_status sigmav_model_hessian(const sigmav_model* model, const double* q, size_t n, double* out) {
  return guard([&] {
    need(out, "out");
    const auto dense = model->model.hessian(coords(model, q, n)).dense();
    std::copy(dense.begin(), dense.end(), out);
  });
}

sigmav_status sigmav_model_third_partial(const sigmav_model* model, const double* q, size_t n, int i, int j, int k,
                                         double* out) {
  return guard([&] {
    need(out, "out");
    *out = model->model.third_partial(coords(model, q, n), i, j, k);
  });
}

sigmav_status sigmav_geometry_eval(const sigmav_model* model, const double* q, size_t n, int order,
                                   sigmav_geometry* out) {
  return guard([&] {
    need(out, "out");
    const auto g = sigmav::integrand_suite(model->model, coords(model, q, n), order);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    *out = {g.energy,
            g.grad_norm,
            g.laplacian,
            g.alpha,
            g.m1,
            g.alpha_d1.value_or(nan),
            g.alpha_d2.value_or(nan),
            g.alpha_d3.value_or(nan),
            g.alpha_d2_error,
            g.alpha_d3_error};
  });
}

void sigmav_sampler_defaults(sigmav_sampler_config* cfg) {
  if (cfg == nullptr) return;
  const sigmav::ShellSamplerConfig d;
  *cfg = {d.v,       d.epsilon,  d.step_sigma, d.tangent_sigma, d.manifold_fraction, d.n_steps,
          d.burn_in, d.thinning, d.n_chains,   d.seed,          d.order,             d.threads};
}

sigmav_status sigmav_sample_level_set(const sigmav_model* model, const sigmav_sampler_config* cfg,
                                      sigmav_samples** out) {
  return guard([&] {
    need(model, "model");
    need(cfg, "cfg");
    need(out, "out");
    *out = nullptr;
    *out = new sigmav_samples{sigmav::sample_level_set(model->model, to_cpp(*cfg))};
  });
}

void sigmav_samples_destroy(sigmav_samples* samples) { delete samples; }

size_t sigmav_samples_count(const sigmav_samples* samples) { return samples ? samples->set.samples.size() : 0; }

sigmav_status sigmav_samples_get(const sigmav_samples* samples, size_t i, sigmav_sample* out) {
  return guard([&] {
    need(samples, "samples");
    need(out, "out");
    if (i >= samples->set.samples.size()) throw sigmav::ContractError("sample index out of range");
    const auto& s = samples->set.samples[i];
    *out = {s.chain, s.step, s.energy, s.grad_norm, s.alpha, s.p, s.w, s.q};
  });
}

sigmav_status sigmav_samples_diagnostics(const sigmav_samples* samples, sigmav_diagnostics* out) {
  return guard([&] {
    need(samples, "samples");
    need(out, "out");
    const auto& d = samples->set.diagnostics;
    *out = {d.acceptance_rate, d.tau_alpha, d.rhat_alpha, d.near_critical_events, d.min_grad_norm};
  });
}

sigmav_status sigmav_samples_derivative(const sigmav_samples* samples, int k, sigmav_estimate* out) {
  return guard([&] {
    need(samples, "samples");
    need(out, "out");
    *out = to_c(sigmav::derivative_from_samples(samples->set, k));
  });
}

sigmav_status sigmav_entropy_derivative(const sigmav_model* model, double vbar, int k,
                                        const sigmav_sampler_config* cfg, sigmav_estimate* out) {
  return guard([&] {
    need(model, "model");
    need(cfg, "cfg");
    need(out, "out");
    *out = to_c(sigmav::entropy_derivative(model->model, vbar, k, to_cpp(*cfg)));
  });
}

sigmav_status sigmav_find_critical_points(const sigmav_model* model, double vbar_lo, double vbar_hi,
                                          int64_t random_seeds, uint64_t seed, int threads,
                                          sigmav_critical_set** out) {
  return guard([&] {
    need(model, "model");
    need(out, "out");
    *out = nullptr;
    sigmav::CriticalSearchOptions opts;
    opts.vbar_lo = vbar_lo;
    opts.vbar_hi = vbar_hi;
    opts.random_seeds = random_seeds;
    opts.seed = seed;
    opts.threads = threads;
    *out = new sigmav_critical_set{sigmav::find_critical_points(model->model, opts)};
  });
}

void sigmav_critical_set_destroy(sigmav_critical_set* set) { delete set; }

size_t sigmav_critical_set_count(const sigmav_critical_set* set) { return set ? set->result.points.size() : 0; }

sigmav_status sigmav_critical_set_get(const sigmav_critical_set* set, size_t i, sigmav_critical_point* out) {
  return guard([&] {
    need(set, "set");
    need(out, "out");
    if (i >= set->result.points.size()) throw sigmav::ContractError("critical point index out of range");
    const auto& p = set->result.points[i];
    *out = {p.v, p.vbar, p.index, p.degenerate ? 1 : 0, p.min_abs_eigenvalue};
  });
}

sigmav_status sigmav_critical_set_coords(const sigmav_critical_set* set, size_t i, double* out, size_t n) {
  return guard([&] {
    need(set, "set");
    need(out, "out");
    if (i >= set->result.points.size()) throw sigmav::ContractError("critical point index out of range");
    const auto& q = set->result.points[i].q;
    if (n != q.size()) throw sigmav::ContractError("coordinate buffer has the wrong length");
    std::copy(q.begin(), q.end(), out);
  });
}

sigmav_status sigmav_critical_set_euler(const sigmav_critical_set* set, double v_limit, long long* out) {
  return guard([&] {
    need(set, "set");
    need(out, "out");
    *out = sigmav::euler_characteristic(set->result.points, v_limit);
  });
}

sigmav_status sigmav_helmholtz(double f, double beta, double* out) {
  return guard([&] {
    need(out, "out");
    *out = sigmav::helmholtz(f, beta);
  });
}

sigmav_status sigmav_config_check(const char* text, int has_seed) {
  return guard([&] {
    need(text, "text");
    sigmav::parse_config(text, has_seed == 0);
  });
}

sigmav_status sigmav_run_config_text(const char* text, const char* out_dir, int threads, int has_seed, uint64_t seed,
                                     int* exit_code) {
  return guard([&] {
    need(text, "text");
    need(exit_code, "exit_code");
    *exit_code = 1;
    sigmav::RunConfig cfg = sigmav::parse_config(text, has_seed == 0);
    if (has_seed) cfg.seed = seed;
    if (threads >= 0) cfg.threads = threads;
    const auto outcome = sigmav::run_experiment(cfg, out_dir ? out_dir : "", text);
    *exit_code = outcome.exit_code;
    if (outcome.exit_code == 1) last_error = outcome.error;
  });
}

}  // extern "C"
