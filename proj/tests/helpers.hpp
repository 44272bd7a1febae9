#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "sigmav/model.hpp"

namespace testing {

inline sigmav::PotentialModel chain(sigmav::ModelKind kind, int sites, sigmav::Boundary b = sigmav::Boundary::Fixed,
                                    double lambda = 0.1, double r = 1.0, double u = 1.0) {
  sigmav::PotentialModel::Params p;
  p.lambda = lambda;
  p.r = r;
  p.u = u;
  return sigmav::PotentialModel::make(kind, sigmav::LatticeTopology(1, sites, b), p);
}

inline std::vector<double> random_point(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> q(n);
  for (auto& x : q) x = u(rng);
  return q;
}

inline double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace testing
