#include "sigmav/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "sigmav/error.hpp"

namespace sigmav {

LatticeTopology::LatticeTopology(int dimension, int sites_per_side, Boundary boundary)
    : dimension_(dimension), sites_per_side_(sites_per_side), boundary_(boundary) {
  if (dimension != 1 && dimension != 2) throw ContractError("lattice dimension must be 1 or 2");
  if (sites_per_side < 1) throw ContractError("sites_per_side must be >= 1");
  if (boundary == Boundary::Periodic && sites_per_side < 2)
    throw ContractError("periodic lattice needs at least 2 sites per side");

  const int m = sites_per_side;
  size_ = dimension == 1 ? static_cast<std::size_t>(m) : static_cast<std::size_t>(m) * m;
  auto site = [m](int x, int y) { return y * m + x; };
  const int rows = dimension == 1 ? 1 : m;

  // Bonds along x for every row, then along y for every column (2D only).
  for (int axis = 0; axis < dimension; ++axis) {
    for (int line = 0; line < rows; ++line) {
      auto at = [&](int k) { return axis == 0 ? site(k, line) : site(line, k); };
      if (boundary == Boundary::Fixed) {
        bonds_.push_back({Bond::kWall, at(0)});
        for (int k = 0; k + 1 < m; ++k) bonds_.push_back({at(k), at(k + 1)});
        bonds_.push_back({at(m - 1), Bond::kWall});
      } else {
        for (int k = 0; k < m; ++k) bonds_.push_back({at(k), at((k + 1) % m)});
      }
    }
  }

  neighbors_.assign(size_, {});
  incident_.assign(size_, {});
  for (std::size_t id = 0; id < bonds_.size(); ++id) {
    const Bond& bd = bonds_[id];
    if (bd.a != Bond::kWall) incident_[bd.a].push_back(static_cast<int>(id));
    if (bd.b != Bond::kWall) incident_[bd.b].push_back(static_cast<int>(id));
    if (bd.a != Bond::kWall && bd.b != Bond::kWall && bd.a != bd.b) {
      neighbors_[bd.a].push_back(bd.b);
      neighbors_[bd.b].push_back(bd.a);
    }
  }
  for (auto& nb : neighbors_) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
}

std::span<const int> LatticeTopology::neighbors(std::size_t site) const {
  if (site >= size_) throw ContractError("site index out of range");
  return neighbors_[site];
}

std::span<const int> LatticeTopology::incident_bonds(std::size_t site) const {
  if (site >= size_) throw ContractError("site index out of range");
  return incident_[site];
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Harmonic: return "harmonic";
    case ModelKind::CoupledRotators: return "rotators";
    case ModelKind::FPU: return "fpu";
    case ModelKind::Phi4: return "phi4";
    case ModelKind::Linear: return "linear";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "harmonic") return ModelKind::Harmonic;
  if (name == "rotators") return ModelKind::CoupledRotators;
  if (name == "fpu") return ModelKind::FPU;
  if (name == "phi4") return ModelKind::Phi4;
  if (name == "linear") return ModelKind::Linear;
  throw ContractError("unknown model kind '" + name + "'");
}

double SparseHessian::trace() const {
  double t = 0.0;
  for (double d : diag_) t += d;
  return t;
}

double SparseHessian::at(std::size_t i, std::size_t j) const {
  if (i >= size() || j >= size()) throw ContractError("hessian index out of range");
  if (i == j) return diag_[i];
  double v = 0.0;
  for (const auto& e : off_)
    if ((static_cast<std::size_t>(e.i) == i && static_cast<std::size_t>(e.j) == j) ||
        (static_cast<std::size_t>(e.i) == j && static_cast<std::size_t>(e.j) == i))
      v += e.value;
  return v;
}

void SparseHessian::multiply(std::span<const double> x, std::span<double> out) const {
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) out[i] = diag_[i] * x[i];
  for (const auto& e : off_) {
    out[e.i] += e.value * x[e.j];
    out[e.j] += e.value * x[e.i];
  }
}

std::vector<double> SparseHessian::dense() const {
  const std::size_t n = size();
  std::vector<double> m(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) m[i * n + i] = diag_[i];
  for (const auto& e : off_) {
    m[static_cast<std::size_t>(e.i) * n + e.j] += e.value;
    m[static_cast<std::size_t>(e.j) * n + e.i] += e.value;
  }
  return m;
}

PotentialModel::PotentialModel(ModelKind kind, LatticeTopology topology, Params params)
    : kind_(kind), topology_(std::move(topology)), params_(params) {}

PotentialModel PotentialModel::harmonic(LatticeTopology topology) {
  return {ModelKind::Harmonic, std::move(topology), {}};
}

PotentialModel PotentialModel::rotators(LatticeTopology topology) {
  return {ModelKind::CoupledRotators, std::move(topology), {}};
}

PotentialModel PotentialModel::fpu(LatticeTopology topology, double lambda) {
  if (!(lambda >= 0.0)) throw ContractError("FPU coupling lambda must be >= 0");
  Params p;
  p.lambda = lambda;
  return {ModelKind::FPU, std::move(topology), p};
}

PotentialModel PotentialModel::phi4(LatticeTopology topology, double r, double u) {
  if (!(u > 0.0)) throw ContractError("phi4 quartic coefficient u must be > 0");
  Params p;
  p.r = r;
  p.u = u;
  return {ModelKind::Phi4, std::move(topology), p};
}

PotentialModel PotentialModel::linear(LatticeTopology topology, double slope) {
  Params p;
  p.slope = slope;
  return {ModelKind::Linear, std::move(topology), p};
}

PotentialModel PotentialModel::make(ModelKind kind, LatticeTopology topology, const Params& params) {
  switch (kind) {
    case ModelKind::Harmonic: return harmonic(std::move(topology));
    case ModelKind::CoupledRotators: return rotators(std::move(topology));
    case ModelKind::FPU: return fpu(std::move(topology), params.lambda);
    case ModelKind::Phi4: return phi4(std::move(topology), params.r, params.u);
    case ModelKind::Linear: return linear(std::move(topology), params.slope);
  }
  throw ContractError("unknown model kind");
}

double PotentialModel::stability_bound() const {
  switch (kind_) {
    case ModelKind::Phi4:
      // On-site minimum of (r/2)x^2 + (u/4)x^4 is -r^2/(4u) when r < 0.
      return params_.r < 0.0 ? params_.r * params_.r / (4.0 * params_.u) : 0.0;
    case ModelKind::Linear: return std::numeric_limits<double>::infinity();
    default: return 0.0;
  }
}

std::string PotentialModel::describe() const {
  std::ostringstream os;
  os << to_string(kind_) << " d=" << topology_.dimension() << " m=" << topology_.sites_per_side()
     << (topology_.boundary() == Boundary::Fixed ? " fixed" : " periodic") << " N=" << size();
  if (kind_ == ModelKind::FPU) os << " lambda=" << params_.lambda;
  if (kind_ == ModelKind::Phi4) os << " r=" << params_.r << " u=" << params_.u;
  if (kind_ == ModelKind::Linear) os << " slope=" << params_.slope;
  return os.str();
}

bool PotentialModel::has_pair() const noexcept {
  return kind_ == ModelKind::CoupledRotators || kind_ == ModelKind::FPU || kind_ == ModelKind::Phi4;
}

bool PotentialModel::has_onsite() const noexcept {
  return kind_ == ModelKind::Harmonic || kind_ == ModelKind::Phi4 || kind_ == ModelKind::Linear;
}

PotentialModel::Derivs PotentialModel::pair(double x) const {
  switch (kind_) {
    case ModelKind::CoupledRotators: {
      const double s = std::sin(x), c = std::cos(x);
      return {1.0 - c, s, c, -s};
    }
    case ModelKind::FPU: {
      const double l = params_.lambda, x2 = x * x;
      return {0.5 * x2 + 0.25 * l * x2 * x2, x + l * x2 * x, 1.0 + 3.0 * l * x2, 6.0 * l * x};
    }
    case ModelKind::Phi4: return {0.5 * x * x, x, 1.0, 0.0};
    default: return {0.0, 0.0, 0.0, 0.0};
  }
}

PotentialModel::Derivs PotentialModel::onsite(double x) const {
  switch (kind_) {
    case ModelKind::Harmonic: return {0.5 * x * x, x, 1.0, 0.0};
    case ModelKind::Phi4: {
      const double r = params_.r, u = params_.u, x2 = x * x;
      return {0.5 * r * x2 + 0.25 * u * x2 * x2, r * x + u * x2 * x, r + 3.0 * u * x2, 6.0 * u * x};
    }
    case ModelKind::Linear: return {params_.slope * x, params_.slope, 0.0, 0.0};
    default: return {0.0, 0.0, 0.0, 0.0};
  }
}

void PotentialModel::check_size(std::span<const double> q) const {
  if (q.size() != size())
    throw ContractError("configuration has length " + std::to_string(q.size()) + ", model expects " +
                        std::to_string(size()));
}

double PotentialModel::bond_delta(std::span<const double> q, const Bond& bond) const {
  const double qa = bond.a == Bond::kWall ? 0.0 : q[bond.a];
  const double qb = bond.b == Bond::kWall ? 0.0 : q[bond.b];
  return qb - qa;
}

double PotentialModel::energy(std::span<const double> q) const {
  check_size(q);
  double v = 0.0;
  if (has_pair())
    for (const Bond& bd : topology_.bonds()) v += pair(bond_delta(q, bd)).f;
  if (has_onsite())
    for (double x : q) v += onsite(x).f;
  return v;
}

void PotentialModel::gradient(std::span<const double> q, std::span<double> out) const {
  check_size(q);
  if (out.size() != size()) throw ContractError("gradient output has wrong length");
  std::fill(out.begin(), out.end(), 0.0);
  if (has_pair()) {
    for (const Bond& bd : topology_.bonds()) {
      const double f1 = pair(bond_delta(q, bd)).d1;
      if (bd.b != Bond::kWall) out[bd.b] += f1;
      if (bd.a != Bond::kWall) out[bd.a] -= f1;
    }
  }
  if (has_onsite())
    for (std::size_t i = 0; i < q.size(); ++i) out[i] += onsite(q[i]).d1;
}

std::vector<double> PotentialModel::gradient(std::span<const double> q) const {
  std::vector<double> g(size());
  gradient(q, g);
  return g;
}

SparseHessian PotentialModel::hessian(std::span<const double> q) const {
  check_size(q);
  SparseHessian h(size());
  if (has_pair()) {
    for (const Bond& bd : topology_.bonds()) {
      const double f2 = pair(bond_delta(q, bd)).d2;
      if (bd.a != Bond::kWall) h.add_diagonal(bd.a, f2);
      if (bd.b != Bond::kWall) h.add_diagonal(bd.b, f2);
      if (bd.a != Bond::kWall && bd.b != Bond::kWall) {
        if (bd.a == bd.b) continue;
        h.add_pair(bd.a, bd.b, -f2);
      }
    }
  }
  if (has_onsite())
    for (std::size_t i = 0; i < q.size(); ++i) h.add_diagonal(static_cast<int>(i), onsite(q[i]).d2);
  return h;
}

double PotentialModel::third_partial(std::span<const double> q, int i, int j, int k) const {
  check_size(q);
  const int n = static_cast<int>(size());
  if (i < 0 || j < 0 || k < 0 || i >= n || j >= n || k >= n)
    throw ContractError("third_partial index out of range");
  double v = 0.0;
  if (has_pair()) {
    for (int id : topology_.incident_bonds(i)) {
      const Bond& bd = topology_.bonds()[id];
      // d(delta)/dq_b = +1, d(delta)/dq_a = -1; a self-bond has delta = 0 identically.
      auto sign = [&](int s) { return s == bd.b ? 1.0 : (s == bd.a ? -1.0 : 0.0); };
      if (bd.a == bd.b) continue;
      const double s = sign(i) * sign(j) * sign(k);
      if (s != 0.0) v += s * pair(bond_delta(q, bd)).d3;
    }
  }
  if (has_onsite() && i == j && j == k) v += onsite(q[i]).d3;
  return v;
}

ThirdContractions PotentialModel::third_contractions(std::span<const double> q,
                                                     std::span<const double> g) const {
  check_size(q);
  ThirdContractions t{0.0, 0.0};
  if (has_pair()) {
    for (const Bond& bd : topology_.bonds()) {
      if (bd.a == bd.b) continue;
      const double f3 = pair(bond_delta(q, bd)).d3;
      const double gb = bd.b == Bond::kWall ? 0.0 : g[bd.b];
      const double ga = bd.a == Bond::kWall ? 0.0 : g[bd.a];
      const double dg = gb - ga;
      const int ends = (bd.a != Bond::kWall) + (bd.b != Bond::kWall);
      t.grad_dot_trace += f3 * dg * ends;
      t.grad_cubed += f3 * dg * dg * dg;
    }
  }
  if (has_onsite()) {
    for (std::size_t i = 0; i < q.size(); ++i) {
      const double f3 = onsite(q[i]).d3;
      t.grad_dot_trace += f3 * g[i];
      t.grad_cubed += f3 * g[i] * g[i] * g[i];
    }
  }
  return t;
}

double wrap_angle(double x) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double y = std::fmod(x + std::numbers::pi, two_pi);
  if (y <= 0.0) y += two_pi;
  return y - std::numbers::pi;
}

void PotentialModel::wrap(std::span<double> q) const {
  if (!is_angular()) return;
  for (double& x : q) x = wrap_angle(x);
}

}  // namespace sigmav
