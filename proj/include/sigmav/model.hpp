#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace sigmav {

enum class Boundary { Fixed, Periodic };

/// One pair interaction. Endpoint value kWall stands for a pinned coordinate at 0.
/// The bond variable is q[b] - q[a].
struct Bond {
  static constexpr int kWall = -1;
  int a;
  int b;
};

/// Hypercubic lattice of m^d sites with one real degree of freedom per site.
class LatticeTopology {
 public:
  LatticeTopology(int dimension, int sites_per_side, Boundary boundary);

  int dimension() const noexcept { return dimension_; }
  int sites_per_side() const noexcept { return sites_per_side_; }
  Boundary boundary() const noexcept { return boundary_; }
  int degrees_per_site() const noexcept { return 1; }
  std::size_t size() const noexcept { return size_; }

  std::span<const Bond> bonds() const noexcept { return bonds_; }
  std::span<const int> neighbors(std::size_t site) const;
  /// Bond ids touching a site.
  std::span<const int> incident_bonds(std::size_t site) const;
  /// n_p: the largest number of neighbors any site can have for this dimension.
  int max_neighbors() const noexcept { return 2 * dimension_; }

 private:
  int dimension_;
  int sites_per_side_;
  Boundary boundary_;
  std::size_t size_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<int>> neighbors_;
  std::vector<std::vector<int>> incident_;
};

enum class ModelKind { Harmonic, CoupledRotators, FPU, Phi4, Linear };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

/// Symmetric Hessian with nonzeros on the diagonal and on bonded pairs only.
class SparseHessian {
 public:
  struct Entry {
    int i;
    int j;
    double value;
  };

  explicit SparseHessian(std::size_t n) : diag_(n, 0.0) {}

  std::size_t size() const noexcept { return diag_.size(); }
  std::span<const double> diagonal() const noexcept { return diag_; }
  std::span<const Entry> off_diagonal() const noexcept { return off_; }

  void add_diagonal(int i, double v) { diag_[i] += v; }
  /// Adds v to (i,j) and (j,i); i != j.
  void add_pair(int i, int j, double v) { off_.push_back({i, j, v}); }

  double trace() const;
  double at(std::size_t i, std::size_t j) const;
  void multiply(std::span<const double> x, std::span<double> out) const;
  /// Row-major dense copy.
  std::vector<double> dense() const;

 private:
  std::vector<double> diag_;
  std::vector<Entry> off_;
};

/// Contractions of the third-derivative tensor with the gradient that the
/// integrand formulas need; both are O(N) on a lattice.
struct ThirdContractions {
  double grad_dot_trace;  ///< sum_ij g_i d3_ijj V
  double grad_cubed;      ///< sum_ijk g_i g_j g_k d3_ijk V
};

/// A short-range lattice potential
///   V(q) = sum_bonds pair(q_b - q_a) + sum_sites onsite(q_i)
/// with exact derivatives through third order. Immutable after construction.
class PotentialModel {
 public:
  struct Params {
    double lambda = 0.0;  ///< FPU quartic coupling
    double r = 0.0;       ///< phi^4 quadratic coefficient (may be negative)
    double u = 0.0;       ///< phi^4 quartic coefficient
    double slope = 1.0;   ///< linear test potential slope
  };

  static PotentialModel harmonic(LatticeTopology topology);
  static PotentialModel rotators(LatticeTopology topology);
  static PotentialModel fpu(LatticeTopology topology, double lambda);
  static PotentialModel phi4(LatticeTopology topology, double r, double u);
  /// V = slope * sum_i q_i. Zero Hessian everywhere; only for exercising
  /// degenerate geometry paths, not a stable potential.
  static PotentialModel linear(LatticeTopology topology, double slope = 1.0);
  static PotentialModel make(ModelKind kind, LatticeTopology topology, const Params& params);

  ModelKind kind() const noexcept { return kind_; }
  const Params& params() const noexcept { return params_; }
  const LatticeTopology& topology() const noexcept { return topology_; }
  std::size_t size() const noexcept { return topology_.size(); }
  /// Coordinates are angles (configuration space is a torus).
  bool is_angular() const noexcept { return kind_ == ModelKind::CoupledRotators; }
  /// B such that V(q) >= -N B.
  double stability_bound() const;
  std::string describe() const;

  double energy(std::span<const double> q) const;
  void gradient(std::span<const double> q, std::span<double> out) const;
  std::vector<double> gradient(std::span<const double> q) const;
  SparseHessian hessian(std::span<const double> q) const;
  double third_partial(std::span<const double> q, int i, int j, int k) const;
  ThirdContractions third_contractions(std::span<const double> q, std::span<const double> g) const;

  /// Maps angular coordinates to (-pi, pi]; identity for non-angular models.
  void wrap(std::span<double> q) const;

 private:
  struct Derivs {
    double f, d1, d2, d3;
  };

  PotentialModel(ModelKind kind, LatticeTopology topology, Params params);
  Derivs pair(double x) const;
  Derivs onsite(double x) const;
  bool has_pair() const noexcept;
  bool has_onsite() const noexcept;
  double bond_delta(std::span<const double> q, const Bond& bond) const;
  void check_size(std::span<const double> q) const;

  ModelKind kind_;
  LatticeTopology topology_;
  Params params_;
};

double wrap_angle(double x);

}  // namespace sigmav
