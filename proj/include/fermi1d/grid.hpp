#pragma once

// Uniform P1 discretization of the unit interval: grid, nodal functions,
// quadrature, Sobolev norms and the pairings of distributional potentials
// (function + Dirac deltas + constant) and pair interactions.

#include <Eigen/Core>

#include <complex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fermi1d/errors.hpp"

namespace fermi1d {

enum class BoundaryCondition { Neumann, Periodic, AntiPeriodic };

std::string_view to_string(BoundaryCondition bc);
BoundaryCondition parse_boundary_condition(std::string_view name);

/// Sign relating the value at x=1 to the value at x=0 for functions in the
/// form domain: +1 periodic, -1 anti-periodic. Neumann has no constraint and
/// reports +1.
inline double wrap_sign(BoundaryCondition bc) {
  return bc == BoundaryCondition::AntiPeriodic ? -1.0 : 1.0;
}

inline bool is_nonlocal(BoundaryCondition bc) {
  return bc != BoundaryCondition::Neumann;
}

class Grid {
 public:
  explicit Grid(int n_cells);

  int n_cells() const { return n_cells_; }
  int n_nodes() const { return n_cells_ + 1; }
  double h() const { return h_; }
  /// Node coordinate; node(0) == 0 and node(n_cells) == 1 exactly.
  double node(int i) const;
  Eigen::VectorXd nodes() const;
  /// Composite trapezoid weights (h/2 at the ends, h inside).
  Eigen::VectorXd weights() const;

  /// Cell index c and local coordinate t in [0,1] with x = node(c) + t*h.
  std::pair<int, double> locate(double x) const;
  /// Index of the node within h/100 of x, or -1.
  int snap(double x) const;

  bool operator==(const Grid&) const = default;

 private:
  int n_cells_;
  double h_;
};

template <class Scalar>
class BasicGridFunction {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  BasicGridFunction(Grid grid, Vector values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.n_nodes()) {
      throw ValidationError("grid function needs " + std::to_string(grid_.n_nodes()) +
                            " nodal values, got " + std::to_string(values_.size()));
    }
  }

  static BasicGridFunction constant(const Grid& grid, Scalar c) {
    return BasicGridFunction(grid, Vector::Constant(grid.n_nodes(), c));
  }

  template <class F>
  static BasicGridFunction sample(const Grid& grid, F&& f) {
    Vector v(grid.n_nodes());
    for (int i = 0; i < grid.n_nodes(); ++i) v[i] = static_cast<Scalar>(f(grid.node(i)));
    return BasicGridFunction(grid, std::move(v));
  }

  const Grid& grid() const { return grid_; }
  const Vector& values() const { return values_; }
  int size() const { return static_cast<int>(values_.size()); }
  Scalar operator[](int i) const { return values_[i]; }

  /// Value of the piecewise-linear interpolant at x in [0,1].
  Scalar operator()(double x) const {
    auto [c, t] = grid_.locate(x);
    if (t == 0.0) return values_[c];
    return (1.0 - t) * values_[c] + t * values_[c + 1];
  }

  BasicGridFunction operator+(const BasicGridFunction& o) const {
    check_same_grid(o);
    return BasicGridFunction(grid_, values_ + o.values_);
  }
  BasicGridFunction operator-(const BasicGridFunction& o) const {
    check_same_grid(o);
    return BasicGridFunction(grid_, values_ - o.values_);
  }
  BasicGridFunction operator*(Scalar a) const { return BasicGridFunction(grid_, a * values_); }
  friend BasicGridFunction operator*(Scalar a, const BasicGridFunction& f) { return f * a; }

 private:
  void check_same_grid(const BasicGridFunction& o) const {
    if (!(grid_ == o.grid_)) throw ValidationError("grid functions live on different grids");
  }

  Grid grid_;
  Vector values_;
};

using GridFunction = BasicGridFunction<double>;
using ComplexGridFunction = BasicGridFunction<std::complex<double>>;

/// Real function of two variables sampled on the tensor grid; values(i, j)
/// is the value at (node(i), node(j)).
struct PairFunction {
  Grid grid;
  Eigen::MatrixXd values;

  static PairFunction tensor(const GridFunction& f, const GridFunction& g);
};

/// Nodal density with its particle count. Nonnegative nodewise (down to a
/// round-off floor of 1e-12*N) and integrating to N within 1e-10*N.
class Density {
 public:
  Density(GridFunction rho, int particle_count);

  /// Rescales a nonnegative grid function so that it integrates to N.
  static Density normalized(const GridFunction& shape, int particle_count);

  const GridFunction& rho() const { return rho_; }
  const Grid& grid() const { return rho_.grid(); }
  int particle_count() const { return n_; }
  double operator[](int i) const { return rho_[i]; }

 private:
  GridFunction rho_;
  int n_;
};

struct DeltaTerm {
  double position;
  double weight;
};

/// Element of the potential space represented as a regular (nodal, L^1)
/// part, finitely many Dirac deltas and an additive constant. Delta positions
/// within h/100 of a node snap to that node's exact coordinate.
class ExternalPotential {
 public:
  explicit ExternalPotential(GridFunction regular, std::vector<DeltaTerm> deltas = {},
                             double constant = 0.0);

  static ExternalPotential zero(const Grid& grid);

  const Grid& grid() const { return regular_.grid(); }
  const GridFunction& regular() const { return regular_; }
  const std::vector<DeltaTerm>& deltas() const { return deltas_; }
  double constant() const { return constant_; }

  ExternalPotential plus_constant(double c) const;
  ExternalPotential plus_regular(const GridFunction& f) const;
  ExternalPotential operator+(const ExternalPotential& o) const;
  ExternalPotential operator*(double a) const;

 private:
  GridFunction regular_;
  std::vector<DeltaTerm> deltas_;
  double constant_;
};

/// Symmetric pair interaction w(x, y).
class Interaction {
 public:
  enum class Kind { Zero, Convolution, General };

  static Interaction zero();
  /// Even kernel w(s), s in [-1,1], given by m >= 3 (odd) equally spaced
  /// samples with s_k = -1 + 2k/(m-1).
  static Interaction convolution(Eigen::VectorXd samples);
  template <class F>
  static Interaction convolution(F&& w, int n_samples) {
    Eigen::VectorXd s(n_samples);
    for (int k = 0; k < n_samples; ++k) s[k] = w(-1.0 + 2.0 * k / (n_samples - 1));
    return convolution(std::move(s));
  }
  /// Symmetric nodal samples on grid x grid.
  static Interaction general(const Grid& grid, Eigen::MatrixXd values);
  template <class F>
  static Interaction general(const Grid& grid, F&& w) {
    Eigen::MatrixXd m(grid.n_nodes(), grid.n_nodes());
    for (int i = 0; i < grid.n_nodes(); ++i)
      for (int j = 0; j < grid.n_nodes(); ++j) m(i, j) = w(grid.node(i), grid.node(j));
    return general(grid, std::move(m));
  }

  Kind kind() const { return kind_; }
  bool is_zero() const { return kind_ == Kind::Zero; }

  double operator()(double x, double y) const;
  /// Nodal kernel matrix W(i, j) = w(node(i), node(j)).
  Eigen::MatrixXd kernel_matrix(const Grid& grid) const;

  const Eigen::VectorXd& convolution_samples() const { return samples_; }
  const Eigen::MatrixXd& general_values() const { return values_; }
  /// Grid of a General kernel (meaningless for the other kinds).
  const Grid& kernel_grid() const { return kernel_grid_; }

 private:
  Interaction() : kind_(Kind::Zero), kernel_grid_(1) {}
  double convolution_at(double s) const;

  Kind kind_;
  Eigen::VectorXd samples_;
  Eigen::MatrixXd values_;
  Grid kernel_grid_;
};

double integrate(const GridFunction& f);
std::complex<double> integrate(const ComplexGridFunction& f);
double l2_norm(const GridFunction& f);
double mean(const GridFunction& f);
GridFunction zero_mean(const GridFunction& f);

/// ||f||^2_{L^2} + ||f'||^2_{L^2} of the P1 interpolant.
double h1_norm_sq(const GridFunction& f);
double h1_norm_sq(const ComplexGridFunction& f);
/// ||f'||^2_{L^2} only.
double dirichlet_energy(const GridFunction& f);
double dirichlet_energy(const ComplexGridFunction& f);

/// F(x) = (1/N) int_0^x rho, exact for the P1 interpolant of rho.
GridFunction cumulative_F(const Density& rho);

/// v(f) = int regular*f + sum_j alpha_j f(x_j) + c int f.
double pair_external(const ExternalPotential& v, const GridFunction& f);
std::complex<double> pair_external(const ExternalPotential& v, const ComplexGridFunction& f);

/// Two-dimensional trapezoid pairing of w against g.
double pair_interaction(const Interaction& w, const PairFunction& g);

}  // namespace fermi1d
