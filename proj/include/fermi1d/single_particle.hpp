#pragma once

// Single-particle operator h(v) = -Laplacian + v assembled from its quadratic
// form on P1 elements, for Neumann, periodic and anti-periodic form domains.

#include <Eigen/Core>

#include <vector>

#include "fermi1d/grid.hpp"

namespace fermi1d {

/// Number of degrees of freedom: n+1 for Neumann, n when the endpoint values
/// are identified (with sign +1 / -1).
int dof_count(const Grid& grid, BoundaryCondition bc);

/// Nodal values from a degree-of-freedom vector (appends +-u[0] for
/// periodic / anti-periodic).
Eigen::VectorXd expand_dofs(const Grid& grid, BoundaryCondition bc, const Eigen::VectorXd& u);

/// Stiffness and (diagonal, trapezoid-lumped) mass matrix of the quadratic
/// form  int |u'|^2 + v(|u|^2)  restricted to the chosen form domain.
struct SingleParticleOperator {
  Grid grid;
  BoundaryCondition bc;
  Eigen::MatrixXd stiffness;
  Eigen::VectorXd mass;

  int dimension() const { return static_cast<int>(mass.size()); }
};

SingleParticleOperator assemble_h(const ExternalPotential& v, BoundaryCondition bc);
SingleParticleOperator assemble_h(const ExternalPotential& v, BoundaryCondition bc, const Grid& grid);

struct EigenSolution {
  Grid grid;
  BoundaryCondition bc;
  Eigen::VectorXd eigenvalues;
  /// Mass-orthonormal eigenvectors as columns over the degrees of freedom.
  Eigen::MatrixXd dof_vectors;
  /// The same eigenvectors as nodal grid functions.
  std::vector<GridFunction> eigenvectors;

  int size() const { return static_cast<int>(eigenvalues.size()); }
};

/// The k lowest generalized eigenpairs, ascending. Vectors inside a cluster
/// of (numerically) equal eigenvalues are rotated into a canonical basis and
/// every vector is signed so that its largest-magnitude component is
/// positive, making the output independent of the dense solver's choices.
EigenSolution eigensolve_lowest(const SingleParticleOperator& op, int k);

/// Multiplicities of the eigenvalue clusters (consecutive gaps below tol).
std::vector<int> degeneracy_profile(const EigenSolution& sol, double tol = 1e-6);
std::vector<int> cluster_sizes(const Eigen::VectorXd& ascending, double tol);

/// Canonical rotation inside degenerate clusters plus sign fixing for
/// columns of `vectors` that are orthonormal in the Euclidean metric of
/// their coefficients. Used by both the single-particle and many-body
/// solvers.
void canonicalize_eigenvectors(const Eigen::VectorXd& eigenvalues, Eigen::MatrixXd& vectors,
                               double cluster_tol);

/// Absolute tolerance below which two eigenvalues are treated as one
/// cluster for phase fixing.
inline constexpr double kPhaseClusterTol = 1e-9;

/// Non-interacting N-particle ground state built from the lowest orbitals
/// of an assembled operator. A Fermi level that splits a degenerate shell
/// (gap below kGapTol) is filled fractionally, giving the average density
/// over the degenerate ground eigenspace.
struct OrbitalFilling {
  EigenSolution orbitals;        // at least every orbital up to the Fermi shell plus one
  Eigen::VectorXd occupations;   // one per orbital in `orbitals`
  GridFunction density;
  double energy = 0.0;           // sum of occupied eigenvalues
  double gap = 0.0;              // eps_{N+1} - eps_N
  bool degenerate = false;
};

inline constexpr double kGapTol = 1e-8;

OrbitalFilling fill_lowest(const SingleParticleOperator& op, int particle_count);

}  // namespace fermi1d
