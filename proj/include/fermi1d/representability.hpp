#pragma once

// Density classes (strictly positive, endpoint-matched, finite-kinetic) and
// the explicit density -> Slater determinant construction.

#include <Eigen/Core>

#include <vector>

#include "fermi1d/grid.hpp"

namespace fermi1d {

struct RepresentabilityReport {
  double integral = 0.0;
  double min_value = 0.0;
  double h1_norm = 0.0;  // ||sqrt(rho)||_{H^1}
  bool endpoint_match = false;
  bool in_RN = false;
  bool in_DN = false;
  bool in_DN_plus = false;
};

/// in_RN: nonnegative, integral within 1e-8 N, and for periodic /
/// anti-periodic conditions rho(0) = rho(1) within 1e-8. in_DN adds
/// min rho > 1e-8 N; in_DN_plus adds the endpoint match for every bc.
RepresentabilityReport classify_density(const Density& rho, BoundaryCondition bc);

/// Periodic needs N odd and anti-periodic N even for the ground-state
/// guarantees; Neumann always passes.
bool parity_ok(BoundaryCondition bc, int particle_count);

/// Throws ValidationError unless rho is in the class an inversion under bc
/// needs (D_N for Neumann, D_N^+ otherwise) and, unless allowed, the parity
/// rule holds.
void require_invertible(const Density& rho, BoundaryCondition bc, bool allow_parity_violation = false);

struct SlaterConstruction {
  std::vector<ComplexGridFunction> orbitals;
  std::vector<double> thetas;  // phase slopes, orbital k is sqrt(rho/N) exp(-i theta_k F)
  /// Overlaps of the continuous construction (P1 rho, exact F), by
  /// per-cell Gauss-Legendre quadrature.
  Eigen::MatrixXcd gram;
  GridFunction density;           // sum_k |orbital_k|^2 at the nodes
  double kinetic = 0.0;           // sum_k ||orbital_k'||^2 of the P1 interpolants
  double kinetic_formula = 0.0;   // ||(sqrt rho)'||^2 + (sum theta^2 / N^3) int rho^3
};

/// Phase slopes: 2 pi k, k = 1..N (Neumann, periodic) or pi k over the N odd
/// integers of smallest modulus, ties towards positive k (anti-periodic).
std::vector<double> slater_phases(BoundaryCondition bc, int particle_count);

SlaterConstruction slater_from_density(const Density& rho, BoundaryCondition bc);

struct KineticBound {
  double t_slater;
  double bound_rhs;  // 1 + ||sqrt(rho)||^2_{H^1}
  double ratio() const { return t_slater / bound_rhs; }
};

KineticBound kinetic_bound_check(const Density& rho, BoundaryCondition bc);

}  // namespace fermi1d
