#pragma once

// N-fermion Hamiltonian H_N(v, w) in a truncated Slater-determinant basis
// built from free single-particle eigenmodes, its ground state, reduced
// densities, the K operator and the rearrangement maps G+-.

#include <Eigen/Core>

#include <cstdint>
#include <memory>
#include <vector>

#include "fermi1d/grid.hpp"
#include "fermi1d/single_particle.hpp"

namespace fermi1d {

/// K lowest free eigenmodes for a boundary condition, trapezoid-orthonormal.
struct SpectralBasis {
  Grid grid;
  BoundaryCondition bc;
  Eigen::MatrixXd modes;          // nodal values, one mode per column
  Eigen::VectorXd free_energies;  // eigenvalues of -Laplacian for each mode
  Eigen::MatrixXd kinetic;        // <phi_a', phi_b'> of the P1 interpolants

  int size() const { return static_cast<int>(modes.cols()); }
  GridFunction mode(int a) const { return GridFunction(grid, modes.col(a)); }
};

using BasisPtr = std::shared_ptr<const SpectralBasis>;

/// Throws ValidationError for K outside [1, min(dimension, 64)], and when the
/// truncation would split a degenerate free level (the basis would then
/// depend on an arbitrary choice inside that level).
BasisPtr build_basis(BoundaryCondition bc, const Grid& grid, int K);

/// All C(K, N) occupation patterns in lexicographic order of their index
/// subsets, with the one-body coupling list.
class SlaterSpace {
 public:
  SlaterSpace(int modes, int particles);

  int modes() const { return modes_; }
  int particles() const { return particles_; }
  int dimension() const { return static_cast<int>(dets_.size()); }
  const std::vector<std::uint64_t>& determinants() const { return dets_; }
  std::vector<int> occupied(int index) const;
  /// Index of a bit pattern or -1.
  int index_of(std::uint64_t mask) const;

  /// <row| a+_a a_b |col> = sign, for every nonzero element (a == b included).
  struct Hop {
    int row;
    int col;
    int a;
    int b;
    double sign;
  };
  const std::vector<Hop>& hops() const { return hops_; }

 private:
  int modes_;
  int particles_;
  std::vector<std::uint64_t> dets_;
  std::vector<std::pair<std::uint64_t, int>> sorted_;
  std::vector<Hop> hops_;
};

using SpacePtr = std::shared_ptr<const SlaterSpace>;

struct ManyBodyProblem {
  BasisPtr basis;
  SpacePtr space;
  int particle_count;
  Eigen::MatrixXd hamiltonian;

  int dimension() const { return static_cast<int>(hamiltonian.rows()); }
};

/// Keeps the interaction part of H_N fixed so that Hamiltonians for many
/// external potentials can be produced cheaply.
class HamiltonianBuilder {
 public:
  HamiltonianBuilder(BasisPtr basis, const Interaction& w, int particle_count);

  const BasisPtr& basis() const { return basis_; }
  const SpacePtr& space() const { return space_; }
  int particle_count() const { return space_->particles(); }

  /// t_ab = <phi_a', phi_b'> + v(phi_a phi_b).
  Eigen::MatrixXd one_body_matrix(const ExternalPotential& v) const;
  /// Many-body matrix of sum_ab t_ab a+_a a_b.
  Eigen::MatrixXd lift_one_body(const Eigen::MatrixXd& t) const;
  ManyBodyProblem build(const ExternalPotential& v) const;
  /// lift_one_body(t) plus the interaction part.
  Eigen::MatrixXd hamiltonian(const Eigen::MatrixXd& t) const;

  /// V(a*K + c, b*K + d) = int int phi_a(x) phi_b(y) w(x,y) phi_c(x) phi_d(y).
  const Eigen::MatrixXd& two_body_table() const { return two_body_; }

 private:
  BasisPtr basis_;
  SpacePtr space_;
  Eigen::MatrixXd two_body_;
  Eigen::MatrixXd interaction_part_;
};

ManyBodyProblem assemble_HN(const ExternalPotential& v, const Interaction& w, BasisPtr basis,
                            int particle_count);

class WaveFunction {
 public:
  /// coeffs must be a unit vector (within 1e-12) over space->determinants().
  WaveFunction(BasisPtr basis, SpacePtr space, Eigen::VectorXd coeffs);

  /// Single determinant of the listed basis modes.
  static WaveFunction determinant(BasisPtr basis, std::vector<int> occupied_modes);

  const BasisPtr& basis() const { return basis_; }
  const SpacePtr& space() const { return space_; }
  const Eigen::VectorXd& coeffs() const { return coeffs_; }
  int particle_count() const { return space_->particles(); }

 private:
  BasisPtr basis_;
  SpacePtr space_;
  Eigen::VectorXd coeffs_;
};

struct GroundState {
  double energy;
  double gap;  // +inf for a one-dimensional Slater space
  WaveFunction psi;
};

/// Full spectrum with canonicalized eigenvectors (columns).
struct ManyBodySpectrum {
  Eigen::VectorXd energies;
  Eigen::MatrixXd vectors;
};

ManyBodySpectrum diagonalize(const ManyBodyProblem& p);
GroundState ground_state(const ManyBodyProblem& p);

/// Gamma_ab = <bra| a+_a a_b |ket>.
Eigen::MatrixXd transition_one_rdm(const SlaterSpace& space, const Eigen::VectorXd& bra,
                                   const Eigen::VectorXd& ket);
Eigen::MatrixXd one_rdm(const WaveFunction& psi);
/// G(a*K + c, b*K + d) = <a+_a a+_b a_d a_c>.
Eigen::MatrixXd two_rdm(const WaveFunction& psi);

/// Nodal density sum_ab Gamma_ab phi_a phi_b of a K x K one-body matrix.
GridFunction density_from_rdm(const SpectralBasis& basis, const Eigen::MatrixXd& gamma);

Density density(const WaveFunction& psi);
PairFunction pair_density(const WaveFunction& psi);

/// Densities counted as strictly positive when min rho > kPositivityFloor * N.
inline constexpr double kPositivityFloor = 1e-8;

/// (K f)(x) = int rho2(x,y) / rho(y) f(y) dy.
GridFunction apply_K(const GridFunction& f, const WaveFunction& psi);

/// Rearrangement G+- with shift x_star in (0,1). On a grid function the
/// value at x is (+-1)^m f([x + x_star]) with m the number of wraps; on
/// potentials and interactions it acts through the sign-free adjoint, i.e.
/// a translation of every feature by +x_star modulo 1 (the sign argument is
/// validated but does not enter).
GridFunction rearrange_G(int sign, double x_star, const GridFunction& f);
ExternalPotential rearrange_G(int sign, double x_star, const ExternalPotential& v);
Interaction rearrange_G(int sign, double x_star, const Interaction& w);

}  // namespace fermi1d
