#pragma once

// Density-to-potential inversion by maximizing the concave dual
//   D(v) = lambda_1(v, w) - v(rho_target)
// over a finite space of zero-mean potentials.
//
// Two ground-state models back the dual:
//  * GridModel: non-interacting N fermions on the full P1 grid (used when
//    w is Zero); the unknown is the nodal potential.
//  * GalerkinModel: interacting N fermions in the K-mode Slater space; the
//    unknown ranges over the zero-mean span of products phi_i phi_a with i
//    among the N lowest free modes (closed to a full level). Potential
//    components beyond that span move the density by O(1e-7) or less and
//    cannot be pinned down in double precision.

#include <Eigen/Core>

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fermi1d/grid.hpp"
#include "fermi1d/many_body.hpp"

namespace fermi1d {

struct ModelEvaluation {
  double energy = 0.0;
  GridFunction density = GridFunction::constant(Grid(1), 0.0);
  Eigen::VectorXd pairing;   // <e_j, density>
  double gap = 0.0;
  bool degenerate = false;   // averaged over a degenerate ground level
  Eigen::MatrixXd hessian;   // d^2 energy / dc_i dc_j, empty unless requested
};

class GroundStateModel {
 public:
  virtual ~GroundStateModel() = default;

  virtual const Grid& grid() const = 0;
  virtual int particle_count() const = 0;
  virtual int dimension() const = 0;

  /// Nodal potential sum_j c_j e_j.
  virtual GridFunction potential(const Eigen::VectorXd& c) const = 0;
  /// <e_j, f> for every direction.
  virtual Eigen::VectorXd pair(const GridFunction& f) const = 0;
  /// Coordinates of a nodal potential (projected onto the search space).
  virtual Eigen::VectorXd coordinates(const GridFunction& v) const = 0;
  /// Same potential with the additive constant removed.
  virtual Eigen::VectorXd gauge(const Eigen::VectorXd& c) const = 0;
  /// L^2 norm of the projection onto the search space of the function
  /// whose pairings are g.
  virtual double residual_norm(const Eigen::VectorXd& g) const = 0;

  virtual ModelEvaluation evaluate(const Eigen::VectorXd& c, bool with_hessian) const = 0;
  /// Ground energy and density for an arbitrary potential (no Hessian).
  virtual ModelEvaluation evaluate(const ExternalPotential& v) const = 0;
};

class GridModel final : public GroundStateModel {
 public:
  GridModel(const Grid& grid, BoundaryCondition bc, int particle_count);

  const Grid& grid() const override { return grid_; }
  int particle_count() const override { return n_; }
  int dimension() const override { return static_cast<int>(mass_.size()); }
  GridFunction potential(const Eigen::VectorXd& c) const override;
  Eigen::VectorXd pair(const GridFunction& f) const override;
  Eigen::VectorXd coordinates(const GridFunction& v) const override;
  Eigen::VectorXd gauge(const Eigen::VectorXd& c) const override;
  double residual_norm(const Eigen::VectorXd& g) const override;
  ModelEvaluation evaluate(const Eigen::VectorXd& c, bool with_hessian) const override;
  ModelEvaluation evaluate(const ExternalPotential& v) const override;

 private:
  Grid grid_;
  BoundaryCondition bc_;
  int n_;
  Eigen::MatrixXd stiffness_;
  Eigen::VectorXd mass_;
};

class GalerkinModel final : public GroundStateModel {
 public:
  GalerkinModel(BasisPtr basis, const Interaction& w, int particle_count);

  const Grid& grid() const override { return builder_.basis()->grid; }
  int particle_count() const override { return builder_.particle_count(); }
  int dimension() const override { return static_cast<int>(directions_.cols()); }
  GridFunction potential(const Eigen::VectorXd& c) const override;
  Eigen::VectorXd pair(const GridFunction& f) const override;
  Eigen::VectorXd coordinates(const GridFunction& v) const override;
  Eigen::VectorXd gauge(const Eigen::VectorXd& c) const override { return c; }
  double residual_norm(const Eigen::VectorXd& g) const override { return g.norm(); }
  ModelEvaluation evaluate(const Eigen::VectorXd& c, bool with_hessian) const override;
  ModelEvaluation evaluate(const ExternalPotential& v) const override;

  /// The nodal function in span{1, phi_a phi_b} producing the same one-body
  /// matrix as v (deltas included), as a potential with that constant.
  ExternalPotential visible_part(const ExternalPotential& v) const;

  const HamiltonianBuilder& builder() const { return builder_; }
  /// Trapezoid-orthonormal zero-mean search directions, one per column.
  const Eigen::MatrixXd& directions() const { return directions_; }
  /// Same for the whole product span.
  const Eigen::MatrixXd& span() const { return span_; }

 private:
  ModelEvaluation finish(const Eigen::MatrixXd& hamiltonian, bool with_hessian) const;

  HamiltonianBuilder builder_;
  Eigen::MatrixXd directions_;
  Eigen::MatrixXd span_;
  std::vector<Eigen::MatrixXd> one_body_;  // K x K matrix of each direction
};

struct InversionProblem {
  Density target;
  Interaction w = Interaction::zero();
  BoundaryCondition bc = BoundaryCondition::Neumann;
  BasisPtr basis;  // required when w is not Zero
  int max_iters = 200;
  double grad_tol = 1e-7;   // on the projected L^2 density residual
  double armijo = 1e-4;
  int max_backtracks = 40;
  double max_step = 50.0;   // sup norm cap of a single potential update
  bool allow_parity_violation = false;
};

std::unique_ptr<GroundStateModel> make_model(const InversionProblem& prob);

struct InversionResult {
  ExternalPotential v = ExternalPotential::zero(Grid(1));  // zero-mean regular part only
  double lambda1 = 0.0;
  double objective = 0.0;
  std::vector<double> residual_history;   // projected onto the search space
  double density_residual = 0.0;          // full nodal L^2 norm at the end
  std::vector<double> objective_history;
  int iterations = 0;
  bool converged = false;
  double gap = 0.0;
  bool degenerate = false;
  GridFunction density = GridFunction::constant(Grid(1), 0.0);  // model ground density at v
  std::string message;
};

struct DualValue {
  double value;
  GridFunction supergradient;  // zero-mean rho_v - rho_target
};

DualValue dual_objective(const GridFunction& v, const InversionProblem& prob);

/// Newton ascent on the dual with exact second-order eigenvalue
/// perturbation curvature, pseudo-inverse on flat directions, Armijo
/// backtracking and a gradient fallback. Throws ValidationError when the
/// target is outside the class the boundary condition needs.
InversionResult invert(const InversionProblem& prob, const std::optional<GridFunction>& v0 = std::nullopt);
/// Same, with an already constructed model (reused across calls).
InversionResult invert(const InversionProblem& prob, const GroundStateModel& model,
                       const std::optional<GridFunction>& v0 = std::nullopt);

/// Maximizer of the local quadratic model g.d + d.H d / 2 for a negative
/// semidefinite H, pseudo-inverting directions flatter than 1e-12 of the
/// steepest one.
Eigen::VectorXd ascent_step(const Eigen::MatrixXd& hessian, const Eigen::VectorXd& g);

struct HKReport {
  double max_deviation;
  std::vector<InversionResult> runs;
};

/// Inverts from every seed; max over pairs of sup |v_i - v_j| (zero mean).
HKReport hk_uniqueness_check(const InversionProblem& prob, const std::vector<GridFunction>& seeds);

}  // namespace fermi1d
