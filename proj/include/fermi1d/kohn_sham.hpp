#pragma once

// Exact density functionals by inversion, and the exact-xc Kohn-Sham loop.
//
// F_LL comes from the model that matches w (GalerkinModel for w != 0, the
// grid model otherwise) and T_KS from the grid model, so
//   E_xc = F_LL - T_KS - E_H
// also carries the difference between the two discretizations of the
// kinetic energy. It cancels in the KS total energy.

#include <Eigen/Core>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fermi1d/inversion.hpp"

namespace fermi1d {

struct FunctionalOptions {
  BasisPtr basis;            // needed for w != 0
  double grad_tol = 1e-8;
  int max_iters = 200;
  bool allow_parity_violation = false;
  int threads = 0;           // 0: FERMI1D_THREADS, else hardware concurrency
};

/// Thread cap: `requested` if positive, otherwise FERMI1D_THREADS, otherwise
/// the hardware concurrency (at least 1).
int thread_budget(int requested = 0);

struct FllValue {
  double value;
  InversionResult inversion;  // v_int (or v_ks for w = Zero) and diagnostics
};

/// lambda_1(v_int, w) - v_int(rho) at the inverted potential.
FllValue f_ll(const Density& rho, const Interaction& w, BoundaryCondition bc, const FunctionalOptions& opt = {},
              const std::optional<GridFunction>& v0 = std::nullopt);
FllValue t_ks(const Density& rho, BoundaryCondition bc, const FunctionalOptions& opt = {},
              const std::optional<GridFunction>& v0 = std::nullopt);

double e_h(const Density& rho, const Interaction& w);
/// v_h(x) = int [w(x,y) + w(y,x)] rho(y) dy at the nodes.
GridFunction v_h(const GridFunction& rho, const Interaction& w);

struct FunctionalValue {
  double f_ll = 0.0;
  double t_ks = 0.0;
  double e_h = 0.0;
  double e_xc = 0.0;
  InversionResult interacting;      // v_int
  InversionResult non_interacting;  // v_ks
  GridFunction v_h = GridFunction::constant(Grid(1), 0.0);
  GridFunction v_xc = GridFunction::constant(Grid(1), 0.0);  // zero mean
};

/// Both inversions (run concurrently when the thread budget allows), then
/// e_xc = f_ll - t_ks - e_h and v_xc = v_ks - v_h - v_int (zero mean).
/// Throws NumericalError if either inversion fails to converge.
FunctionalValue e_xc(const Density& rho, const Interaction& w, BoundaryCondition bc, const FunctionalOptions& opt = {},
                     const std::optional<GridFunction>& v_int0 = std::nullopt,
                     const std::optional<GridFunction>& v_ks0 = std::nullopt);
GridFunction v_xc(const Density& rho, const Interaction& w, BoundaryCondition bc, const FunctionalOptions& opt = {});

enum class Aufbau { Ok, Indeterminate };
std::string_view to_string(Aufbau a);

struct ScfStep {
  int iteration;
  double residual;  // ||rho_out - rho_k||_{L^2}
  double energy;    // F_LL(rho_k) + v(rho_k)
};

struct KSOptions {
  BasisPtr basis;            // needed for w != 0
  double mixing = 0.5;
  int max_iters = 100;
  double tol = 1e-6;
  double inner_tol = 1e-8;
  int start_iters = 50;      // budget for the interacting start-up inversion
  bool allow_parity_violation = false;
  int threads = 0;
};

struct KSResult {
  std::vector<GridFunction> orbitals;  // N lowest, trapezoid-orthonormal
  Eigen::VectorXd orbital_eigenvalues; // N + 1 lowest, ascending
  Density density = Density(GridFunction::constant(Grid(1), 1.0), 1);  // sum of |orbital|^2
  GridFunction v_xc = GridFunction::constant(Grid(1), 0.0);
  GridFunction v_h = GridFunction::constant(Grid(1), 0.0);
  std::vector<ScfStep> trace;
  bool converged = false;
  Aufbau aufbau = Aufbau::Indeterminate;
  bool aufbau_ok = false;
  double energy = 0.0;  // T_KS + E_H + E_xc + v(rho) at the last iterate
  double t_ks = 0.0, e_h = 0.0, e_xc = 0.0, external = 0.0;
  int iterations = 0;
  std::string message;
};

/// Inner inversion failure inside the loop, with the iterate it failed on.
class ScfError : public NumericalError {
 public:
  ScfError(const std::string& what, int iteration, GridFunction density)
      : NumericalError(what), iteration_(iteration), density_(std::move(density)) {}
  int iteration() const { return iteration_; }
  const GridFunction& density() const { return density_; }

 private:
  int iteration_;
  GridFunction density_;
};

/// Exact-xc Kohn-Sham iteration. Every iterate is the interacting ground
/// density of a potential u_k in the model's search space, so v_int is
/// available without search; the update is
///   u_{k+1} = u_k + mixing * P[chi_s^{-1} (rho_out - rho_k)],
/// with chi_s the non-interacting density response at v_ks(rho_k) and P the
/// projection on the search space.
KSResult ks_scf(const ExternalPotential& v, const Interaction& w, BoundaryCondition bc, int particle_count,
                const KSOptions& opt = {});

/// First-order check of E_xc along rho(eps) = interacting density of
/// u + eps q: error(eps) = |(E_xc(rho(eps)) - E_xc(rho(0)))/eps - <v_xc, rho'(0)>|.
struct GateauxCheck {
  std::vector<double> eps;
  std::vector<double> errors;
  double derivative = 0.0;  // <v_xc, rho'(0)>
};
GateauxCheck xc_gateaux_check(const GalerkinModel& model, const Interaction& w, const Eigen::VectorXd& u,
                              const Eigen::VectorXd& q, const std::vector<double>& eps,
                              const FunctionalOptions& opt = {});

}  // namespace fermi1d
