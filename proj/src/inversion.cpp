#include "fermi1d/inversion.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fermi1d/representability.hpp"
#include "fermi1d/single_particle.hpp"

namespace fermi1d {

namespace {

// Node -> degree of freedom for potentials (no sign: potentials are periodic
// under both non-local conditions).
int potential_dof(const Grid& g, BoundaryCondition bc, int node) {
  return (bc != BoundaryCondition::Neumann && node == g.n_cells()) ? 0 : node;
}

// Lowest-level filling with a fractional Fermi shell, density, energy and
// optionally the second derivative of the energy w.r.t. the diagonal
// (dof) potential values.
//
// The dense solver's eigenvalues carry absolute errors ~ eps * 4/h^2, which
// swamp the dual's increments near convergence. With `c` (S = stiffness +
// diag(M c)) the energy is instead summed from Rayleigh quotients in
// difference form, accurate to rounding of the energy itself.
ModelEvaluation grid_spectral(const Grid& g, BoundaryCondition bc, int N, const Eigen::MatrixXd& S,
                              const Eigen::VectorXd& M, bool with_hessian, const Eigen::VectorXd* c = nullptr) {
  const int d = static_cast<int>(M.size());
  const Eigen::VectorXd dm = M.cwiseSqrt().cwiseInverse();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dm.asDiagonal() * S * dm.asDiagonal());
  if (es.info() != Eigen::Success) throw NumericalError("grid eigensolver failed");
  const Eigen::VectorXd& eps = es.eigenvalues();
  const Eigen::MatrixXd u = dm.asDiagonal() * es.eigenvectors();

  int s = N - 1;
  while (s > 0 && eps[s] - eps[s - 1] < kGapTol) --s;
  int e = N;
  while (e < d && eps[e] - eps[e - 1] < kGapTol) ++e;
  Eigen::VectorXd f = Eigen::VectorXd::Zero(d);
  for (int j = 0; j < s; ++j) f[j] = 1.0;
  for (int j = s; j < e; ++j) f[j] = static_cast<double>(N - s) / (e - s);

  Eigen::VectorXd rho_dof = Eigen::VectorXd::Zero(d);
  double energy = 0.0;
  for (int j = 0; j < e; ++j) {
    rho_dof += f[j] * u.col(j).cwiseAbs2();
    if (c) {
      const Eigen::VectorXd nodal = expand_dofs(g, bc, u.col(j));
      const Eigen::VectorXd du = nodal.tail(g.n_cells()) - nodal.head(g.n_cells());
      const Eigen::VectorXd u2 = u.col(j).cwiseAbs2();
      energy += f[j] * (du.squaredNorm() / g.h() + M.cwiseProduct(*c).dot(u2)) / M.dot(u2);
    } else {
      energy += f[j] * eps[j];
    }
  }
  Eigen::VectorXd rho(g.n_nodes());
  for (int i = 0; i < g.n_nodes(); ++i) rho[i] = rho_dof[potential_dof(g, bc, i)];

  ModelEvaluation out;
  out.energy = energy;
  out.density = GridFunction(g, std::move(rho));
  out.pairing = M.cwiseProduct(rho_dof);
  out.gap = N < d ? eps[N] - eps[N - 1] : std::numeric_limits<double>::infinity();
  out.degenerate = e > N || (s < N - 1);
  if (with_hessian) {
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < e; ++i) {
      int a0 = i + 1;
      while (a0 < d && eps[a0] - eps[i] < kGapTol) ++a0;
      if (a0 >= d) continue;
      const int na = d - a0;
      Eigen::VectorXd coef(na);
      for (int a = 0; a < na; ++a) coef[a] = 2.0 * (f[i] - f[a0 + a]) / (eps[i] - eps[a0 + a]);
      const Eigen::MatrixXd B = M.cwiseProduct(u.col(i)).asDiagonal() * u.rightCols(na);
      H.noalias() += B * coef.asDiagonal() * B.transpose();
    }
    out.hessian = 0.5 * (H + H.transpose());
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// GridModel

GridModel::GridModel(const Grid& grid, BoundaryCondition bc, int particle_count)
    : grid_(grid), bc_(bc), n_(particle_count) {
  auto op = assemble_h(ExternalPotential::zero(grid), bc);
  if (particle_count < 1 || particle_count >= op.dimension()) {
    throw ValidationError("particle count outside the grid model's range");
  }
  stiffness_ = std::move(op.stiffness);
  mass_ = std::move(op.mass);
}

GridFunction GridModel::potential(const Eigen::VectorXd& c) const {
  Eigen::VectorXd v(grid_.n_nodes());
  for (int i = 0; i < grid_.n_nodes(); ++i) v[i] = c[potential_dof(grid_, bc_, i)];
  return GridFunction(grid_, std::move(v));
}

Eigen::VectorXd GridModel::pair(const GridFunction& f) const {
  const Eigen::VectorXd w = grid_.weights();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(dimension());
  for (int i = 0; i < grid_.n_nodes(); ++i) b[potential_dof(grid_, bc_, i)] += w[i] * f[i];
  return b;
}

Eigen::VectorXd GridModel::coordinates(const GridFunction& v) const { return pair(v).cwiseQuotient(mass_); }

Eigen::VectorXd GridModel::gauge(const Eigen::VectorXd& c) const {
  return c.array() - mass_.dot(c) / mass_.sum();
}

double GridModel::residual_norm(const Eigen::VectorXd& g) const {
  return std::sqrt(g.cwiseAbs2().cwiseQuotient(mass_).sum());
}

ModelEvaluation GridModel::evaluate(const Eigen::VectorXd& c, bool with_hessian) const {
  Eigen::MatrixXd S = stiffness_;
  S.diagonal() += mass_.cwiseProduct(c);
  return grid_spectral(grid_, bc_, n_, S, mass_, with_hessian, &c);
}

ModelEvaluation GridModel::evaluate(const ExternalPotential& v) const {
  const auto op = assemble_h(v, bc_, grid_);
  return grid_spectral(grid_, bc_, n_, op.stiffness, op.mass, false);
}

// ---------------------------------------------------------------------------
// GalerkinModel

GalerkinModel::GalerkinModel(BasisPtr basis, const Interaction& w, int particle_count)
    : builder_(std::move(basis), w, particle_count) {
  const SpectralBasis& b = *builder_.basis();
  const Grid& g = b.grid;
  const int K = b.size();
  const Eigen::VectorXd wt = g.weights();

  auto orthonormal_range = [&](const Eigen::MatrixXd& A, double rel) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A.transpose() * wt.asDiagonal() * A);
    const Eigen::VectorXd& lam = es.eigenvalues();
    const double cut = rel * lam.cwiseAbs().maxCoeff();
    std::vector<int> keep;
    for (int k = static_cast<int>(lam.size()) - 1; k >= 0; --k)
      if (lam[k] > cut) keep.push_back(k);
    Eigen::MatrixXd out(A.rows(), keep.size());
    for (std::size_t k = 0; k < keep.size(); ++k)
      out.col(k) = A * es.eigenvectors().col(keep[k]) / std::sqrt(lam[keep[k]]);
    return out;
  };
  // Orthonormal zero-mean basis of the span of phi_i phi_a, i < rows.
  auto products = [&](int rows) {
    Eigen::MatrixXd P(g.n_nodes(), rows * K);
    int col = 0;
    for (int i = 0; i < rows; ++i)
      for (int a = 0; a < K; ++a) P.col(col++) = b.modes.col(i).cwiseProduct(b.modes.col(a));
    Eigen::MatrixXd B = orthonormal_range(P, 1e-12);
    const Eigen::RowVectorXd mean_row = wt.transpose() * B;
    B -= Eigen::VectorXd::Ones(g.n_nodes()) * mean_row;
    return orthonormal_range(B, 1e-10);
  };
  int ref = std::min(particle_count, K);
  const auto& e = b.free_energies;
  while (ref < K && std::abs(e[ref] - e[ref - 1]) <= 1e-6 * std::max(1.0, std::abs(e[ref]))) ++ref;
  directions_ = products(ref);
  span_ = products(K);

  one_body_.reserve(directions_.cols());
  for (Eigen::Index j = 0; j < directions_.cols(); ++j) {
    const Eigen::VectorXd d = wt.cwiseProduct(directions_.col(j));
    Eigen::MatrixXd t = b.modes.transpose() * d.asDiagonal() * b.modes;
    one_body_.push_back(0.5 * (t + t.transpose()));
  }
}

GridFunction GalerkinModel::potential(const Eigen::VectorXd& c) const {
  return GridFunction(grid(), directions_ * c);
}

Eigen::VectorXd GalerkinModel::pair(const GridFunction& f) const {
  return directions_.transpose() * grid().weights().cwiseProduct(f.values());
}

Eigen::VectorXd GalerkinModel::coordinates(const GridFunction& v) const { return pair(v); }

ExternalPotential GalerkinModel::visible_part(const ExternalPotential& v) const {
  Eigen::VectorXd c(span_.cols());
  for (Eigen::Index j = 0; j < span_.cols(); ++j) c[j] = pair_external(v, GridFunction(grid(), span_.col(j)));
  const double c0 = pair_external(v, GridFunction::constant(grid(), 1.0));
  return ExternalPotential(GridFunction(grid(), span_ * c), {}, c0);
}

ModelEvaluation GalerkinModel::evaluate(const Eigen::VectorXd& c, bool with_hessian) const {
  Eigen::MatrixXd t = builder_.basis()->kinetic;
  for (int j = 0; j < dimension(); ++j) t += c[j] * one_body_[j];
  return finish(builder_.hamiltonian(t), with_hessian);
}

ModelEvaluation GalerkinModel::evaluate(const ExternalPotential& v) const {
  return finish(builder_.build(v).hamiltonian, false);
}

ModelEvaluation GalerkinModel::finish(const Eigen::MatrixXd& hamiltonian, bool with_hessian) const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hamiltonian);
  if (es.info() != Eigen::Success) throw NumericalError("many-body eigensolver failed");
  const Eigen::VectorXd& E = es.eigenvalues();
  const Eigen::MatrixXd& C = es.eigenvectors();
  const SlaterSpace& space = *builder_.space();
  const int dim = space.dimension();
  const int K = builder_.basis()->size();

  int g = 1;
  while (g < dim && E[g] - E[g - 1] < kGapTol) ++g;

  Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(K, K);
  for (int s = 0; s < g; ++s) gamma += transition_one_rdm(space, C.col(s), C.col(s));
  gamma /= g;
  gamma = 0.5 * (gamma + gamma.transpose()).eval();

  ModelEvaluation out;
  out.energy = E[0];
  out.density = density_from_rdm(*builder_.basis(), gamma);
  out.pairing = pair(out.density);
  out.gap = dim > 1 ? E[1] - E[0] : std::numeric_limits<double>::infinity();
  out.degenerate = g > 1;
  if (with_hessian) {
    const int m = dimension();
    Eigen::MatrixXd Tflat(m, K * K);
    for (int j = 0; j < m; ++j) Tflat.row(j) = Eigen::Map<const Eigen::RowVectorXd>(one_body_[j].data(), K * K);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m, m);
    for (int s = 0; s < g; ++s) {
      // G(a + K*b, n) = <s| a+_a a_b |n>, column-major to match Tflat.
      Eigen::MatrixXd G = Eigen::MatrixXd::Zero(K * K, dim);
      for (const auto& hop : space.hops()) {
        const double cs = C(hop.row, s);
        if (cs != 0.0) G.row(hop.a + K * hop.b) += hop.sign * cs * C.row(hop.col);
      }
      const Eigen::MatrixXd Y = Tflat * G.rightCols(dim - g);
      Eigen::VectorXd coef(dim - g);
      for (int n = g; n < dim; ++n) coef[n - g] = 2.0 / (g * (E[s] - E[n]));
      H.noalias() += Y * coef.asDiagonal() * Y.transpose();
    }
    out.hessian = 0.5 * (H + H.transpose());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dual and ascent

std::unique_ptr<GroundStateModel> make_model(const InversionProblem& prob) {
  const Grid& g = prob.target.grid();
  const int N = prob.target.particle_count();
  if (prob.w.is_zero()) return std::make_unique<GridModel>(g, prob.bc, N);
  if (!prob.basis) throw ValidationError("an interacting inversion needs a spectral basis");
  if (prob.basis->bc != prob.bc) throw ValidationError("spectral basis has a different boundary condition");
  if (!(prob.basis->grid == g)) throw ValidationError("spectral basis lives on a different grid");
  return std::make_unique<GalerkinModel>(prob.basis, prob.w, N);
}

DualValue dual_objective(const GridFunction& v, const InversionProblem& prob) {
  const auto model = make_model(prob);
  const ExternalPotential pot(v);
  const auto ev = model->evaluate(pot);
  return DualValue{ev.energy - pair_external(pot, prob.target.rho()), zero_mean(ev.density - prob.target.rho())};
}

InversionResult invert(const InversionProblem& prob, const std::optional<GridFunction>& v0) {
  require_invertible(prob.target, prob.bc, prob.allow_parity_violation);
  const auto model = make_model(prob);
  return invert(prob, *model, v0);
}

Eigen::VectorXd ascent_step(const Eigen::MatrixXd& hessian, const Eigen::VectorXd& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(-hessian);
  const Eigen::VectorXd& lam = es.eigenvalues();
  const double top = lam.cwiseAbs().maxCoeff();
  const double cut = 1e-12 * top;
  Eigen::VectorXd d = Eigen::VectorXd::Zero(g.size());
  for (Eigen::Index k = 0; k < lam.size(); ++k) {
    if (lam[k] > cut) d += (es.eigenvectors().col(k).dot(g) / lam[k]) * es.eigenvectors().col(k);
  }
  return d;
}

InversionResult invert(const InversionProblem& prob, const GroundStateModel& model,
                       const std::optional<GridFunction>& v0) {
  if (prob.max_iters < 0 || !(prob.grad_tol > 0.0)) throw ValidationError("invalid inversion controls");
  const GridFunction& target = prob.target.rho();
  const Eigen::VectorXd b = model.pair(target);
  Eigen::VectorXd c = v0 ? model.gauge(model.coordinates(*v0)) : Eigen::VectorXd::Zero(model.dimension());

  ModelEvaluation ev = model.evaluate(c, true);
  double D = ev.energy - c.dot(b);
  InversionResult res;

  int it = 0, stalls = 0;
  for (;; ++it) {
    const double r = model.residual_norm(ev.pairing - b);
    res.residual_history.push_back(r);
    res.objective_history.push_back(D);
    if (r <= prob.grad_tol) {
      res.converged = true;
      break;
    }
    if (it >= prob.max_iters) {
      res.message = "iteration budget exhausted";
      break;
    }
    const Eigen::VectorXd g = ev.pairing - b;

    auto try_direction = [&](Eigen::VectorXd d) -> bool {
      d = model.gauge(d);
      const double sup = model.potential(d).values().cwiseAbs().maxCoeff();
      if (!(sup > 0.0) || !std::isfinite(sup)) return false;
      if (sup > prob.max_step) d *= prob.max_step / sup;
      const double slope = g.dot(d);
      if (!(slope > 0.0)) return false;
      double t = 1.0;
      for (int k = 0; k <= prob.max_backtracks; ++k, t *= 0.5) {
        const Eigen::VectorXd trial = model.gauge(c + t * d);
        ModelEvaluation tev = model.evaluate(trial, true);
        const double Dt = tev.energy - trial.dot(b);
        const double slack = 1e-12 * (1.0 + std::abs(D));
        if (Dt >= D + prob.armijo * t * slope - slack && Dt >= D - slack) {
          c = trial;
          ev = std::move(tev);
          D = std::max(Dt, D);
          return true;
        }
      }
      return false;
    };

    const double D_before = D;
    bool ok = try_direction(ascent_step(ev.hessian, g));
    if (!ok) {
      // Steepest ascent with a curvature-scaled length.
      const double curv = -g.dot(ev.hessian * g);
      ok = try_direction(curv > 0.0 ? Eigen::VectorXd(g * (g.squaredNorm() / curv)) : g);
    }
    if (!ok) {
      res.message = "line search stagnated";
      break;
    }
    // Steps accepted only within rounding slack make no progress.
    stalls = (D > D_before || model.residual_norm(ev.pairing - b) < 0.5 * r) ? 0 : stalls + 1;
    if (stalls >= 5) {
      ++it;
      res.residual_history.push_back(model.residual_norm(ev.pairing - b));
      res.objective_history.push_back(D);
      res.message = "no progress at rounding level";
      break;
    }
  }

  res.iterations = it;
  res.v = ExternalPotential(zero_mean(model.potential(c)));
  res.lambda1 = ev.energy - mean(model.potential(c)) * model.particle_count();
  res.objective = D;
  res.gap = ev.gap;
  res.degenerate = ev.degenerate;
  res.density_residual = l2_norm(ev.density - target);
  res.density = ev.density;
  if (res.converged && res.message.empty()) res.message = "converged";
  return res;
}

HKReport hk_uniqueness_check(const InversionProblem& prob, const std::vector<GridFunction>& seeds) {
  if (seeds.size() < 2) throw ValidationError("hk_uniqueness_check needs at least two seeds");
  require_invertible(prob.target, prob.bc, prob.allow_parity_violation);
  const auto model = make_model(prob);
  HKReport rep{0.0, {}};
  std::ostringstream failures;
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    rep.runs.push_back(invert(prob, *model, seeds[s]));
    if (!rep.runs.back().converged) {
      failures << " seed " << s << " (residual " << rep.runs.back().residual_history.back() << ", "
               << rep.runs.back().message << ")";
    }
  }
  if (!failures.str().empty()) throw NumericalError("inversion did not converge for" + failures.str());
  for (std::size_t i = 0; i < rep.runs.size(); ++i)
    for (std::size_t j = i + 1; j < rep.runs.size(); ++j) {
      const double d = (rep.runs[i].v.regular() - rep.runs[j].v.regular()).values().cwiseAbs().maxCoeff();
      rep.max_deviation = std::max(rep.max_deviation, d);
    }
  return rep;
}

}  // namespace fermi1d
