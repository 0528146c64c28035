#include "fermi1d/kohn_sham.hpp"

#include <algorithm>
#include <cstdlib>
#include <future>
#include <sstream>
#include <thread>

#include "fermi1d/representability.hpp"
#include "fermi1d/single_particle.hpp"

namespace fermi1d {

int thread_budget(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("FERMI1D_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<int>(std::min(n, 1024L));
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

InversionProblem problem_for(const Density& rho, const Interaction& w, BoundaryCondition bc,
                             const FunctionalOptions& opt) {
  InversionProblem p{rho, w, bc, opt.basis};
  p.grad_tol = opt.grad_tol;
  p.max_iters = opt.max_iters;
  p.allow_parity_violation = opt.allow_parity_violation;
  return p;
}

void require_converged(const InversionResult& r, const char* which) {
  if (r.converged) return;
  std::ostringstream os;
  os << which << " inversion did not converge after " << r.iterations << " iterations (residual "
     << r.residual_history.back() << ", " << r.message << ")";
  throw NumericalError(os.str());
}

// Both inversions for rho with prebuilt models; `interacting` may be the
// grid model itself when w is Zero.
FunctionalValue functionals(const Density& rho, const Interaction& w, BoundaryCondition bc,
                            const FunctionalOptions& opt, const GroundStateModel& interacting,
                            const GroundStateModel& grid_model, const std::optional<GridFunction>& v_int0,
                            const std::optional<GridFunction>& v_ks0, int threads) {
  const auto pi = problem_for(rho, w, bc, opt);
  const auto ps = problem_for(rho, Interaction::zero(), bc, opt);
  FunctionalValue out;
  if (threads > 1) {
    auto ks = std::async(std::launch::async, [&] { return invert(ps, grid_model, v_ks0); });
    out.interacting = invert(pi, interacting, v_int0);
    out.non_interacting = ks.get();
  } else {
    out.interacting = invert(pi, interacting, v_int0);
    out.non_interacting = invert(ps, grid_model, v_ks0);
  }
  require_converged(out.interacting, "interacting");
  require_converged(out.non_interacting, "non-interacting");
  out.f_ll = out.interacting.objective;
  out.t_ks = out.non_interacting.objective;
  out.e_h = e_h(rho, w);
  out.e_xc = out.f_ll - out.t_ks - out.e_h;
  out.v_h = v_h(rho.rho(), w);
  out.v_xc = zero_mean(out.non_interacting.v.regular() - out.v_h - out.interacting.v.regular());
  return out;
}

GridFunction orbital_density(const EigenSolution& sol, int N) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(sol.grid.n_nodes());
  for (int j = 0; j < N; ++j) r += sol.eigenvectors[j].values().cwiseAbs2();
  return GridFunction(sol.grid, std::move(r));
}

}  // namespace

FllValue f_ll(const Density& rho, const Interaction& w, BoundaryCondition bc, const FunctionalOptions& opt,
              const std::optional<GridFunction>& v0) {
  auto r = invert(problem_for(rho, w, bc, opt), v0);
  require_converged(r, w.is_zero() ? "non-interacting" : "interacting");
  const double value = r.objective;
  return FllValue{value, std::move(r)};
}

FllValue t_ks(const Density& rho, BoundaryCondition bc, const FunctionalOptions& opt,
              const std::optional<GridFunction>& v0) {
  return f_ll(rho, Interaction::zero(), bc, opt, v0);
}

double e_h(const Density& rho, const Interaction& w) {
  return pair_interaction(w, PairFunction::tensor(rho.rho(), rho.rho()));
}

GridFunction v_h(const GridFunction& rho, const Interaction& w) {
  const Grid& g = rho.grid();
  if (w.is_zero()) return GridFunction::constant(g, 0.0);
  const Eigen::MatrixXd k = w.kernel_matrix(g);
  const Eigen::VectorXd wr = g.weights().cwiseProduct(rho.values());
  return GridFunction(g, k * wr + k.transpose() * wr);
}

FunctionalValue e_xc(const Density& rho, const Interaction& w, BoundaryCondition bc, const FunctionalOptions& opt,
                     const std::optional<GridFunction>& v_int0, const std::optional<GridFunction>& v_ks0) {
  require_invertible(rho, bc, opt.allow_parity_violation);
  const auto pi = problem_for(rho, w, bc, opt);
  const auto interacting = make_model(pi);
  if (w.is_zero()) {
    return functionals(rho, w, bc, opt, *interacting, *interacting, v_int0, v_ks0, thread_budget(opt.threads));
  }
  const GridModel grid_model(rho.grid(), bc, rho.particle_count());
  return functionals(rho, w, bc, opt, *interacting, grid_model, v_int0, v_ks0, thread_budget(opt.threads));
}

GridFunction v_xc(const Density& rho, const Interaction& w, BoundaryCondition bc, const FunctionalOptions& opt) {
  return e_xc(rho, w, bc, opt).v_xc;
}

std::string_view to_string(Aufbau a) { return a == Aufbau::Ok ? "ok" : "indeterminate"; }

KSResult ks_scf(const ExternalPotential& v, const Interaction& w, BoundaryCondition bc, int N, const KSOptions& opt) {
  if (!(opt.mixing > 0.0 && opt.mixing <= 1.0)) throw ValidationError("mixing must lie in (0, 1]");
  if (opt.max_iters < 1) throw ValidationError("max_iters must be positive");
  if (!(opt.tol > 0.0) || !(opt.inner_tol > 0.0)) throw ValidationError("tolerances must be positive");
  if (!opt.allow_parity_violation && !parity_ok(bc, N)) {
    throw ValidationError(std::string(to_string(bc)) + " conditions need N " +
                          (bc == BoundaryCondition::Periodic ? "odd" : "even"));
  }
  const Grid& g = v.grid();
  const GridModel grid_model(g, bc, N);
  const int threads = thread_budget(opt.threads);
  FunctionalOptions fo{opt.basis, opt.inner_tol, 200, opt.allow_parity_violation, threads};

  std::unique_ptr<GalerkinModel> galerkin;
  ExternalPotential visible = v;
  Eigen::VectorXd u;
  if (!w.is_zero()) {
    InversionProblem probe{Density(GridFunction::constant(g, N), N), w, bc, opt.basis};
    galerkin.reset(static_cast<GalerkinModel*>(make_model(probe).release()));
    visible = galerkin->visible_part(v);
    // Start from the interacting potential whose density best matches the
    // non-interacting one.
    InversionProblem start{Density(grid_model.evaluate(v).density, N), w, bc, opt.basis};
    start.max_iters = opt.start_iters;
    start.grad_tol = opt.inner_tol;
    u = galerkin->coordinates(invert(start, *galerkin).v.regular());
  }

  KSResult res;
  std::optional<GridFunction> v_ks_prev;
  for (int k = 0; k < opt.max_iters; ++k) {
    const GridFunction rho_k = galerkin ? galerkin->evaluate(u, false).density : grid_model.evaluate(v).density;
    const Density dk(rho_k, N);
    FunctionalValue fv;
    try {
      if (galerkin) {
        fv = functionals(dk, w, bc, fo, *galerkin, grid_model, galerkin->potential(u), v_ks_prev, threads);
      } else {
        fv = functionals(dk, w, bc, fo, grid_model, grid_model, std::nullopt, std::nullopt, threads);
      }
    } catch (const NumericalError& e) {
      throw ScfError(std::string(e.what()) + " at SCF iteration " + std::to_string(k), k, rho_k);
    }
    v_ks_prev = fv.non_interacting.v.regular();

    const auto sol = eigensolve_lowest(assemble_h(visible.plus_regular(fv.v_h + fv.v_xc), bc), N + 1);
    const GridFunction rho_out = orbital_density(sol, N);
    const GridFunction R = rho_out - rho_k;
    const double r = l2_norm(R);
    const double ext = pair_external(v, rho_k);
    res.trace.push_back(ScfStep{k, r, fv.f_ll + ext});

    res.orbitals.assign(sol.eigenvectors.begin(), sol.eigenvectors.begin() + N);
    res.orbital_eigenvalues = sol.eigenvalues;
    res.density = Density(rho_out, N);
    res.v_xc = fv.v_xc;
    res.v_h = fv.v_h;
    res.t_ks = fv.t_ks;
    res.e_h = fv.e_h;
    res.e_xc = fv.e_xc;
    res.external = ext;
    res.energy = fv.t_ks + fv.e_h + fv.e_xc + ext;
    res.iterations = k + 1;
    const double gap = sol.eigenvalues[N] - sol.eigenvalues[N - 1];
    res.aufbau = gap > kGapTol ? Aufbau::Ok : Aufbau::Indeterminate;
    res.aufbau_ok = res.aufbau == Aufbau::Ok;

    if (r <= opt.tol) {
      res.converged = true;
      break;
    }
    if (!galerkin) {
      res.message = "non-interacting fixed point not reached";
      break;
    }
    // Newton step for the residual, linearized as -chi_s du.
    const auto ev = grid_model.evaluate(grid_model.coordinates(*v_ks_prev), true);
    const Eigen::VectorXd dc = -ascent_step(ev.hessian, grid_model.pair(R));
    u += opt.mixing * galerkin->pair(grid_model.potential(dc));
  }
  if (res.message.empty()) res.message = res.converged ? "converged" : "iteration budget exhausted";
  return res;
}

GateauxCheck xc_gateaux_check(const GalerkinModel& model, const Interaction& w, const Eigen::VectorXd& u,
                              const Eigen::VectorXd& q, const std::vector<double>& eps, const FunctionalOptions& opt) {
  const Grid& g = model.grid();
  const int N = model.particle_count();
  const BoundaryCondition bc = model.builder().basis()->bc;
  const GridModel grid_model(g, bc, N);
  const int threads = thread_budget(opt.threads);
  auto at = [&](const Eigen::VectorXd& c) {
    return functionals(Density(model.evaluate(c, false).density, N), w, bc, opt, model, grid_model,
                       model.potential(c), std::nullopt, threads);
  };
  const auto base = at(u);
  const double h = 1e-5;
  const GridFunction drho =
      (model.evaluate(u + h * q, false).density - model.evaluate(u - h * q, false).density) * (0.5 / h);
  GateauxCheck out;
  out.derivative = integrate(GridFunction(g, base.v_xc.values().cwiseProduct(drho.values())));
  for (double e : eps) {
    const auto fe = at(u + e * q);
    out.eps.push_back(e);
    out.errors.push_back(std::abs((fe.e_xc - base.e_xc) / e - out.derivative));
  }
  return out;
}

}  // namespace fermi1d
