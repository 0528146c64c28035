#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "fermi1d/kohn_sham.hpp"
#include "fermi1d/representability.hpp"

using namespace fermi1d;
using std::numbers::pi;

namespace {

const double pi2 = pi * pi;

double sup(const GridFunction& f) { return f.values().cwiseAbs().maxCoeff(); }

Interaction soft_kernel(double strength) {
  return Interaction::convolution([&](double s) { return strength * std::cos(2 * pi * s); }, 801);
}

Density free_density(const ExternalPotential& v, BoundaryCondition bc, int N) {
  return Density(GridModel(v.grid(), bc, N).evaluate(v).density, N);
}

}  // namespace

TEST_CASE("f_ll of free densities") {
  Grid g(400);
  auto r = f_ll(free_density(ExternalPotential::zero(g), BoundaryCondition::Neumann, 2), Interaction::zero(),
                BoundaryCondition::Neumann);
  CHECK(std::abs(r.value - pi2) < 2e-3);

  auto u = f_ll(Density(GridFunction::constant(g, 3.0), 3), Interaction::zero(), BoundaryCondition::Periodic);
  CHECK(std::abs(u.value - 8 * pi2) < 1e-2);

  auto bad = Density::normalized(GridFunction::sample(g, [](double x) { return std::pow(std::cos(pi * x), 2); }), 1);
  CHECK_THROWS_AS(f_ll(bad, Interaction::zero(), BoundaryCondition::Neumann), ValidationError);
  CHECK_THROWS_AS(t_ks(bad, BoundaryCondition::AntiPeriodic), ValidationError);
}

TEST_CASE("t_ks is f_ll without interaction and bounded by the Slater construction") {
  Grid g(300);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  for (int t = 0; t < 4; ++t) {
    const double a = u(rng), b = u(rng);
    auto rho = Density::normalized(
        GridFunction::sample(g, [&](double x) { return 1 + a * std::cos(2 * pi * x) + b * std::cos(4 * pi * x); }), 2);
    const auto tk = t_ks(rho, BoundaryCondition::Neumann);
    CHECK(tk.value == f_ll(rho, Interaction::zero(), BoundaryCondition::Neumann).value);
    // The sampled construction is orthonormal only up to O(h^2) at the nodes.
    CHECK(tk.value <= slater_from_density(rho, BoundaryCondition::Neumann).kinetic * (1 + 1e-4));
  }
}

TEST_CASE("Hartree energy and potential") {
  Grid g(200);
  auto rho = Density::normalized(GridFunction::sample(g, [](double x) { return 1 + 0.5 * std::cos(2 * pi * x); }), 3);
  auto one = Interaction::general(g, [](double, double) { return 1.0; });
  CHECK(e_h(rho, one) == doctest::Approx(9.0).epsilon(1e-12));
  CHECK(sup(v_h(rho.rho(), one) - GridFunction::constant(g, 6.0)) < 1e-12);

  CHECK(e_h(rho, Interaction::zero()) == 0.0);
  CHECK(sup(v_h(rho.rho(), Interaction::zero())) == 0.0);

  auto flat = Density(GridFunction::constant(g, 3.0), 3);
  CHECK(std::abs(e_h(flat, soft_kernel(1.0))) < 1e-8);
  CHECK(sup(v_h(flat.rho(), soft_kernel(1.0))) < 1e-8);
}

TEST_CASE("v_h is linear") {
  Grid g(150);
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  Eigen::VectorXd r1(151), r2(151);
  for (int i = 0; i <= 150; ++i) {
    r1[i] = u(rng);
    r2[i] = u(rng);
  }
  const GridFunction f1(g, r1), f2(g, r2);
  auto w = Interaction::general(g, [](double x, double y) { return std::exp(-(x - y) * (x - y)) * (1 + x * y); });
  const auto lhs = v_h(2.5 * f1 + (-1.5) * f2, w);
  const auto rhs = 2.5 * v_h(f1, w) + (-1.5) * v_h(f2, w);
  CHECK(sup(lhs - rhs) < 1e-13 * (1 + sup(lhs)));

  // v_h is the derivative of e_h.
  const auto rho = Density::normalized(f1, 2);
  const GridFunction d = zero_mean(f2);
  const double eps = 1e-6;
  const double fd = (e_h(Density(rho.rho() + eps * d, 2), w) - e_h(Density(rho.rho() + (-eps) * d, 2), w)) / (2 * eps);
  CHECK(fd == doctest::Approx(integrate(GridFunction(g, v_h(rho.rho(), w).values().cwiseProduct(d.values())))).epsilon(1e-7));
}

TEST_CASE("exchange-correlation vanishes without interaction") {
  Grid g(300);
  auto rho = free_density(ExternalPotential(GridFunction::sample(g, [](double x) { return 3 * std::cos(2 * pi * x); })),
                          BoundaryCondition::Neumann, 2);
  const auto fv = e_xc(rho, Interaction::zero(), BoundaryCondition::Neumann);
  CHECK(fv.e_xc == 0.0);
  CHECK(sup(fv.v_xc) == 0.0);
  CHECK(fv.e_xc == fv.f_ll - fv.t_ks - fv.e_h);
}

TEST_CASE("exchange-correlation of an interacting density") {
  Grid g(300);
  auto basis = build_basis(BoundaryCondition::Neumann, g, 8);
  const auto w = soft_kernel(0.5);
  const ExternalPotential v(GridFunction::sample(g, [](double x) { return 2 * std::cos(2 * pi * x); }));
  const Density rho(GalerkinModel(basis, w, 2).evaluate(v).density, 2);
  FunctionalOptions opt;
  opt.basis = basis;
  const auto fv = e_xc(rho, w, BoundaryCondition::Neumann, opt);
  CHECK(fv.e_xc == fv.f_ll - fv.t_ks - fv.e_h);
  CHECK(fv.interacting.converged);
  CHECK(fv.non_interacting.converged);
  CHECK(std::abs(mean(fv.v_xc)) < 1e-12);
  // Both v and w are symmetric under x -> 1 - x, and so is rho.
  double asym = 0;
  for (int i = 0; i <= 300; ++i) asym = std::max(asym, std::abs(fv.v_xc[i] - fv.v_xc[300 - i]));
  CHECK(asym < 1e-6);
  // The interacting inversion recovers v itself.
  CHECK(sup(fv.interacting.v.regular() - zero_mean(v.regular())) < 1e-6);
}

TEST_CASE("Gateaux derivative of the exchange-correlation energy") {
  Grid g(300);
  auto basis = build_basis(BoundaryCondition::Neumann, g, 8);
  const auto w = soft_kernel(0.5);
  GalerkinModel m(basis, w, 2);
  const Eigen::VectorXd u = m.coordinates(GridFunction::sample(g, [](double x) { return std::cos(2 * pi * x); }));
  std::mt19937 rng(4);
  std::normal_distribution<double> nd;
  Eigen::VectorXd q(m.dimension());
  for (int j = 0; j < q.size(); ++j) q[j] = nd(rng) / (1 + j);
  q.normalize();
  const auto gc = xc_gateaux_check(m, w, u, q, {1e-2, 1e-3});
  CHECK(gc.errors[1] < gc.errors[0]);
  const double ratio = gc.errors[0] / gc.errors[1];
  CHECK(ratio >= 5);
  CHECK(ratio <= 20);
}

TEST_CASE("KS loop without interaction") {
  Grid g(200);
  const ExternalPotential v(GridFunction::sample(g, [](double x) { return 4 * std::cos(2 * pi * x) + x; }),
                            {DeltaTerm{0.3, 1.0}});
  auto r = ks_scf(v, Interaction::zero(), BoundaryCondition::Neumann, 2);
  CHECK(r.converged);
  CHECK(r.iterations == 1);
  CHECK(sup(r.v_xc) == 0.0);
  CHECK(sup(r.v_h) == 0.0);
  CHECK(l2_norm(r.density.rho() - free_density(v, BoundaryCondition::Neumann, 2).rho()) < 1e-10);
  CHECK(r.aufbau_ok);
}

TEST_CASE("exact KS reproduces the many-body ground state") {
  Grid g(300);
  auto basis = build_basis(BoundaryCondition::Neumann, g, 8);
  const auto w = soft_kernel(0.5);
  const ExternalPotential v = ExternalPotential::zero(g);
  KSOptions opt;
  opt.basis = basis;
  auto r = ks_scf(v, w, BoundaryCondition::Neumann, 2, opt);
  REQUIRE(r.converged);
  const auto gs = ground_state(assemble_HN(v, w, basis, 2));
  CHECK(l2_norm(r.density.rho() - density(gs.psi).rho()) < 1e-4);
  CHECK(std::abs(r.energy - gs.energy) < 2e-4);
  CHECK(r.energy == doctest::Approx(r.t_ks + r.e_h + r.e_xc + r.external));
  CHECK(r.aufbau_ok);
  CHECK(r.trace.back().residual <= 1e-6);

  // Orbitals: trapezoid-orthonormal, and their density is the KS density.
  Eigen::VectorXd dens = Eigen::VectorXd::Zero(301);
  for (std::size_t a = 0; a < r.orbitals.size(); ++a) {
    dens += r.orbitals[a].values().cwiseAbs2();
    for (std::size_t b = 0; b < r.orbitals.size(); ++b) {
      const double ov = integrate(GridFunction(g, r.orbitals[a].values().cwiseProduct(r.orbitals[b].values())));
      CHECK(std::abs(ov - (a == b ? 1.0 : 0.0)) < 1e-8);
    }
  }
  CHECK((dens - r.density.rho().values()).cwiseAbs().maxCoeff() < 1e-12);
  for (int k = 1; k < r.orbital_eigenvalues.size(); ++k) CHECK(r.orbital_eigenvalues[k] >= r.orbital_eigenvalues[k - 1]);
}

TEST_CASE("KS gauge consistency") {
  Grid g(200);
  auto basis = build_basis(BoundaryCondition::AntiPeriodic, g, 6);
  const auto w = soft_kernel(0.4);
  const ExternalPotential v(GridFunction::sample(g, [](double x) { return std::sin(2 * pi * x); }));
  KSOptions opt;
  opt.basis = basis;
  opt.threads = 1;
  auto a = ks_scf(v, w, BoundaryCondition::AntiPeriodic, 2, opt);
  auto b = ks_scf(v.plus_constant(1.75), w, BoundaryCondition::AntiPeriodic, 2, opt);
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  CHECK(l2_norm(a.density.rho() - b.density.rho()) < 1e-8);
  for (int k = 0; k < a.orbital_eigenvalues.size(); ++k)
    CHECK(b.orbital_eigenvalues[k] - a.orbital_eigenvalues[k] == doctest::Approx(1.75).epsilon(1e-9));
}

TEST_CASE("KS is deterministic across thread budgets") {
  Grid g(150);
  auto basis = build_basis(BoundaryCondition::Periodic, g, 5);
  const auto w = soft_kernel(0.3);
  const ExternalPotential v(GridFunction::sample(g, [](double x) { return std::cos(2 * pi * x); }));
  KSOptions opt;
  opt.basis = basis;
  opt.threads = 1;
  auto a = ks_scf(v, w, BoundaryCondition::Periodic, 3, opt);
  opt.threads = 2;
  auto b = ks_scf(v, w, BoundaryCondition::Periodic, 3, opt);
  CHECK(a.iterations == b.iterations);
  CHECK(a.density.rho().values() == b.density.rho().values());
}

TEST_CASE("KS input validation") {
  Grid g(100);
  const auto v = ExternalPotential::zero(g);
  KSOptions opt;
  opt.mixing = 0.0;
  CHECK_THROWS_AS(ks_scf(v, Interaction::zero(), BoundaryCondition::Neumann, 2, opt), ValidationError);
  opt.mixing = 1.5;
  CHECK_THROWS_AS(ks_scf(v, Interaction::zero(), BoundaryCondition::Neumann, 2, opt), ValidationError);
  CHECK_THROWS_AS(ks_scf(v, Interaction::zero(), BoundaryCondition::Periodic, 2), ValidationError);
  CHECK_THROWS_AS(ks_scf(v, soft_kernel(1.0), BoundaryCondition::Neumann, 2), ValidationError);
}

TEST_CASE("thread budget") {
  CHECK(thread_budget(3) == 3);
  CHECK(thread_budget(0) >= 1);
}
