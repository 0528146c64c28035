#include "doctest.h"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "fermi1d/many_body.hpp"

using namespace fermi1d;
using std::numbers::pi;

namespace {

const double pi2 = pi * pi;

ExternalPotential smooth_potential(const Grid& g, std::mt19937& rng, bool periodic_only = false) {
  std::uniform_real_distribution<double> u(-3, 3);
  const double a = u(rng), b = u(rng), c = u(rng), d = periodic_only ? 0.0 : u(rng);
  return ExternalPotential(GridFunction::sample(g, [&](double x) {
    return a * std::cos(2 * pi * x) + b * std::sin(2 * pi * x) + c * std::cos(6 * pi * x) + d * x;
  }));
}

Interaction soft_kernel(double strength) {
  return Interaction::convolution([&](double s) { return strength * std::cos(2 * pi * s); }, 801);
}

}  // namespace

TEST_CASE("Slater space enumeration") {
  SlaterSpace s(5, 2);
  CHECK(s.dimension() == 10);
  CHECK(s.occupied(0) == std::vector<int>{0, 1});
  CHECK(s.occupied(1) == std::vector<int>{0, 2});
  CHECK(s.occupied(4) == std::vector<int>{1, 2});
  CHECK(s.occupied(9) == std::vector<int>{3, 4});
  for (int i = 0; i < s.dimension(); ++i) CHECK(s.index_of(s.determinants()[i]) == i);
  CHECK_THROWS_AS(SlaterSpace(3, 4), ValidationError);
}

TEST_CASE("build_basis") {
  Grid g(400);
  auto b = build_basis(BoundaryCondition::Neumann, g, 2);
  double e0 = 0, e1 = 0;
  for (int i = 0; i <= 400; ++i) {
    e0 = std::max(e0, std::abs(std::abs(b->modes(i, 0)) - 1.0));
    e1 = std::max(e1, std::abs(std::abs(b->modes(i, 1)) - std::sqrt(2.0) * std::abs(std::cos(pi * g.node(i)))));
  }
  CHECK(e0 < 1e-3);
  CHECK(e1 < 1e-3);
  Eigen::MatrixXd gram = b->modes.transpose() * g.weights().asDiagonal() * b->modes;
  CHECK((gram - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-10);

  auto p = build_basis(BoundaryCondition::Periodic, g, 3);
  // Modes 1 and 2 span cos(2 pi x), sin(2 pi x).
  Eigen::MatrixXd trig(401, 2);
  for (int i = 0; i <= 400; ++i) {
    trig(i, 0) = std::sqrt(2.0) * std::cos(2 * pi * g.node(i));
    trig(i, 1) = std::sqrt(2.0) * std::sin(2 * pi * g.node(i));
  }
  Eigen::MatrixXd ov = trig.transpose() * g.weights().asDiagonal() * p->modes.rightCols(2);
  CHECK(std::abs(std::abs(ov.determinant()) - 1.0) < 1e-3);

  CHECK_THROWS_AS(build_basis(BoundaryCondition::Neumann, g, 0), ValidationError);
  CHECK_THROWS_AS(build_basis(BoundaryCondition::Periodic, g, 2), ValidationError);
  CHECK_THROWS_AS(build_basis(BoundaryCondition::AntiPeriodic, g, 3), ValidationError);
}

TEST_CASE("non-interacting Hamiltonians") {
  Grid g(400);
  auto b = build_basis(BoundaryCondition::Neumann, g, 2);
  auto p = assemble_HN(ExternalPotential::zero(g), Interaction::zero(), b, 2);
  CHECK(p.dimension() == 1);
  CHECK(std::abs(p.hamiltonian(0, 0) / pi2 - 1) < 1e-3);

  auto b6 = build_basis(BoundaryCondition::Neumann, g, 6);
  auto gs = ground_state(assemble_HN(ExternalPotential::zero(g), Interaction::zero(), b6, 2));
  CHECK(std::abs(gs.energy / pi2 - 1) < 1e-3);
  CHECK(std::abs(gs.gap / (3 * pi2) - 1) < 2e-2);

  auto ba = build_basis(BoundaryCondition::AntiPeriodic, g, 4);
  auto ga = ground_state(assemble_HN(ExternalPotential::zero(g), Interaction::zero(), ba, 2));
  CHECK(std::abs(ga.energy / (2 * pi2) - 1) < 1e-3);
  CHECK(ga.gap > 0);
  CHECK_THROWS_AS(assemble_HN(ExternalPotential::zero(g), Interaction::zero(), ba, 5), ValidationError);
}

TEST_CASE("non-interacting spectrum is sums of orbital energies") {
  Grid g(100);
  std::mt19937 rng(4);
  auto v = smooth_potential(g, rng);
  auto b = build_basis(BoundaryCondition::Neumann, g, 4);
  HamiltonianBuilder hb(b, Interaction::zero(), 2);
  auto spec = diagonalize(hb.build(v));
  // Orbital energies of the projected one-body matrix.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hb.one_body_matrix(v));
  std::vector<double> sums;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) sums.push_back(es.eigenvalues()[i] + es.eigenvalues()[j]);
  std::sort(sums.begin(), sums.end());
  for (int k = 0; k < 6; ++k) CHECK(std::abs(spec.energies[k] - sums[k]) < 1e-9);

  // With the full basis, orbital energies coincide with the single-particle module.
  Grid small(12);
  auto full = build_basis(BoundaryCondition::Neumann, small, 13);
  auto vs = smooth_potential(small, rng);
  auto sp = eigensolve_lowest(assemble_h(vs, BoundaryCondition::Neumann), 4);
  auto mb = diagonalize(assemble_HN(vs, Interaction::zero(), full, 2));
  CHECK(std::abs(mb.energies[0] - sp.eigenvalues[0] - sp.eigenvalues[1]) < 1e-9);
  CHECK(std::abs(mb.energies[1] - sp.eigenvalues[0] - sp.eigenvalues[2]) < 1e-9);
}

TEST_CASE("constant kernel shifts the spectrum by N(N-1) lambda") {
  Grid g(80);
  std::mt19937 rng(9);
  auto v = smooth_potential(g, rng);
  auto b = build_basis(BoundaryCondition::Neumann, g, 6);
  const double lam = 0.7;
  for (int N : {2, 3}) {
    auto e0 = diagonalize(assemble_HN(v, Interaction::zero(), b, N)).energies;
    auto e1 = diagonalize(assemble_HN(v, Interaction::general(g, [&](double, double) { return lam; }), b, N)).energies;
    CHECK(((e1 - e0).array() - lam * N * (N - 1)).abs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("N = 1 reduces to the projected single-particle problem") {
  Grid g(100);
  std::mt19937 rng(12);
  auto v = smooth_potential(g, rng);
  auto b = build_basis(BoundaryCondition::Periodic, g, 7);
  HamiltonianBuilder hb(b, soft_kernel(1.0), 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hb.one_body_matrix(v));
  CHECK(std::abs(ground_state(hb.build(v)).energy - es.eigenvalues()[0]) < 1e-10);
}

TEST_CASE("one-body elements agree with pair_external") {
  Grid g(50);
  std::mt19937 rng(1);
  auto v = smooth_potential(g, rng);
  ExternalPotential vd(v.regular(), {{0.37, 1.3}, {0.5, -0.4}}, 0.25);
  auto b = build_basis(BoundaryCondition::AntiPeriodic, g, 4);
  HamiltonianBuilder hb(b, Interaction::zero(), 2);
  Eigen::MatrixXd t = hb.one_body_matrix(vd);
  for (int a = 0; a < 4; ++a)
    for (int c = 0; c < 4; ++c) {
      GridFunction prod(g, b->modes.col(a).cwiseProduct(b->modes.col(c)));
      CHECK(std::abs(t(a, c) - b->kinetic(a, c) - pair_external(vd, prod)) < 1e-12);
    }
}

TEST_CASE("Hamiltonian symmetry and interaction energy consistency") {
  Grid g(100);
  std::mt19937 rng(3);
  auto v = smooth_potential(g, rng);
  ExternalPotential vd(v.regular(), {{0.41, 1.5}});
  auto w = Interaction::general(g, [](double x, double y) { return 1.0 / std::sqrt((x - y) * (x - y) + 0.1); });
  auto b = build_basis(BoundaryCondition::Neumann, g, 8);
  HamiltonianBuilder hb(b, w, 3);
  auto p = hb.build(vd);
  CHECK((p.hamiltonian - p.hamiltonian.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  auto gs = ground_state(p);

  // E = tr(Gamma t) + w(rho2)
  const Eigen::MatrixXd gamma = one_rdm(gs.psi);
  const double e1 = (gamma.cwiseProduct(hb.one_body_matrix(vd))).sum();
  const double e2 = pair_interaction(w, pair_density(gs.psi));
  CHECK(std::abs(e1 + e2 - gs.energy) < 1e-9 * (1 + std::abs(gs.energy)));
  CHECK(std::abs(gamma.trace() - 3.0) < 1e-12);
}

TEST_CASE("determinant densities") {
  Grid g(400);
  auto b = build_basis(BoundaryCondition::Neumann, g, 4);
  auto psi = WaveFunction::determinant(b, {0, 1});
  auto rho = density(psi);
  double err = 0;
  for (int i = 0; i <= 400; ++i) {
    const double c = std::cos(pi * g.node(i));
    err = std::max(err, std::abs(rho[i] - (1 + 2 * c * c)));
  }
  CHECK(err < 1e-3);
  CHECK(std::abs(integrate(rho.rho()) - 2.0) < 1e-10);

  auto rho1 = density(WaveFunction::determinant(b, {1}));
  double err1 = 0;
  for (int i = 0; i <= 400; ++i) {
    const double c = std::cos(pi * g.node(i));
    err1 = std::max(err1, std::abs(rho1[i] - 2 * c * c));
  }
  CHECK(err1 < 1e-3);

  auto rho2 = pair_density(psi);
  double diag = 0;
  for (int i = 0; i <= 400; ++i) diag = std::max(diag, std::abs(rho2.values(i, i)));
  CHECK(diag < 1e-6);
  CHECK_THROWS_AS(pair_density(WaveFunction::determinant(b, {2})), ValidationError);

  Eigen::VectorXd bad = Eigen::VectorXd::Zero(6);
  bad[0] = 1.1;
  CHECK_THROWS_AS(WaveFunction(b, std::make_shared<SlaterSpace>(4, 2), bad), ValidationError);
}

TEST_CASE("pair density of a determinant") {
  Grid g(60);
  auto b = build_basis(BoundaryCondition::Periodic, g, 5);
  auto psi = WaveFunction::determinant(b, {0, 2, 3});
  auto rho2 = pair_density(psi).values;
  // rho(x) rho(y) - gamma(x,y)^2 with gamma(x,y) = sum_k phi_k(x) phi_k(y)
  Eigen::MatrixXd occ(61, 3);
  occ << b->modes.col(0), b->modes.col(2), b->modes.col(3);
  Eigen::MatrixXd gam = occ * occ.transpose();
  Eigen::VectorXd rho = gam.diagonal();
  Eigen::MatrixXd ref = rho * rho.transpose() - gam.cwiseAbs2();
  CHECK((rho2 - ref).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("marginalization and K operator") {
  Grid g(100);
  std::mt19937 rng(6);
  for (auto [bc, N, K] : {std::tuple{BoundaryCondition::Neumann, 2, 8}, std::tuple{BoundaryCondition::Periodic, 3, 7},
                          std::tuple{BoundaryCondition::AntiPeriodic, 2, 6}}) {
    auto b = build_basis(bc, g, K);
    auto v = smooth_potential(g, rng, bc != BoundaryCondition::Neumann);
    auto gs = ground_state(assemble_HN(v, soft_kernel(0.8), b, N));
    auto rho = density(gs.psi);
    auto rho2 = pair_density(gs.psi);
    Eigen::VectorXd marg = rho2.values * g.weights();
    CHECK((marg - (N - 1) * rho.rho().values()).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(std::abs(g.weights().dot(marg) - N * (N - 1)) < 1e-8);

    // int K f = (N-1) int f by symmetry of rho2 and marginalization.
    auto f0 = GridFunction::sample(g, [](double x) { return std::exp(x); });
    CHECK(std::abs(integrate(apply_K(f0, gs.psi)) - (N - 1) * integrate(f0)) < 1e-8);
    auto zero = apply_K(GridFunction::constant(g, 0.0), gs.psi);
    CHECK(zero.values().cwiseAbs().maxCoeff() == 0.0);

    auto f = GridFunction::sample(g, [](double x) { return std::sin(3 * x); });
    auto h = GridFunction::sample(g, [](double x) { return x * x; });
    auto lhs = apply_K(f * 2.0 + h * -3.0, gs.psi);
    auto rhs = apply_K(f, gs.psi) * 2.0 + apply_K(h, gs.psi) * -3.0;
    CHECK((lhs - rhs).values().cwiseAbs().maxCoeff() < 1e-12 * (1 + lhs.values().cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("K on a uniform periodic determinant") {
  Grid g(200);
  auto b = build_basis(BoundaryCondition::Periodic, g, 3);
  auto psi = WaveFunction::determinant(b, {0, 1, 2});
  auto rho = density(psi);
  CHECK((rho.rho().values().array() - 3.0).abs().maxCoeff() < 1e-10);
  auto k1 = apply_K(GridFunction::constant(g, 1.0), psi);
  CHECK((k1.values().array() - 2.0).abs().maxCoeff() < 1e-6);
}

TEST_CASE("K is undefined for vanishing densities") {
  Grid g(100);
  auto b = build_basis(BoundaryCondition::Neumann, g, 3);
  CHECK_THROWS_AS(apply_K(GridFunction::constant(g, 1.0), WaveFunction::determinant(b, {1})), ValidationError);
}

TEST_CASE("ground state gap for random Neumann instances") {
  Grid g(100);
  std::mt19937 rng(17);
  auto b = build_basis(BoundaryCondition::Neumann, g, 8);
  HamiltonianBuilder hb(b, soft_kernel(0.5), 2);
  for (int t = 0; t < 5; ++t) {
    auto v = smooth_potential(g, rng);
    ExternalPotential vd(v.regular(), {{0.3 + 0.1 * t, 1.0}});
    auto gs = ground_state(hb.build(vd));
    CHECK(gs.gap > 1e-8);
  }
}

TEST_CASE("energy is nonincreasing in the basis size") {
  Grid g(100);
  std::mt19937 rng(23);
  auto v = smooth_potential(g, rng);
  auto w = soft_kernel(1.0);
  double prev = 1e300;
  for (int K : {4, 6, 8, 10}) {
    const double e = ground_state(assemble_HN(v, w, build_basis(BoundaryCondition::Neumann, g, K), 2)).energy;
    CHECK(e <= prev + 1e-10);
    prev = e;
  }
}

TEST_CASE("rearrangement of grid functions") {
  Grid g(400);
  auto f = GridFunction::sample(g, [](double x) { return std::sqrt(2.0) * std::cos(pi * x); });
  auto r = rearrange_G(-1, 0.5, f);
  CHECK(std::abs(r[400] + r[0]) < 1e-12);
  CHECK(std::abs(h1_norm_sq(r) - h1_norm_sq(f)) < 1e-10);
  double err = 0;
  for (int i = 0; i <= 400; ++i) err = std::max(err, std::abs(r[i] + std::sqrt(2.0) * std::sin(pi * g.node(i))));
  CHECK(err < 1e-12);

  auto tiny = rearrange_G(1, 1e-13, f);
  CHECK((tiny - f).values().cwiseAbs().maxCoeff() < 1e-10);
  CHECK_THROWS_AS(rearrange_G(1, 0.0, f), ValidationError);
  CHECK_THROWS_AS(rearrange_G(1, 1.2, f), ValidationError);
  CHECK_THROWS_AS(rearrange_G(2, 0.3, f), ValidationError);
}

TEST_CASE("rearranged potentials leave spectra unchanged") {
  Grid g(120);
  std::mt19937 rng(31);
  for (auto bc : {BoundaryCondition::Periodic, BoundaryCondition::AntiPeriodic}) {
    auto v = smooth_potential(g, rng, true);
    ExternalPotential vd(v.regular(), {{0.25, 2.0}});
    const double xs = 0.375;
    auto vt = rearrange_G(bc == BoundaryCondition::Periodic ? 1 : -1, xs, vd);
    CHECK(vt.deltas()[0].position == doctest::Approx(0.625));
    auto a = eigensolve_lowest(assemble_h(vd, bc), 6).eigenvalues;
    auto c = eigensolve_lowest(assemble_h(vt, bc), 6).eigenvalues;
    CHECK((a - c).cwiseAbs().maxCoeff() < 1e-9);

    // Many-body, with a general kernel shifted alongside.
    auto w = Interaction::general(g, [](double x, double y) {
      return std::cos(2 * pi * (x - y)) + 0.3 * std::cos(2 * pi * x) * std::cos(2 * pi * y);
    });
    auto wt = rearrange_G(1, xs, w);
    const int K = bc == BoundaryCondition::Periodic ? 7 : 6;
    const int N = bc == BoundaryCondition::Periodic ? 3 : 2;
    auto b = build_basis(bc, g, K);
    auto e1 = diagonalize(assemble_HN(vd, w, b, N)).energies;
    auto e2 = diagonalize(assemble_HN(vt, wt, b, N)).energies;
    CHECK((e1 - e2).cwiseAbs().maxCoeff() < 1e-8);
  }
}
