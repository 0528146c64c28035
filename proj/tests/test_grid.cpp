#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "fermi1d/grid.hpp"

using namespace fermi1d;
using std::numbers::pi;

TEST_CASE("grid nodes and weights") {
  Grid g(8);
  CHECK(g.node(0) == 0.0);
  CHECK(g.node(8) == 1.0);
  CHECK(g.h() == doctest::Approx(0.125));
  CHECK(g.weights().sum() == doctest::Approx(1.0));
  CHECK_THROWS_AS(Grid(0), ValidationError);
}

TEST_CASE("integrate") {
  CHECK(integrate(GridFunction::constant(Grid(7), 1.0)) == doctest::Approx(1.0));
  CHECK(integrate(GridFunction::sample(Grid(10), [](double x) { return x; })) == doctest::Approx(0.5).epsilon(1e-15));
  const auto f = GridFunction::sample(Grid(200), [](double x) { return 2 * std::cos(pi * x) * std::cos(pi * x); });
  CHECK(std::abs(integrate(f) - 1.0) < 1e-4);
}

TEST_CASE("integrate is linear") {
  Grid g(37);
  std::mt19937 rng(3);
  std::normal_distribution<double> nd;
  Eigen::VectorXd a(g.n_nodes()), b(g.n_nodes());
  for (int i = 0; i < g.n_nodes(); ++i) {
    a[i] = nd(rng);
    b[i] = nd(rng);
  }
  GridFunction f(g, a), h(g, b);
  CHECK(std::abs(integrate(f * 2.5 + h * -1.5) - (2.5 * integrate(f) - 1.5 * integrate(h))) < 1e-14);
}

TEST_CASE("h1_norm_sq") {
  CHECK(h1_norm_sq(GridFunction::constant(Grid(5), 1.0)) == doctest::Approx(1.0));
  // P1 interpolation of x is exact; the trapezoid rule on x^2 is not, so use a fine grid.
  CHECK(std::abs(h1_norm_sq(GridFunction::sample(Grid(1000), [](double x) { return x; })) - 4.0 / 3.0) < 1e-6);
  const auto f = GridFunction::sample(Grid(400), [](double x) { return std::sqrt(2.0) * std::cos(pi * x); });
  CHECK(std::abs(h1_norm_sq(f) - (1 + pi * pi)) < 1e-3);
}

TEST_CASE("quadrature converges at second order and H1 at first order or better") {
  auto f = [](double x) { return std::exp(std::sin(3 * x)); };
  auto df = [](double x) { return 3 * std::cos(3 * x) * std::exp(std::sin(3 * x)); };
  // Reference values from a very fine grid.
  const Grid fine(200000);
  const double ref_int = integrate(GridFunction::sample(fine, f));
  double ref_d = 0.0;
  {
    // midpoint rule on the exact derivative
    const int m = 200000;
    for (int i = 0; i < m; ++i) {
      const double x = (i + 0.5) / m;
      ref_d += df(x) * df(x) / m;
    }
  }
  double prev_i = 0, prev_d = 0;
  for (int n : {50, 100, 200}) {
    const auto g = GridFunction::sample(Grid(n), f);
    const double ei = std::abs(integrate(g) - ref_int);
    const double ed = std::abs(dirichlet_energy(g) - ref_d);
    if (n > 50) {
      CHECK(std::log2(prev_i / ei) > 1.8);
      CHECK(std::log2(prev_d / ed) > 0.9);
    }
    prev_i = ei;
    prev_d = ed;
  }
}

TEST_CASE("cumulative_F") {
  Grid g(400);
  const Density uni(GridFunction::constant(g, 3.0), 3);
  const auto F = cumulative_F(uni);
  for (int i = 0; i <= 400; ++i) CHECK(std::abs(F[i] - g.node(i)) < 1e-14);

  const auto rho = Density::normalized(
      GridFunction::sample(g, [](double x) { return 2 * std::cos(pi * x) * std::cos(pi * x); }), 1);
  const auto F2 = cumulative_F(rho);
  double err = 0;
  for (int i = 0; i <= 400; ++i) {
    const double x = g.node(i);
    err = std::max(err, std::abs(F2[i] - (x + std::sin(2 * pi * x) / (2 * pi))));
  }
  CHECK(err < 1e-4);
  CHECK(F2[400] == 1.0);
  for (int i = 0; i < 400; ++i) CHECK(F2[i + 1] >= F2[i]);
}

TEST_CASE("density validation") {
  Grid g(10);
  Eigen::VectorXd v = Eigen::VectorXd::Constant(11, 1.0);
  v[3] = -0.5;
  CHECK_THROWS_AS(Density(GridFunction(g, v), 1), ValidationError);
  CHECK_THROWS_AS(Density(GridFunction::constant(g, 1.0), 2), ValidationError);
}

TEST_CASE("pair_external") {
  Grid g(400);
  const auto f = GridFunction::sample(g, [](double x) { return 2 * std::cos(pi * x) * std::cos(pi * x); });
  ExternalPotential vd(GridFunction::constant(g, 0.0), {{0.5, 1.0}});
  CHECK(std::abs(pair_external(vd, f)) < 1e-6);
  ExternalPotential vc(GridFunction::constant(g, 0.0), {}, 3.0);
  CHECK(pair_external(vc, GridFunction::constant(g, 1.0)) == doctest::Approx(3.0));
  ExternalPotential vr(GridFunction::constant(g, 1.0));
  CHECK(pair_external(vr, GridFunction::sample(g, [](double x) { return x; })) == doctest::Approx(0.5));
  CHECK_THROWS_AS(ExternalPotential(GridFunction::constant(g, 0.0), {{1.5, 1.0}}), ValidationError);
}

TEST_CASE("pair_external is jointly linear") {
  Grid g(50);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  auto rnd = [&] {
    Eigen::VectorXd v(g.n_nodes());
    for (auto& x : v) x = u(rng);
    return GridFunction(g, v);
  };
  ExternalPotential v1(rnd(), {{0.33, 0.7}}, 0.2);
  ExternalPotential v2(rnd(), {{0.81, -1.3}}, -0.4);
  const auto f = rnd(), h = rnd();
  CHECK(std::abs(pair_external(v1, f * 2.0 + h) - 2.0 * pair_external(v1, f) - pair_external(v1, h)) < 1e-13);
  CHECK(std::abs(pair_external(v1 * 3.0 + v2, f) - 3.0 * pair_external(v1, f) - pair_external(v2, f)) < 1e-13);
}

TEST_CASE("delta positions snap to nodes") {
  Grid g(100);
  ExternalPotential v(GridFunction::constant(g, 0.0), {{0.500004, 1.0}, {0.2537, 1.0}});
  CHECK(v.deltas()[0].position == 0.5);
  CHECK(v.deltas()[1].position == 0.2537);
}

TEST_CASE("pair_interaction") {
  Grid g(100);
  const auto rho = GridFunction::sample(g, [](double x) { return 1 + 2 * std::cos(pi * x) * std::cos(pi * x); });
  PairFunction any = PairFunction::tensor(rho, rho);
  CHECK(pair_interaction(Interaction::zero(), any) == 0.0);

  auto one = Interaction::general(g, [](double, double) { return 1.0; });
  CHECK(std::abs(pair_interaction(one, any) - 4.0) < 1e-6);

  auto c = Interaction::convolution([](double s) { return std::cos(2 * pi * s); }, 2001);
  PairFunction ones{g, Eigen::MatrixXd::Ones(g.n_nodes(), g.n_nodes())};
  CHECK(std::abs(pair_interaction(c, ones)) < 1e-6);
}

TEST_CASE("interaction validation") {
  Grid g(4);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(5, 5);
  m(0, 1) = 1.0;
  CHECK_THROWS_AS(Interaction::general(g, m), ValidationError);
  CHECK_THROWS_AS(Interaction::convolution(Eigen::Vector3d(1.0, 0.0, 2.0)), ValidationError);
  CHECK_THROWS_AS(Interaction::convolution(Eigen::Vector4d(1.0, 0.0, 0.0, 1.0)), ValidationError);
}

TEST_CASE("boundary condition names") {
  CHECK(parse_boundary_condition("Anti-Periodic") == BoundaryCondition::AntiPeriodic);
  CHECK(parse_boundary_condition(to_string(BoundaryCondition::Neumann)) == BoundaryCondition::Neumann);
  CHECK_THROWS_AS(parse_boundary_condition("dirichlet"), ValidationError);
}
