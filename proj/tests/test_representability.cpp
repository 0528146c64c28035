#include "doctest.h"

#include <cmath>
#include <numbers>

#include "fermi1d/representability.hpp"

using namespace fermi1d;
using std::numbers::pi;

namespace {

Density from(const Grid& g, int N, double (*f)(double)) { return Density::normalized(GridFunction::sample(g, f), N); }

double cos2(double x) { return 2 * std::cos(pi * x) * std::cos(pi * x); }
double one_plus_cos2(double x) { return 1 + cos2(x); }

}  // namespace

TEST_CASE("classify_density") {
  Grid g(400);
  auto a = classify_density(from(g, 2, one_plus_cos2), BoundaryCondition::Neumann);
  CHECK(a.in_DN);
  CHECK(a.in_RN);
  CHECK(std::abs(a.integral - 2.0) < 1e-10);

  auto b = classify_density(from(g, 1, cos2), BoundaryCondition::AntiPeriodic);
  CHECK_FALSE(b.in_DN);
  CHECK_FALSE(b.in_DN_plus);
  CHECK(b.endpoint_match);
  CHECK(b.in_RN);
  CHECK(b.min_value < 1e-8);

  auto c = classify_density(Density(GridFunction::constant(g, 3.0), 3), BoundaryCondition::Periodic);
  CHECK(c.in_DN_plus);
  CHECK(c.h1_norm == doctest::Approx(std::sqrt(3.0)));

  // Endpoint mismatch: fine for Neumann, outside the class for periodic.
  auto lin = Density::normalized(GridFunction::sample(g, [](double x) { return 1 + x; }), 2);
  CHECK(classify_density(lin, BoundaryCondition::Neumann).in_DN);
  CHECK_FALSE(classify_density(lin, BoundaryCondition::Neumann).in_DN_plus);
  CHECK_FALSE(classify_density(lin, BoundaryCondition::Periodic).in_DN);
}

TEST_CASE("report implications hold") {
  Grid g(100);
  for (auto bc : {BoundaryCondition::Neumann, BoundaryCondition::Periodic, BoundaryCondition::AntiPeriodic}) {
    for (auto* f : {cos2, one_plus_cos2}) {
      auto r = classify_density(from(g, 2, f), bc);
      CHECK((!r.in_DN || r.in_RN));
      CHECK((!r.in_DN_plus || (r.in_DN && r.endpoint_match)));
    }
  }
}

TEST_CASE("require_invertible") {
  Grid g(100);
  auto u3 = Density(GridFunction::constant(g, 3.0), 3);
  CHECK_NOTHROW(require_invertible(u3, BoundaryCondition::Periodic));
  CHECK_THROWS_AS(require_invertible(u3, BoundaryCondition::AntiPeriodic), ValidationError);
  CHECK_NOTHROW(require_invertible(u3, BoundaryCondition::AntiPeriodic, true));
  CHECK_THROWS_AS(require_invertible(from(g, 1, cos2), BoundaryCondition::AntiPeriodic, true), ValidationError);
}

TEST_CASE("slater phases") {
  auto p = slater_phases(BoundaryCondition::Periodic, 3);
  CHECK(p[2] == doctest::Approx(6 * pi));
  auto a2 = slater_phases(BoundaryCondition::AntiPeriodic, 2);
  CHECK(a2 == std::vector<double>{-pi, pi});
  auto a3 = slater_phases(BoundaryCondition::AntiPeriodic, 3);
  CHECK(a3 == std::vector<double>{-pi, pi, 3 * pi});
  CHECK(slater_phases(BoundaryCondition::AntiPeriodic, 4).front() == doctest::Approx(-3 * pi));
}

TEST_CASE("uniform single orbital") {
  Grid g(200);
  auto s = slater_from_density(Density(GridFunction::constant(g, 1.0), 1), BoundaryCondition::Periodic);
  for (int i = 0; i <= 200; ++i) {
    CHECK(std::abs(s.orbitals[0][i] - std::polar(1.0, -2 * pi * g.node(i))) < 1e-12);
  }
  CHECK((s.density.values().array() - 1.0).abs().maxCoeff() < 1e-14);
}

TEST_CASE("uniform two-particle kinetic energy") {
  // F(x) = x, so orbital k has ||phi_k'||^2 = (2 pi k)^2; total 4 pi^2 (1 + 4).
  Grid g(400);
  auto s = slater_from_density(Density(GridFunction::constant(g, 2.0), 2), BoundaryCondition::Periodic);
  CHECK(s.kinetic_formula == doctest::Approx(20 * pi * pi).epsilon(1e-12));
  // The P1 derivative of a sampled plane wave underestimates by a factor sinc^2.
  double brute = 0;
  for (int k = 1; k <= 2; ++k) {
    const double t = 2 * pi * k * g.h() / 2;
    brute += std::pow(2 * pi * k, 2) * std::pow(std::sin(t) / t, 2);
  }
  CHECK(s.kinetic == doctest::Approx(brute).epsilon(1e-10));
  CHECK(std::abs(s.kinetic / s.kinetic_formula - 1) < 1e-3);
}

TEST_CASE("orthonormal construction for a Neumann density") {
  Grid g(400);
  auto rho = from(g, 2, one_plus_cos2);
  auto s = slater_from_density(rho, BoundaryCondition::Neumann);
  CHECK((s.gram - Eigen::MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((s.density - rho.rho()).values().cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("anti-periodic construction respects the sign rule") {
  Grid g(300);
  auto rho = Density::normalized(GridFunction::sample(g, [](double x) { return 1.5 + std::cos(2 * pi * x); }), 2);
  auto s = slater_from_density(rho, BoundaryCondition::AntiPeriodic);
  for (const auto& o : s.orbitals) CHECK(std::abs(o[300] + o[0]) < 1e-12);
  CHECK((s.gram - Eigen::MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("kinetic bound ratio is uniform over a family") {
  Grid g(400);
  double lo = 1e300, hi = 0;
  for (double eps : {0.0, 0.3, 0.6}) {
    auto rho = Density::normalized(GridFunction::sample(g, [&](double x) { return 1 + eps * std::cos(2 * pi * x); }), 2);
    auto kb = kinetic_bound_check(rho, BoundaryCondition::Periodic);
    CHECK(std::isfinite(kb.ratio()));
    lo = std::min(lo, kb.ratio());
    hi = std::max(hi, kb.ratio());
  }
  CHECK(hi / lo < 3.0);

  // Touching zero still yields a report.
  auto kb = kinetic_bound_check(from(g, 1, cos2), BoundaryCondition::AntiPeriodic);
  CHECK(std::isfinite(kb.t_slater));
  CHECK(kb.bound_rhs > 1.0);
}

TEST_CASE("negative density rejected") {
  Grid g(10);
  Eigen::VectorXd v = Eigen::VectorXd::Constant(11, 1.0);
  v[4] = -1e-13;  // tolerated by Density, rejected by the construction
  v *= 1.0 / Grid(10).weights().dot(v);
  CHECK_THROWS_AS(slater_from_density(Density(GridFunction(g, v), 1), BoundaryCondition::Neumann), ValidationError);
}
