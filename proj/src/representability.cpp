#include "fermi1d/representability.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "fermi1d/many_body.hpp"

namespace fermi1d {

namespace {

GridFunction sqrt_density(const Density& rho) {
  return GridFunction(rho.grid(), rho.rho().values().cwiseMax(0.0).cwiseSqrt());
}

// 8-point Gauss-Legendre on [0,1].
constexpr std::array<double, 8> kGaussX = {
    0.5 - 0.5 * 0.9602898564975363, 0.5 - 0.5 * 0.7966664774136267, 0.5 - 0.5 * 0.5255324099163290,
    0.5 - 0.5 * 0.1834346424956498, 0.5 + 0.5 * 0.1834346424956498, 0.5 + 0.5 * 0.5255324099163290,
    0.5 + 0.5 * 0.7966664774136267, 0.5 + 0.5 * 0.9602898564975363};
constexpr std::array<double, 8> kGaussW = {
    0.5 * 0.1012285362903763, 0.5 * 0.2223810344533745, 0.5 * 0.3137066458778873, 0.5 * 0.3626837833783620,
    0.5 * 0.3626837833783620, 0.5 * 0.3137066458778873, 0.5 * 0.2223810344533745, 0.5 * 0.1012285362903763};

}  // namespace

RepresentabilityReport classify_density(const Density& rho, BoundaryCondition bc) {
  const int N = rho.particle_count();
  const auto& r = rho.rho().values();
  RepresentabilityReport rep;
  rep.integral = integrate(rho.rho());
  rep.min_value = r.minCoeff();
  rep.h1_norm = std::sqrt(h1_norm_sq(sqrt_density(rho)));
  rep.endpoint_match = std::abs(r[0] - r[r.size() - 1]) <= 1e-8;
  const bool integral_ok = std::abs(rep.integral - N) <= 1e-8 * N;
  rep.in_RN = rep.min_value >= -1e-12 * N && integral_ok && std::isfinite(rep.h1_norm) &&
              (!is_nonlocal(bc) || rep.endpoint_match);
  rep.in_DN = rep.in_RN && rep.min_value > kPositivityFloor * N;
  rep.in_DN_plus = rep.in_DN && rep.endpoint_match;
  return rep;
}

bool parity_ok(BoundaryCondition bc, int particle_count) {
  switch (bc) {
    case BoundaryCondition::Neumann: return true;
    case BoundaryCondition::Periodic: return particle_count % 2 == 1;
    case BoundaryCondition::AntiPeriodic: return particle_count % 2 == 0;
  }
  return false;
}

void require_invertible(const Density& rho, BoundaryCondition bc, bool allow_parity_violation) {
  const auto rep = classify_density(rho, bc);
  const bool ok = is_nonlocal(bc) ? rep.in_DN_plus : rep.in_DN;
  if (!ok) {
    std::ostringstream os;
    os << "target density is outside " << (is_nonlocal(bc) ? "D_N^+" : "D_N") << " for " << to_string(bc)
       << " (min " << rep.min_value << ", integral " << rep.integral << ", endpoint match "
       << (rep.endpoint_match ? "yes" : "no") << ")";
    throw ValidationError(os.str());
  }
  if (!allow_parity_violation && !parity_ok(bc, rho.particle_count())) {
    throw ValidationError(std::string(to_string(bc)) + " conditions need N " +
                          (bc == BoundaryCondition::Periodic ? "odd" : "even") +
                          " (set allow_parity_violation to override)");
  }
}

std::vector<double> slater_phases(BoundaryCondition bc, int particle_count) {
  using std::numbers::pi;
  std::vector<double> th;
  if (bc != BoundaryCondition::AntiPeriodic) {
    for (int k = 1; k <= particle_count; ++k) th.push_back(2 * pi * k);
    return th;
  }
  std::vector<int> ks;
  for (int m = 1; static_cast<int>(ks.size()) < particle_count; m += 2) {
    ks.push_back(m);
    if (static_cast<int>(ks.size()) < particle_count) ks.push_back(-m);
  }
  std::sort(ks.begin(), ks.end());
  for (int k : ks) th.push_back(pi * k);
  return th;
}

SlaterConstruction slater_from_density(const Density& rho, BoundaryCondition bc) {
  const Grid& g = rho.grid();
  const int N = rho.particle_count();
  const GridFunction F = cumulative_F(rho);  // rejects negative nodes
  const auto& r = rho.rho().values();
  const auto& f = F.values();

  SlaterConstruction out{{}, slater_phases(bc, N), Eigen::MatrixXcd::Zero(N, N),
                         GridFunction::constant(g, 0.0)};
  const Eigen::VectorXd amp = (r.cwiseMax(0.0) / N).cwiseSqrt();
  Eigen::VectorXd dens = Eigen::VectorXd::Zero(g.n_nodes());
  for (double th : out.thetas) {
    Eigen::VectorXcd v(g.n_nodes());
    for (int i = 0; i < g.n_nodes(); ++i) v[i] = amp[i] * std::polar(1.0, -th * f[i]);
    dens += v.cwiseAbs2();
    out.kinetic += dirichlet_energy(ComplexGridFunction(g, v));
    out.orbitals.emplace_back(g, std::move(v));
  }
  out.density = GridFunction(g, std::move(dens));

  // F is exactly quadratic on each cell for P1 rho, with dF = rho / N dx.
  for (int c = 0; c < g.n_cells(); ++c) {
    const double r0 = std::max(r[c], 0.0), r1 = std::max(r[c + 1], 0.0);
    const double avg = 0.5 * (r0 + r1);
    const double dF = f[c + 1] - f[c];
    if (avg <= 0.0 || dF <= 0.0) continue;
    for (std::size_t q = 0; q < kGaussX.size(); ++q) {
      const double s = kGaussX[q];
      const double rs = r0 + (r1 - r0) * s;
      const double Fs = f[c] + dF * (r0 * s + 0.5 * (r1 - r0) * s * s) / avg;
      const double wq = kGaussW[q] * dF * rs / avg;
      for (int j = 0; j < N; ++j)
        for (int k = 0; k < N; ++k) out.gram(j, k) += wq * std::polar(1.0, (out.thetas[j] - out.thetas[k]) * Fs);
    }
  }

  double theta2 = 0.0;
  for (double th : out.thetas) theta2 += th * th;
  const GridFunction cube(g, r.cwiseMax(0.0).array().cube().matrix());
  out.kinetic_formula = dirichlet_energy(sqrt_density(rho)) + theta2 / (double(N) * N * N) * integrate(cube);
  return out;
}

KineticBound kinetic_bound_check(const Density& rho, BoundaryCondition bc) {
  const auto s = slater_from_density(rho, bc);
  return KineticBound{s.kinetic, 1.0 + h1_norm_sq(sqrt_density(rho))};
}

}  // namespace fermi1d
