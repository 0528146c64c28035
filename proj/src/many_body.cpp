#include "fermi1d/many_body.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

namespace fermi1d {

namespace {

inline double annihilate(std::uint64_t& mask, int p) {
  const std::uint64_t bit = std::uint64_t{1} << p;
  if (!(mask & bit)) return 0.0;
  const int below = std::popcount(mask & (bit - 1));
  mask &= ~bit;
  return (below & 1) ? -1.0 : 1.0;
}

inline double create(std::uint64_t& mask, int p) {
  const std::uint64_t bit = std::uint64_t{1} << p;
  if (mask & bit) return 0.0;
  const int below = std::popcount(mask & (bit - 1));
  mask |= bit;
  return (below & 1) ? -1.0 : 1.0;
}

std::vector<int> bits_of(std::uint64_t mask, int modes, bool set) {
  std::vector<int> out;
  for (int p = 0; p < modes; ++p) {
    if (((mask >> p) & 1u) == (set ? 1u : 0u)) out.push_back(p);
  }
  return out;
}

// Visits every term <row| a+_a a+_b a_d a_c |col> with a<b, c<d.
template <class F>
void for_each_pair_hop(const SlaterSpace& space, F&& visit) {
  const int K = space.modes();
  const auto& dets = space.determinants();
  for (int col = 0; col < space.dimension(); ++col) {
    const std::vector<int> occ = bits_of(dets[col], K, true);
    for (std::size_t i = 0; i < occ.size(); ++i) {
      for (std::size_t j = i + 1; j < occ.size(); ++j) {
        const int c = occ[i];
        const int d = occ[j];
        std::uint64_t m1 = dets[col];
        const double s1 = annihilate(m1, c) * annihilate(m1, d);
        const std::vector<int> empty = bits_of(m1, K, false);
        for (std::size_t p = 0; p < empty.size(); ++p) {
          for (std::size_t q = p + 1; q < empty.size(); ++q) {
            const int a = empty[p];
            const int b = empty[q];
            std::uint64_t m2 = m1;
            const double s2 = create(m2, b) * create(m2, a);
            visit(space.index_of(m2), col, a, b, c, d, s1 * s2);
          }
        }
      }
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Basis

BasisPtr build_basis(BoundaryCondition bc, const Grid& grid, int K) {
  const SingleParticleOperator op = assemble_h(ExternalPotential::zero(grid), bc);
  const int dim = op.dimension();
  if (K < 1 || K > dim) {
    throw ValidationError("basis size " + std::to_string(K) + " outside [1, " + std::to_string(dim) + "]");
  }
  if (K > 64) throw ValidationError("basis size above 64 is not supported");
  const EigenSolution sol = eigensolve_lowest(op, std::min(K + 1, dim));
  if (K < dim && sol.eigenvalues[K] - sol.eigenvalues[K - 1] <
                     1e-6 * std::max(1.0, std::abs(sol.eigenvalues[K]))) {
    std::ostringstream os;
    os << "basis size " << K << " splits a degenerate free level for " << to_string(bc) << " (use "
       << K - 1 << " or " << K + 1 << ")";
    throw ValidationError(os.str());
  }
  auto basis = std::make_shared<SpectralBasis>(SpectralBasis{grid, bc, {}, {}, {}});
  basis->modes.resize(grid.n_nodes(), K);
  for (int a = 0; a < K; ++a) basis->modes.col(a) = sol.eigenvectors[a].values();
  basis->free_energies = sol.eigenvalues.head(K);
  const Eigen::MatrixXd diff =
      (basis->modes.bottomRows(grid.n_cells()) - basis->modes.topRows(grid.n_cells())) / grid.h();
  basis->kinetic = grid.h() * diff.transpose() * diff;
  return basis;
}

// ---------------------------------------------------------------------------
// SlaterSpace

SlaterSpace::SlaterSpace(int modes, int particles) : modes_(modes), particles_(particles) {
  if (modes < 1 || modes > 64) throw ValidationError("Slater space needs 1..64 modes");
  if (particles < 1 || particles > modes) {
    throw ValidationError("particle count " + std::to_string(particles) + " outside [1, " +
                          std::to_string(modes) + "]");
  }
  std::vector<int> idx(particles);
  for (int i = 0; i < particles; ++i) idx[i] = i;
  while (true) {
    std::uint64_t m = 0;
    for (int i : idx) m |= std::uint64_t{1} << i;
    dets_.push_back(m);
    int i = particles - 1;
    while (i >= 0 && idx[i] == modes - particles + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < particles; ++j) idx[j] = idx[j - 1] + 1;
  }
  sorted_.reserve(dets_.size());
  for (int i = 0; i < dimension(); ++i) sorted_.emplace_back(dets_[i], i);
  std::sort(sorted_.begin(), sorted_.end());

  for (int col = 0; col < dimension(); ++col) {
    for (int b : bits_of(dets_[col], modes_, true)) {
      std::uint64_t m1 = dets_[col];
      const double s1 = annihilate(m1, b);
      for (int a : bits_of(m1, modes_, false)) {
        std::uint64_t m2 = m1;
        const double s2 = create(m2, a);
        hops_.push_back(Hop{index_of(m2), col, a, b, s1 * s2});
      }
    }
  }
}

std::vector<int> SlaterSpace::occupied(int index) const { return bits_of(dets_.at(index), modes_, true); }

int SlaterSpace::index_of(std::uint64_t mask) const {
  auto it = std::lower_bound(sorted_.begin(), sorted_.end(), std::make_pair(mask, -1));
  if (it == sorted_.end() || it->first != mask) return -1;
  return it->second;
}

// ---------------------------------------------------------------------------
// Hamiltonian

HamiltonianBuilder::HamiltonianBuilder(BasisPtr basis, const Interaction& w, int particle_count)
    : basis_(std::move(basis)) {
  if (!basis_) throw ValidationError("missing spectral basis");
  const int K = basis_->size();
  space_ = std::make_shared<SlaterSpace>(K, particle_count);
  const int dim = space_->dimension();
  interaction_part_ = Eigen::MatrixXd::Zero(dim, dim);
  if (w.is_zero()) {
    two_body_ = Eigen::MatrixXd::Zero(K * K, K * K);
    return;
  }
  const Grid& g = basis_->grid;
  Eigen::MatrixXd P(g.n_nodes(), K * K);
  for (int a = 0; a < K; ++a)
    for (int c = 0; c < K; ++c) P.col(a * K + c) = basis_->modes.col(a).cwiseProduct(basis_->modes.col(c));
  const Eigen::VectorXd wt = g.weights();
  const Eigen::MatrixXd kernel = wt.asDiagonal() * w.kernel_matrix(g) * wt.asDiagonal();
  two_body_ = P.transpose() * kernel * P;

  const Eigen::MatrixXd& V = two_body_;
  for_each_pair_hop(*space_, [&](int row, int col, int a, int b, int c, int d, double sign) {
    const double amp = 2.0 * (V(a * K + c, b * K + d) - V(a * K + d, b * K + c));
    interaction_part_(row, col) += sign * amp;
  });
  interaction_part_ = 0.5 * (interaction_part_ + interaction_part_.transpose()).eval();
}

Eigen::MatrixXd HamiltonianBuilder::one_body_matrix(const ExternalPotential& v) const {
  const Grid& g = basis_->grid;
  if (!(v.grid() == g)) throw ValidationError("potential and basis live on different grids");
  const Eigen::MatrixXd& phi = basis_->modes;
  const Eigen::VectorXd wt = g.weights();
  const Eigen::VectorXd dens = wt.cwiseProduct(v.regular().values()).array() + v.constant() * wt.array();
  Eigen::MatrixXd t = basis_->kinetic + phi.transpose() * dens.asDiagonal() * phi;
  for (const auto& d : v.deltas()) {
    auto [c, s] = g.locate(d.position);
    // The pairing acts on the P1 interpolant of the nodal product.
    t.noalias() += d.weight * (1.0 - s) * phi.row(c).transpose() * phi.row(c);
    if (s > 0.0) t.noalias() += d.weight * s * phi.row(c + 1).transpose() * phi.row(c + 1);
  }
  return 0.5 * (t + t.transpose());
}

Eigen::MatrixXd HamiltonianBuilder::lift_one_body(const Eigen::MatrixXd& t) const {
  const int dim = space_->dimension();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& hop : space_->hops()) h(hop.row, hop.col) += hop.sign * t(hop.a, hop.b);
  return h;
}

Eigen::MatrixXd HamiltonianBuilder::hamiltonian(const Eigen::MatrixXd& t) const {
  return lift_one_body(t) + interaction_part_;
}

ManyBodyProblem HamiltonianBuilder::build(const ExternalPotential& v) const {
  Eigen::MatrixXd h = hamiltonian(one_body_matrix(v));
  return ManyBodyProblem{basis_, space_, space_->particles(), std::move(h)};
}

ManyBodyProblem assemble_HN(const ExternalPotential& v, const Interaction& w, BasisPtr basis,
                            int particle_count) {
  return HamiltonianBuilder(std::move(basis), w, particle_count).build(v);
}

// ---------------------------------------------------------------------------
// Wave functions and ground states

WaveFunction::WaveFunction(BasisPtr basis, SpacePtr space, Eigen::VectorXd coeffs)
    : basis_(std::move(basis)), space_(std::move(space)), coeffs_(std::move(coeffs)) {
  if (!basis_ || !space_) throw ValidationError("wave function needs a basis and a Slater space");
  if (space_->modes() != basis_->size()) throw ValidationError("Slater space does not match the basis");
  if (coeffs_.size() != space_->dimension()) throw ValidationError("coefficient vector has the wrong length");
  if (std::abs(coeffs_.norm() - 1.0) > 1e-12) throw ValidationError("wave function is not normalized");
}

WaveFunction WaveFunction::determinant(BasisPtr basis, std::vector<int> occupied_modes) {
  if (!basis) throw ValidationError("missing spectral basis");
  std::sort(occupied_modes.begin(), occupied_modes.end());
  std::uint64_t mask = 0;
  for (int a : occupied_modes) {
    if (a < 0 || a >= basis->size()) throw ValidationError("occupied mode outside the basis");
    if (mask & (std::uint64_t{1} << a)) throw ValidationError("mode occupied twice");
    mask |= std::uint64_t{1} << a;
  }
  auto space = std::make_shared<SlaterSpace>(basis->size(), static_cast<int>(occupied_modes.size()));
  Eigen::VectorXd c = Eigen::VectorXd::Zero(space->dimension());
  c[space->index_of(mask)] = 1.0;
  return WaveFunction(std::move(basis), std::move(space), std::move(c));
}

ManyBodySpectrum diagonalize(const ManyBodyProblem& p) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p.hamiltonian);
  if (es.info() != Eigen::Success) throw NumericalError("many-body eigensolver failed");
  ManyBodySpectrum s{es.eigenvalues(), es.eigenvectors()};
  const double scale = std::max(1.0, s.energies.cwiseAbs().maxCoeff());
  canonicalize_eigenvectors(s.energies, s.vectors, kPhaseClusterTol * scale);
  return s;
}

GroundState ground_state(const ManyBodyProblem& p) {
  ManyBodySpectrum s = diagonalize(p);
  const double gap = s.energies.size() > 1 ? s.energies[1] - s.energies[0]
                                           : std::numeric_limits<double>::infinity();
  Eigen::VectorXd c = s.vectors.col(0);
  c /= c.norm();
  const double res = (p.hamiltonian * c - s.energies[0] * c).norm();
  if (!(res <= 1e-9 * (1.0 + std::abs(s.energies[0])))) {
    std::ostringstream os;
    os << "ground state residual " << res << " too large";
    throw NumericalError(os.str());
  }
  return GroundState{s.energies[0], gap, WaveFunction(p.basis, p.space, std::move(c))};
}

// ---------------------------------------------------------------------------
// Reduced densities

Eigen::MatrixXd transition_one_rdm(const SlaterSpace& space, const Eigen::VectorXd& bra,
                                   const Eigen::VectorXd& ket) {
  const int K = space.modes();
  Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(K, K);
  for (const auto& hop : space.hops()) gamma(hop.a, hop.b) += hop.sign * bra[hop.row] * ket[hop.col];
  return gamma;
}

Eigen::MatrixXd one_rdm(const WaveFunction& psi) {
  Eigen::MatrixXd g = transition_one_rdm(*psi.space(), psi.coeffs(), psi.coeffs());
  return 0.5 * (g + g.transpose());
}

Eigen::MatrixXd two_rdm(const WaveFunction& psi) {
  const int K = psi.basis()->size();
  const Eigen::VectorXd& c = psi.coeffs();
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(K * K, K * K);
  for_each_pair_hop(*psi.space(), [&](int row, int col, int a, int b, int cc, int d, double sign) {
    const double val = sign * c[row] * c[col];
    if (val == 0.0) return;
    G(a * K + cc, b * K + d) += val;
    G(b * K + cc, a * K + d) -= val;
    G(a * K + d, b * K + cc) -= val;
    G(b * K + d, a * K + cc) += val;
  });
  return G;
}

GridFunction density_from_rdm(const SpectralBasis& basis, const Eigen::MatrixXd& gamma) {
  const Eigen::MatrixXd& phi = basis.modes;
  Eigen::VectorXd rho = (phi * gamma).cwiseProduct(phi).rowwise().sum();
  return GridFunction(basis.grid, std::move(rho));
}

Density density(const WaveFunction& psi) {
  GridFunction rho = density_from_rdm(*psi.basis(), one_rdm(psi));
  Eigen::VectorXd v = rho.values().cwiseMax(0.0);
  return Density(GridFunction(rho.grid(), std::move(v)), psi.particle_count());
}

PairFunction pair_density(const WaveFunction& psi) {
  if (psi.particle_count() < 2) throw ValidationError("pair density undefined for N = 1");
  const SpectralBasis& b = *psi.basis();
  const int K = b.size();
  Eigen::MatrixXd P(b.grid.n_nodes(), K * K);
  for (int a = 0; a < K; ++a)
    for (int c = 0; c < K; ++c) P.col(a * K + c) = b.modes.col(a).cwiseProduct(b.modes.col(c));
  Eigen::MatrixXd rho2 = P * two_rdm(psi) * P.transpose();
  rho2 = 0.5 * (rho2 + rho2.transpose()).eval();
  return PairFunction{b.grid, std::move(rho2)};
}

GridFunction apply_K(const GridFunction& f, const WaveFunction& psi) {
  const Grid& g = psi.basis()->grid;
  if (!(f.grid() == g)) throw ValidationError("apply_K: function and wave function on different grids");
  const Density rho = density(psi);
  const int N = psi.particle_count();
  if (rho.rho().values().minCoeff() <= kPositivityFloor * N) {
    throw ValidationError("apply_K needs a strictly positive density");
  }
  const PairFunction rho2 = pair_density(psi);
  const Eigen::VectorXd q =
      g.weights().cwiseProduct(f.values()).cwiseQuotient(rho.rho().values());
  return GridFunction(g, rho2.values * q);
}

// ---------------------------------------------------------------------------
// Rearrangement

namespace {

void check_shift(int sign, double x_star) {
  if (sign != 1 && sign != -1) throw ValidationError("rearrangement sign must be +1 or -1");
  if (!(x_star > 0.0 && x_star < 1.0)) throw ValidationError("rearrangement shift must lie in (0,1)");
}

// Number of cells x_star spans when it is a node multiple, else -1.
int node_shift(const Grid& g, double x_star) {
  const double s = x_star * g.n_cells();
  const double r = std::round(s);
  return std::abs(s - r) < 1e-9 ? static_cast<int>(r) : -1;
}

}  // namespace

GridFunction rearrange_G(int sign, double x_star, const GridFunction& f) {
  check_shift(sign, x_star);
  const Grid& g = f.grid();
  const int n = g.n_cells();
  Eigen::VectorXd out(g.n_nodes());
  if (const int m = node_shift(g, x_star); m >= 0) {
    for (int i = 0; i <= n; ++i) out[i] = i + m <= n ? f[i + m] : sign * f[i + m - n];
  } else {
    for (int i = 0; i <= n; ++i) {
      const double y = g.node(i) + x_star;
      out[i] = y <= 1.0 ? f(y) : sign * f(y - 1.0);
    }
  }
  return GridFunction(g, std::move(out));
}

ExternalPotential rearrange_G(int sign, double x_star, const ExternalPotential& v) {
  check_shift(sign, x_star);
  const Grid& g = v.grid();
  const int n = g.n_cells();
  const GridFunction& r = v.regular();
  Eigen::VectorXd out(g.n_nodes());
  if (const int m = node_shift(g, x_star); m >= 0) {
    for (int i = 0; i <= n; ++i) out[i] = i >= m ? r[i - m] : r[i - m + n];
  } else {
    for (int i = 0; i <= n; ++i) {
      double z = g.node(i) - x_star;
      if (z < 0.0) z += 1.0;
      out[i] = r(std::clamp(z, 0.0, 1.0));
    }
  }
  std::vector<DeltaTerm> deltas = v.deltas();
  for (auto& d : deltas) {
    double p = d.position + x_star;
    if (p >= 1.0 - 1e-14) p -= 1.0;
    d.position = std::clamp(p, 0.0, 1.0);
  }
  return ExternalPotential(GridFunction(g, std::move(out)), std::move(deltas), v.constant());
}

Interaction rearrange_G(int sign, double x_star, const Interaction& w) {
  check_shift(sign, x_star);
  switch (w.kind()) {
    case Interaction::Kind::Zero: return w;
    case Interaction::Kind::Convolution: {
      // w(x - y) is invariant exactly when the kernel is 1-periodic.
      const auto& s = w.convolution_samples();
      const Eigen::Index half = (s.size() - 1) / 2;
      const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
      for (Eigen::Index k = 0; k <= half; ++k) {
        if (std::abs(s[k] - s[k + half]) > 1e-12 * scale) {
          throw ValidationError(
              "rearrangement of a non-periodic convolution kernel; pass it as a general kernel");
        }
      }
      return w;
    }
    case Interaction::Kind::General: {
      const Grid& g = w.kernel_grid();
      const int n = g.n_cells();
      const int m = node_shift(g, x_star);
      if (m < 0) throw ValidationError("general kernel rearrangement needs a shift on the kernel grid");
      const Eigen::MatrixXd& W = w.general_values();
      auto back = [&](int i) { return i >= m ? i - m : i - m + n; };
      Eigen::MatrixXd out(g.n_nodes(), g.n_nodes());
      for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) out(i, j) = W(back(i), back(j));
      return Interaction::general(g, std::move(out));
    }
  }
  return w;
}

}  // namespace fermi1d
