#include "fermi1d/single_particle.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fermi1d {

int dof_count(const Grid& grid, BoundaryCondition bc) {
  return bc == BoundaryCondition::Neumann ? grid.n_nodes() : grid.n_cells();
}

Eigen::VectorXd expand_dofs(const Grid& grid, BoundaryCondition bc, const Eigen::VectorXd& u) {
  if (u.size() != dof_count(grid, bc)) throw ValidationError("dof vector has the wrong length");
  if (bc == BoundaryCondition::Neumann) return u;
  Eigen::VectorXd out(grid.n_nodes());
  out.head(grid.n_cells()) = u;
  out[grid.n_cells()] = wrap_sign(bc) * u[0];
  return out;
}

namespace {

struct DofMap {
  int dof;
  double sign;
};

DofMap node_to_dof(const Grid& g, BoundaryCondition bc, int node) {
  if (bc != BoundaryCondition::Neumann && node == g.n_cells()) return {0, wrap_sign(bc)};
  return {node, 1.0};
}

}  // namespace

SingleParticleOperator assemble_h(const ExternalPotential& v, BoundaryCondition bc) {
  const Grid& g = v.grid();
  const int dim = dof_count(g, bc);
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(dim);
  const Eigen::VectorXd w = g.weights();
  const double inv_h = 1.0 / g.h();

  for (int c = 0; c < g.n_cells(); ++c) {
    const DofMap a = node_to_dof(g, bc, c);
    const DofMap b = node_to_dof(g, bc, c + 1);
    k(a.dof, a.dof) += inv_h;
    k(b.dof, b.dof) += inv_h;
    k(a.dof, b.dof) -= a.sign * b.sign * inv_h;
    k(b.dof, a.dof) -= a.sign * b.sign * inv_h;
  }
  const auto& vr = v.regular().values();
  for (int i = 0; i < g.n_nodes(); ++i) {
    const DofMap a = node_to_dof(g, bc, i);
    m[a.dof] += w[i];
    k(a.dof, a.dof) += w[i] * vr[i];
  }
  for (const auto& d : v.deltas()) {
    auto [c, t] = g.locate(d.position);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(dim);
    const DofMap a0 = node_to_dof(g, bc, c);
    b[a0.dof] += a0.sign * (1.0 - t);
    if (t > 0.0) {
      const DofMap a1 = node_to_dof(g, bc, c + 1);
      b[a1.dof] += a1.sign * t;
    }
    k.noalias() += d.weight * b * b.transpose();
  }
  if (v.constant() != 0.0) k.diagonal() += v.constant() * m;

  return SingleParticleOperator{g, bc, std::move(k), std::move(m)};
}

SingleParticleOperator assemble_h(const ExternalPotential& v, BoundaryCondition bc, const Grid& grid) {
  if (!(v.grid() == grid)) throw ValidationError("potential is sampled on a different grid");
  return assemble_h(v, bc);
}

std::vector<int> cluster_sizes(const Eigen::VectorXd& ascending, double tol) {
  std::vector<int> sizes;
  for (Eigen::Index i = 0; i < ascending.size(); ++i) {
    if (i > 0 && ascending[i] - ascending[i - 1] < tol) {
      ++sizes.back();
    } else {
      sizes.push_back(1);
    }
  }
  return sizes;
}

std::vector<int> degeneracy_profile(const EigenSolution& sol, double tol) {
  return cluster_sizes(sol.eigenvalues, tol);
}

void canonicalize_eigenvectors(const Eigen::VectorXd& eigenvalues, Eigen::MatrixXd& vectors,
                               double cluster_tol) {
  const Eigen::Index k = eigenvalues.size();
  Eigen::Index start = 0;
  while (start < k) {
    Eigen::Index end = start + 1;
    while (end < k && eigenvalues[end] - eigenvalues[end - 1] < cluster_tol) ++end;
    const Eigen::Index m = end - start;
    if (m > 1) {
      // Gram-Schmidt of the cluster projections of successive unit vectors.
      const Eigen::MatrixXd block = vectors.middleCols(start, m);
      const double row_scale = block.rowwise().norm().maxCoeff();
      Eigen::MatrixXd basis(m, m);
      Eigen::Index found = 0;
      for (Eigen::Index j = 0; j < block.rows() && found < m; ++j) {
        Eigen::VectorXd a = block.row(j).transpose();
        for (Eigen::Index p = 0; p < found; ++p) a -= basis.col(p).dot(a) * basis.col(p);
        for (Eigen::Index p = 0; p < found; ++p) a -= basis.col(p).dot(a) * basis.col(p);
        const double nrm = a.norm();
        if (nrm > 1e-4 * row_scale) basis.col(found++) = a / nrm;
      }
      if (found == m) vectors.middleCols(start, m) = block * basis;
    }
    start = end;
  }
  for (Eigen::Index c = 0; c < k; ++c) {
    auto col = vectors.col(c);
    const double big = col.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      if (std::abs(col[i]) >= big * (1.0 - 1e-8)) {
        if (col[i] < 0.0) col *= -1.0;
        break;
      }
    }
  }
}

EigenSolution eigensolve_lowest(const SingleParticleOperator& op, int k) {
  const int dim = op.dimension();
  if (k < 1 || k > dim) {
    throw ValidationError("eigensolve_lowest: k=" + std::to_string(k) + " outside [1, " +
                          std::to_string(dim) + "]");
  }
  const Eigen::VectorXd dm = op.mass.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd reduced = dm.asDiagonal() * op.stiffness * dm.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(reduced);
  if (es.info() != Eigen::Success) throw NumericalError("eigensolve_lowest: dense eigensolver failed");

  Eigen::VectorXd lambda = es.eigenvalues().head(k);
  Eigen::MatrixXd u = dm.asDiagonal() * es.eigenvectors().leftCols(k);
  canonicalize_eigenvectors(lambda, u, kPhaseClusterTol + 1e-14 * lambda.cwiseAbs().maxCoeff());

  const double s_norm = op.stiffness.cwiseAbs().rowwise().sum().maxCoeff();
  const double m_norm = op.mass.cwiseAbs().maxCoeff();
  for (int j = 0; j < k; ++j) {
    const double res = (op.stiffness * u.col(j) - lambda[j] * op.mass.cwiseProduct(u.col(j))).norm();
    const double bound = 1e-9 * (s_norm + std::abs(lambda[j]) * m_norm);
    if (!(res <= bound)) {
      std::ostringstream os;
      os << "eigensolve_lowest: residual " << res << " of pair " << j << " exceeds " << bound;
      throw NumericalError(os.str());
    }
  }

  EigenSolution sol{op.grid, op.bc, lambda, u, {}};
  sol.eigenvectors.reserve(k);
  for (int j = 0; j < k; ++j) {
    sol.eigenvectors.emplace_back(op.grid, expand_dofs(op.grid, op.bc, u.col(j)));
  }
  return sol;
}

OrbitalFilling fill_lowest(const SingleParticleOperator& op, int particle_count) {
  const int dim = op.dimension();
  if (particle_count < 1 || particle_count > dim) {
    throw ValidationError("fill_lowest: particle count outside [1, dimension]");
  }
  int k = std::min(dim, particle_count + 8);
  EigenSolution sol = eigensolve_lowest(op, k);
  const auto& eps = sol.eigenvalues;

  // Fermi shell [s, e) containing orbital N-1.
  int s = particle_count - 1;
  while (s > 0 && eps[s] - eps[s - 1] < kGapTol) --s;
  int e = particle_count;
  while (e < k && eps[e] - eps[e - 1] < kGapTol) ++e;
  if (e == k && k < dim) {
    sol = eigensolve_lowest(op, dim);
    k = dim;
    while (e < k && sol.eigenvalues[e] - sol.eigenvalues[e - 1] < kGapTol) ++e;
  }
  const int keep = std::min(k, e + 1);

  OrbitalFilling out{sol, Eigen::VectorXd::Zero(keep), GridFunction::constant(op.grid, 0.0)};
  out.orbitals.eigenvalues.conservativeResize(keep);
  out.orbitals.dof_vectors.conservativeResize(Eigen::NoChange, keep);
  out.orbitals.eigenvectors.erase(out.orbitals.eigenvectors.begin() + keep, out.orbitals.eigenvectors.end());

  for (int j = 0; j < s; ++j) out.occupations[j] = 1.0;
  const double frac = static_cast<double>(particle_count - s) / (e - s);
  for (int j = s; j < e; ++j) out.occupations[j] = frac;
  out.degenerate = e > particle_count;

  Eigen::VectorXd rho = Eigen::VectorXd::Zero(op.grid.n_nodes());
  for (int j = 0; j < e; ++j) {
    rho += out.occupations[j] * out.orbitals.eigenvectors[j].values().cwiseAbs2();
    out.energy += out.occupations[j] * out.orbitals.eigenvalues[j];
  }
  out.density = GridFunction(op.grid, std::move(rho));
  out.gap = particle_count < dim ? sol.eigenvalues[particle_count] - sol.eigenvalues[particle_count - 1]
                                 : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace fermi1d
