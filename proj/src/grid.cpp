#include "fermi1d/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fermi1d {

std::string_view to_string(BoundaryCondition bc) {
  switch (bc) {
    case BoundaryCondition::Neumann: return "neumann";
    case BoundaryCondition::Periodic: return "periodic";
    case BoundaryCondition::AntiPeriodic: return "antiperiodic";
  }
  return "unknown";
}

BoundaryCondition parse_boundary_condition(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  s.erase(std::remove(s.begin(), s.end(), '-'), s.end());
  s.erase(std::remove(s.begin(), s.end(), '_'), s.end());
  if (s == "neumann") return BoundaryCondition::Neumann;
  if (s == "periodic") return BoundaryCondition::Periodic;
  if (s == "antiperiodic") return BoundaryCondition::AntiPeriodic;
  throw ValidationError("unknown boundary condition '" + std::string(name) +
                        "' (expected neumann, periodic or antiperiodic)");
}

// ---------------------------------------------------------------------------
// Grid

Grid::Grid(int n_cells) : n_cells_(n_cells), h_(0.0) {
  if (n_cells < 1) throw ValidationError("grid needs at least one cell");
  h_ = 1.0 / n_cells;
}

double Grid::node(int i) const { return static_cast<double>(i) / n_cells_; }

Eigen::VectorXd Grid::nodes() const {
  Eigen::VectorXd x(n_nodes());
  for (int i = 0; i < n_nodes(); ++i) x[i] = node(i);
  return x;
}

Eigen::VectorXd Grid::weights() const {
  Eigen::VectorXd w = Eigen::VectorXd::Constant(n_nodes(), h_);
  w[0] *= 0.5;
  w[n_cells_] *= 0.5;
  return w;
}

std::pair<int, double> Grid::locate(double x) const {
  constexpr double slack = 1e-14;
  if (!(x >= -slack && x <= 1.0 + slack)) {
    std::ostringstream os;
    os << "point " << x << " outside [0,1]";
    throw ValidationError(os.str());
  }
  const double s = std::clamp(x, 0.0, 1.0) * n_cells_;
  int c = std::min(static_cast<int>(std::floor(s)), n_cells_ - 1);
  double t = s - c;
  if (t < 1e-12) {
    t = 0.0;
  } else if (t > 1.0 - 1e-12) {
    ++c;
    t = 0.0;
  }
  return {c, t};
}

int Grid::snap(double x) const {
  const double s = x * n_cells_;
  const double r = std::round(s);
  if (r < 0 || r > n_cells_) return -1;
  return std::abs(s - r) <= 0.01 ? static_cast<int>(r) : -1;
}

// ---------------------------------------------------------------------------
// PairFunction / Density

PairFunction PairFunction::tensor(const GridFunction& f, const GridFunction& g) {
  if (!(f.grid() == g.grid())) throw ValidationError("tensor product of functions on different grids");
  return PairFunction{f.grid(), f.values() * g.values().transpose()};
}

Density::Density(GridFunction rho, int particle_count) : rho_(std::move(rho)), n_(particle_count) {
  if (n_ < 1) throw ValidationError("particle count must be positive");
  const double floor = -1e-12 * n_;
  for (int i = 0; i < rho_.size(); ++i) {
    if (!(rho_[i] >= floor)) {
      std::ostringstream os;
      os << "density is negative at node " << i << " (value " << rho_[i] << ")";
      throw ValidationError(os.str());
    }
  }
  const double total = integrate(rho_);
  if (std::abs(total - n_) > 1e-10 * n_) {
    std::ostringstream os;
    os.precision(16);
    os << "density integrates to " << total << ", expected " << n_;
    throw ValidationError(os.str());
  }
}

Density Density::normalized(const GridFunction& shape, int particle_count) {
  const double total = integrate(shape);
  if (!(total > 0.0)) throw ValidationError("cannot normalize a density with nonpositive integral");
  return Density(shape * (particle_count / total), particle_count);
}

// ---------------------------------------------------------------------------
// ExternalPotential

ExternalPotential::ExternalPotential(GridFunction regular, std::vector<DeltaTerm> deltas,
                                     double constant)
    : regular_(std::move(regular)), deltas_(std::move(deltas)), constant_(constant) {
  const Grid& g = regular_.grid();
  for (auto& d : deltas_) {
    if (!(d.position >= 0.0 && d.position <= 1.0)) {
      std::ostringstream os;
      os << "delta position " << d.position << " outside [0,1]";
      throw ValidationError(os.str());
    }
    if (int k = g.snap(d.position); k >= 0) d.position = g.node(k);
  }
}

ExternalPotential ExternalPotential::zero(const Grid& grid) {
  return ExternalPotential(GridFunction::constant(grid, 0.0));
}

ExternalPotential ExternalPotential::plus_constant(double c) const {
  return ExternalPotential(regular_, deltas_, constant_ + c);
}

ExternalPotential ExternalPotential::plus_regular(const GridFunction& f) const {
  return ExternalPotential(regular_ + f, deltas_, constant_);
}

ExternalPotential ExternalPotential::operator+(const ExternalPotential& o) const {
  std::vector<DeltaTerm> d = deltas_;
  d.insert(d.end(), o.deltas_.begin(), o.deltas_.end());
  return ExternalPotential(regular_ + o.regular_, std::move(d), constant_ + o.constant_);
}

ExternalPotential ExternalPotential::operator*(double a) const {
  std::vector<DeltaTerm> d = deltas_;
  for (auto& t : d) t.weight *= a;
  return ExternalPotential(regular_ * a, std::move(d), constant_ * a);
}

// ---------------------------------------------------------------------------
// Interaction

Interaction Interaction::zero() { return Interaction(); }

Interaction Interaction::convolution(Eigen::VectorXd samples) {
  const auto m = samples.size();
  if (m < 3 || m % 2 == 0) throw ValidationError("convolution kernel needs an odd number (>= 3) of samples");
  const double scale = std::max(1.0, samples.cwiseAbs().maxCoeff());
  for (Eigen::Index k = 0; k < m / 2; ++k) {
    if (std::abs(samples[k] - samples[m - 1 - k]) > 1e-12 * scale) {
      throw ValidationError("convolution kernel must be even: w(s) = w(-s)");
    }
  }
  Interaction w;
  w.kind_ = Kind::Convolution;
  w.samples_ = std::move(samples);
  return w;
}

Interaction Interaction::general(const Grid& grid, Eigen::MatrixXd values) {
  if (values.rows() != grid.n_nodes() || values.cols() != grid.n_nodes()) {
    throw ValidationError("general kernel must be sampled on the full tensor grid");
  }
  const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  if ((values - values.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ValidationError("general kernel must be symmetric: w(x,y) = w(y,x)");
  }
  Interaction w;
  w.kind_ = Kind::General;
  w.values_ = std::move(values);
  w.kernel_grid_ = grid;
  return w;
}

double Interaction::convolution_at(double s) const {
  const auto m = samples_.size();
  const double pos = (std::clamp(s, -1.0, 1.0) + 1.0) * 0.5 * static_cast<double>(m - 1);
  const double r = std::round(pos);
  if (std::abs(pos - r) < 1e-9) return samples_[static_cast<Eigen::Index>(r)];
  const auto k = std::min<Eigen::Index>(static_cast<Eigen::Index>(std::floor(pos)), m - 2);
  const double t = pos - static_cast<double>(k);
  return (1.0 - t) * samples_[k] + t * samples_[k + 1];
}

double Interaction::operator()(double x, double y) const {
  switch (kind_) {
    case Kind::Zero: return 0.0;
    case Kind::Convolution: return convolution_at(x - y);
    case Kind::General: {
      auto [cx, tx] = kernel_grid_.locate(x);
      auto [cy, ty] = kernel_grid_.locate(y);
      const int cx1 = std::min(cx + 1, kernel_grid_.n_cells());
      const int cy1 = std::min(cy + 1, kernel_grid_.n_cells());
      return (1 - tx) * (1 - ty) * values_(cx, cy) + tx * (1 - ty) * values_(cx1, cy) +
             (1 - tx) * ty * values_(cx, cy1) + tx * ty * values_(cx1, cy1);
    }
  }
  return 0.0;
}

Eigen::MatrixXd Interaction::kernel_matrix(const Grid& grid) const {
  const int n = grid.n_nodes();
  if (kind_ == Kind::Zero) return Eigen::MatrixXd::Zero(n, n);
  if (kind_ == Kind::General && kernel_grid_ == grid) return values_;
  Eigen::MatrixXd m(n, n);
  if (kind_ == Kind::Convolution) {
    // w(x_i - x_j) only depends on i - j.
    Eigen::VectorXd diag(2 * n - 1);
    for (int d = -(n - 1); d <= n - 1; ++d) diag[d + n - 1] = convolution_at(d * grid.h());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = diag[i - j + n - 1];
    return m;
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = (*this)(grid.node(i), grid.node(j));
  return m;
}

// ---------------------------------------------------------------------------
// Quadrature and norms

double integrate(const GridFunction& f) { return f.grid().weights().dot(f.values()); }

std::complex<double> integrate(const ComplexGridFunction& f) {
  return (f.grid().weights().cast<std::complex<double>>().array() * f.values().array()).sum();
}

double l2_norm(const GridFunction& f) {
  return std::sqrt(f.grid().weights().dot(f.values().cwiseAbs2()));
}

double mean(const GridFunction& f) { return integrate(f); }

GridFunction zero_mean(const GridFunction& f) {
  return GridFunction(f.grid(), f.values().array() - mean(f));
}

namespace {

template <class Vec>
double derivative_energy(const Vec& v, double h) {
  double s = 0.0;
  for (Eigen::Index i = 0; i + 1 < v.size(); ++i) s += std::norm(v[i + 1] - v[i]);
  return s / h;
}

}  // namespace

double dirichlet_energy(const GridFunction& f) { return derivative_energy(f.values(), f.grid().h()); }

double dirichlet_energy(const ComplexGridFunction& f) {
  return derivative_energy(f.values(), f.grid().h());
}

double h1_norm_sq(const GridFunction& f) {
  return f.grid().weights().dot(f.values().cwiseAbs2()) + dirichlet_energy(f);
}

double h1_norm_sq(const ComplexGridFunction& f) {
  return f.grid().weights().dot(f.values().cwiseAbs2()) + dirichlet_energy(f);
}

GridFunction cumulative_F(const Density& rho) {
  const Grid& g = rho.grid();
  const auto& r = rho.rho().values();
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    if (r[i] < 0.0) throw ValidationError("cumulative_F: density has a negative node");
  }
  Eigen::VectorXd F(g.n_nodes());
  F[0] = 0.0;
  const double scale = 0.5 * g.h() / rho.particle_count();
  for (int i = 0; i < g.n_cells(); ++i) F[i + 1] = F[i] + scale * (r[i] + r[i + 1]);
  // Normalize away the (<= 1e-10) integral tolerance of Density.
  F /= F[g.n_cells()];
  F[g.n_cells()] = 1.0;
  return GridFunction(g, std::move(F));
}

namespace {

template <class Scalar>
Scalar pair_external_impl(const ExternalPotential& v, const BasicGridFunction<Scalar>& f) {
  if (!(v.grid() == f.grid())) throw ValidationError("potential and function on different grids");
  const Eigen::VectorXd w = f.grid().weights();
  Scalar total = (w.array() * v.regular().values().array()).template cast<Scalar>().matrix().dot(f.values());
  for (const auto& d : v.deltas()) total += d.weight * f(d.position);
  if (v.constant() != 0.0) total += v.constant() * w.template cast<Scalar>().dot(f.values());
  return total;
}

}  // namespace

double pair_external(const ExternalPotential& v, const GridFunction& f) {
  return pair_external_impl(v, f);
}

std::complex<double> pair_external(const ExternalPotential& v, const ComplexGridFunction& f) {
  return pair_external_impl(v, f);
}

double pair_interaction(const Interaction& w, const PairFunction& g) {
  if (w.is_zero()) return 0.0;
  const Eigen::VectorXd wt = g.grid.weights();
  const Eigen::MatrixXd k = w.kernel_matrix(g.grid);
  return wt.dot((k.array() * g.values.array()).matrix() * wt);
}

}  // namespace fermi1d
