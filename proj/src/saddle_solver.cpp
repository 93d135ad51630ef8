#include "cipflow/saddle_solver.hpp"

#include <algorithm>
#include <atomic>
#include <string>

#include <Eigen/SparseLU>
#include <Eigen/UmfPackSupport>

#include "cipflow/errors.hpp"

namespace cipflow {

namespace {

std::atomic<long> g_factorizations{0};

constexpr double kRefineThreshold = 1e-12;

using Triplets = std::vector<Eigen::Triplet<double>>;

void append_block(Triplets& t, const SparseMatrix& m, int row0, int col0, double scale = 1.0) {
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it)
      t.emplace_back(row0 + static_cast<int>(it.row()), col0 + static_cast<int>(it.col()), scale * it.value());
}

}  // namespace

long factorization_count() { return g_factorizations.load(); }

struct FactorizedSystem::Impl {
  SparseMatrix matrix;
  Eigen::UmfPackLU<SparseMatrix> lu;
};

FactorizedSystem::FactorizedSystem(SparseMatrix matrix) : impl_(std::make_unique<Impl>()) {
  if (matrix.rows() != matrix.cols()) throw SolverError("factorization of a non-square matrix");
  impl_->matrix = std::move(matrix);
  impl_->matrix.makeCompressed();
  // UMFPACK's own refinement runs on every solve; solve() refines only when needed.
  impl_->lu.umfpackControl()(UMFPACK_IRSTEP) = 0;
  impl_->lu.compute(impl_->matrix);
  ++g_factorizations;
  if (impl_->lu.info() != Eigen::Success) {
    // UMFPACK does not say where; SparseLU reports the offending column.
    Eigen::SparseLU<SparseMatrix> probe;
    probe.compute(impl_->matrix);
    const std::string where = probe.info() == Eigen::Success ? "no zero pivot under SparseLU either"
                                                             : probe.lastErrorMessage();
    throw SolverError("singular system of size " + std::to_string(impl_->matrix.rows()) + ": " + where);
  }
}

FactorizedSystem::~FactorizedSystem() = default;
FactorizedSystem::FactorizedSystem(FactorizedSystem&&) noexcept = default;
FactorizedSystem& FactorizedSystem::operator=(FactorizedSystem&&) noexcept = default;

int FactorizedSystem::size() const { return static_cast<int>(impl_->matrix.rows()); }

const SparseMatrix& FactorizedSystem::matrix() const { return impl_->matrix; }

Vector FactorizedSystem::solve(const Vector& rhs) const {
  if (rhs.size() != size())
    throw SolverError("rhs of length " + std::to_string(rhs.size()) + " for a system of size " +
                      std::to_string(size()));
  Vector x = impl_->lu.solve(rhs);
  if (impl_->lu.info() != Eigen::Success) throw SolverError("sparse solve failed");
  // One refinement sweep only when the plain solve falls short.
  const Vector r = rhs - impl_->matrix * x;
  if (r.norm() > kRefineThreshold * rhs.norm()) x += impl_->lu.solve(r);
  return x;
}

double FactorizedSystem::relative_residual(const Vector& x, const Vector& rhs) const {
  const double r = (impl_->matrix * x - rhs).norm();
  const double b = rhs.norm();
  return b > 0.0 ? r / b : r;
}

SparseMatrix with_identity_rows(const SparseMatrix& m, std::span<const int> rows) {
  std::vector<char> fixed(static_cast<std::size_t>(m.rows()), 0);
  for (int r : rows) {
    if (r < 0 || r >= m.rows()) throw SetupError("fixed row " + std::to_string(r) + " out of range");
    fixed[static_cast<std::size_t>(r)] = 1;
  }
  Triplets t;
  t.reserve(static_cast<std::size_t>(m.nonZeros()));
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it)
      if (!fixed[static_cast<std::size_t>(it.row())]) t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (int r : rows) t.emplace_back(r, r, 1.0);
  SparseMatrix out(m.rows(), m.cols());
  // Duplicate entries in `rows` would sum; keep the identity exact.
  out.setFromTriplets(t.begin(), t.end(), [](double, double b) { return b; });
  return out;
}

SaddleSystem build_saddle_system(const SparseMatrix& velocity_block, const SparseMatrix& G, const SparseMatrix& Sp,
                                 const Vector& mean_row, std::span<const int> fixed_dofs) {
  const int nu = static_cast<int>(velocity_block.rows());
  const int np = static_cast<int>(mean_row.size());
  if (velocity_block.cols() != nu || G.rows() != nu || G.cols() != np)
    throw SetupError("saddle blocks have inconsistent dimensions");
  if (Sp.size() != 0 && (Sp.rows() != np || Sp.cols() != np)) throw SetupError("pressure stabilization has the wrong size");

  std::vector<char> fixed(static_cast<std::size_t>(nu), 0);
  for (int d : fixed_dofs) {
    if (d < 0 || d >= nu) throw SetupError("fixed dof " + std::to_string(d) + " out of range");
    fixed[static_cast<std::size_t>(d)] = 1;
  }
  Triplets t;
  t.reserve(static_cast<std::size_t>(velocity_block.nonZeros() + 2 * G.nonZeros() + Sp.nonZeros() + 2 * np));
  for (int k = 0; k < velocity_block.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(velocity_block, k); it; ++it)
      if (!fixed[static_cast<std::size_t>(it.row())]) t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (int k = 0; k < G.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(G, k); it; ++it) {
      const int r = static_cast<int>(it.row());
      const int c = static_cast<int>(it.col());
      if (!fixed[static_cast<std::size_t>(r)]) t.emplace_back(r, nu + c, it.value());
      t.emplace_back(nu + c, r, -it.value());
    }
  std::vector<int> unique_fixed;
  for (int d = 0; d < nu; ++d)
    if (fixed[static_cast<std::size_t>(d)]) {
      t.emplace_back(d, d, 1.0);
      unique_fixed.push_back(d);
    }
  if (Sp.size() != 0) append_block(t, Sp, nu, nu);
  for (int i = 0; i < np; ++i) {
    t.emplace_back(nu + i, nu + np, mean_row[i]);
    t.emplace_back(nu + np, nu + i, mean_row[i]);
  }
  SparseMatrix k(nu + np + 1, nu + np + 1);
  k.setFromTriplets(t.begin(), t.end());
  return SaddleSystem{nu, np, 0.0, std::move(unique_fixed), FactorizedSystem(std::move(k))};
}

SaddleSystem build_imex_system(const DiscreteOperators& ops, double tau, std::span<const int> fixed_dofs) {
  if (!(tau > 0.0)) throw SetupError("time step must be positive");
  const SparseMatrix v = ops.M / tau + 0.5 * ops.A;
  SaddleSystem sys = build_saddle_system(v, ops.G, ops.Sp, ops.mean_row, fixed_dofs);
  sys.tau = tau;
  return sys;
}

StepSolution solve_step(const SaddleSystem& sys, const Vector& rhs_u, const Vector& rhs_p) {
  if (rhs_u.size() != sys.nu || rhs_p.size() != sys.np)
    throw SolverError("step rhs has dimensions (" + std::to_string(rhs_u.size()) + ", " +
                      std::to_string(rhs_p.size()) + "), expected (" + std::to_string(sys.nu) + ", " +
                      std::to_string(sys.np) + ")");
  Vector b(sys.nu + sys.np + 1);
  b << rhs_u, rhs_p, 0.0;
  const Vector x = sys.factor.solve(b);
  return {x.head(sys.nu), x.segment(sys.nu, sys.np), x[sys.nu + sys.np]};
}

double saddle_residual(const SaddleSystem& sys, const StepSolution& x, const Vector& rhs_u, const Vector& rhs_p) {
  Vector b(sys.nu + sys.np + 1);
  b << rhs_u, rhs_p, 0.0;
  Vector z(sys.nu + sys.np + 1);
  z << x.u, x.p, x.multiplier;
  return sys.factor.relative_residual(z, b);
}

PoissonSystem::PoissonSystem(const FeSpace& pspace)
    : stiffness_(assemble_stiffness(pspace)), mean_(assemble_mean_row(pspace)), factor_([&] {
        if (pspace.components() != 1) throw SetupError("pressure Poisson system needs a scalar space");
        const int n = static_cast<int>(stiffness_.rows());
        Triplets t;
        append_block(t, stiffness_, 0, 0);
        for (int i = 0; i < n; ++i) {
          t.emplace_back(i, n, mean_[i]);
          t.emplace_back(n, i, mean_[i]);
        }
        SparseMatrix k(n + 1, n + 1);
        k.setFromTriplets(t.begin(), t.end());
        return FactorizedSystem(std::move(k));
      }()) {}

Vector PoissonSystem::solve(const Vector& rhs, double* multiplier) const {
  if (rhs.size() != size()) throw SolverError("Poisson rhs has the wrong length");
  Vector b(size() + 1);
  b << rhs, 0.0;
  const Vector x = factor_.solve(b);
  if (multiplier) *multiplier = x[size()];
  return x.head(size());
}

double PoissonSystem::relative_residual(const Vector& p, double multiplier, const Vector& rhs) const {
  Vector b(size() + 1), z(size() + 1);
  b << rhs, 0.0;
  z << p, multiplier;
  return factor_.relative_residual(z, b);
}

PoissonSystem build_pressure_poisson(const FeSpace& pspace) { return PoissonSystem(pspace); }

FactorizedSystem build_velocity_system(const DiscreteOperators& ops, double tau, double theta,
                                       std::span<const int> fixed_dofs) {
  if (!(tau > 0.0)) throw SetupError("time step must be positive");
  return FactorizedSystem(with_identity_rows(ops.M / tau + theta * ops.A, fixed_dofs));
}

}  // namespace cipflow
