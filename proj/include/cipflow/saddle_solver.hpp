#pragma once

#include <memory>
#include <span>
#include <vector>

#include "cipflow/operators.hpp"

namespace cipflow {

/// Number of sparse LU factorizations performed so far in this process.
long factorization_count();

/// Sparse LU factorization of a fixed square matrix, reused for any number of
/// right-hand sides. Throws SolverError naming the zero pivot when singular.
class FactorizedSystem {
 public:
  explicit FactorizedSystem(SparseMatrix matrix);
  ~FactorizedSystem();
  FactorizedSystem(FactorizedSystem&&) noexcept;
  FactorizedSystem& operator=(FactorizedSystem&&) noexcept;

  int size() const;
  const SparseMatrix& matrix() const;
  Vector solve(const Vector& rhs) const;
  /// ||K x - rhs|| / ||rhs|| (absolute when rhs = 0).
  double relative_residual(const Vector& x, const Vector& rhs) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Copy of `m` whose listed rows are replaced by rows of the identity.
SparseMatrix with_identity_rows(const SparseMatrix& m, std::span<const int> rows);

/// Block saddle-point system
///
///   [ V     G   0 ] [u]   [rhs_u]
///   [ -G^T  Sp  m ] [p] = [rhs_p]
///   [ 0     m^T 0 ] [l]   [  0  ]
///
/// where m integrates the pressure basis, so p has zero mean. Rows of fixed
/// velocity dofs are identity rows and take their prescribed value from rhs_u.
struct SaddleSystem {
  int nu = 0;
  int np = 0;
  double tau = 0.0;
  std::vector<int> fixed_dofs;
  FactorizedSystem factor;
};

SaddleSystem build_saddle_system(const SparseMatrix& velocity_block, const SparseMatrix& G, const SparseMatrix& Sp,
                                 const Vector& mean_row, std::span<const int> fixed_dofs = {});

/// The constant implicit system of the IMEX Crank-Nicolson step, V = M/tau + A/2.
SaddleSystem build_imex_system(const DiscreteOperators& ops, double tau, std::span<const int> fixed_dofs = {});

struct StepSolution {
  Vector u;
  Vector p;
  double multiplier = 0.0;  // of the zero-mean constraint
};

StepSolution solve_step(const SaddleSystem& sys, const Vector& rhs_u, const Vector& rhs_p);

/// Residual of the full block system at (u, p), relative to the right-hand side.
double saddle_residual(const SaddleSystem& sys, const StepSolution& x, const Vector& rhs_u, const Vector& rhs_p);

/// Pressure Poisson system (grad p, grad q) = r(q) with the zero-mean constraint.
class PoissonSystem {
 public:
  explicit PoissonSystem(const FeSpace& pspace);

  int size() const { return static_cast<int>(stiffness_.rows()); }
  const SparseMatrix& stiffness() const { return stiffness_; }
  const Vector& mean_row() const { return mean_; }
  /// Zero-mean solution. A multiplier absorbs any part of rhs not orthogonal
  /// to the constants; for rhs = R(grad q) that part is zero.
  Vector solve(const Vector& rhs, double* multiplier = nullptr) const;
  /// Residual of the bordered system at (p, multiplier), relative to rhs.
  double relative_residual(const Vector& p, double multiplier, const Vector& rhs) const;

 private:
  SparseMatrix stiffness_;
  Vector mean_;
  FactorizedSystem factor_;
};

PoissonSystem build_pressure_poisson(const FeSpace& pspace);

/// M/tau + theta A with identity rows for fixed dofs.
FactorizedSystem build_velocity_system(const DiscreteOperators& ops, double tau, double theta,
                                       std::span<const int> fixed_dofs = {});

}  // namespace cipflow
