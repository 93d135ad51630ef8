#pragma once

#include <array>
#include <functional>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "cipflow/fe_space.hpp"

namespace cipflow {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

/// Physical and stabilization parameters.
struct PhysParams {
  double mu = 3.571e-6;
  double gamma_u = 0.001;   // CIP velocity stabilization
  double gamma_p = 0.001;   // pressure gradient-jump stabilization
  double gamma = 10.0;      // Nitsche penalty
  double eps_perp = 0.01;   // crosswind floor, relative to beta_inf
  double beta_inf = 1.0;    // reference convection speed (mesh Reynolds number, Courant numbers)
  double h = 0.0;           // mesh parameter

  /// h * beta_inf / mu; infinite for mu = 0.
  double reynolds() const;
  /// min{1, 1/Re}.
  double xi() const;
  /// Throws SetupError when an invariant is violated.
  void validate() const;
};

/// Default parameters for degree k (Nitsche penalty 10 k^2).
PhysParams default_params(int degree);

enum class BoundaryKind { dirichlet, slip };

/// Boundary treatment per side of the rectangle. Slip sides carry no Nitsche
/// viscous terms; the normal velocity is still penalized by the convection
/// stabilization.
struct BoundaryLayout {
  std::array<BoundaryKind, 4> sides{BoundaryKind::dirichlet, BoundaryKind::dirichlet, BoundaryKind::dirichlet,
                                    BoundaryKind::dirichlet};
  bool is_dirichlet(Side s) const { return sides[static_cast<std::size_t>(s)] == BoundaryKind::dirichlet; }
};

using VectorFunction = std::function<Vec2(const Vec2&)>;
using ScalarFunction = std::function<double(const Vec2&)>;

SparseMatrix assemble_mass(const FeSpace& space);

/// Stiffness (grad phi_j, grad phi_i), one block per component.
SparseMatrix assemble_stiffness(const FeSpace& space);

/// a(w, v) with symmetric Nitsche terms and penalty gamma*mu/h on Dirichlet sides.
SparseMatrix assemble_viscous_nitsche(const FeSpace& vspace, const PhysParams& params,
                                      const BoundaryLayout& layout = {});

/// G with (G q, v) = -(q, div v) + (q, v.n) over the non-periodic boundary.
SparseMatrix assemble_gradient(const FeSpace& vspace, const FeSpace& pspace);

/// Gradient-jump pressure stabilization with coefficient gamma_p * xi * h^3 / mu.
/// Throws SetupError for mu = 0.
SparseMatrix assemble_pressure_stab(const FeSpace& pspace, const PhysParams& params);

/// Integrals of the scalar basis functions.
Vector assemble_mean_row(const FeSpace& pspace);

/// Load vector (f, phi_i) for a scalar or vector space.
Vector assemble_load(const FeSpace& space, const VectorFunction& f);
Vector assemble_load(const FeSpace& space, const ScalarFunction& f);

/// Right-hand side of the viscous Nitsche terms for Dirichlet data g:
/// -(mu n.grad v, g) + (gamma mu / h)(g, v) on Dirichlet sides.
Vector nitsche_data(const FeSpace& vspace, const PhysParams& params, const BoundaryLayout& layout,
                    const VectorFunction& g);

/// -(q, g.n) on Dirichlet sides: the data of the mass equation.
Vector boundary_flux_data(const FeSpace& pspace, const BoundaryLayout& layout, const VectorFunction& g);

/// L2 projection onto the space (mass solve with a Cholesky factorization).
Vector l2_project(const FeSpace& space, const VectorFunction& f);
Vector l2_project(const FeSpace& space, const ScalarFunction& f);

/// Nodal interpolation.
Vector interpolate(const FeSpace& space, const VectorFunction& f);
Vector interpolate(const FeSpace& space, const ScalarFunction& f);

/// The time-independent operators of the semi-discrete problem.
struct DiscreteOperators {
  SparseMatrix M;   // vector mass
  SparseMatrix A;   // Nitsche viscous operator
  SparseMatrix G;   // pressure gradient, velocity rows x pressure columns
  SparseMatrix Sp;  // pressure stabilization (empty when not assembled)
  Vector mean_row;

  /// Matrix of the adjoint G*: exactly -G^T.
  SparseMatrix divergence() const { return SparseMatrix(-G.transpose()); }
};

DiscreteOperators assemble_operators(const FeSpace& vspace, const FeSpace& pspace, const PhysParams& params,
                                     const BoundaryLayout& layout, bool with_pressure_stab);

/// Writes "row col value" lines (zero-based) with 17 significant digits.
void write_matrix(std::ostream& out, const SparseMatrix& m);

}  // namespace cipflow
