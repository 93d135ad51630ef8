#include "cipflow/operators.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/SparseCholesky>

#include "cipflow/errors.hpp"

namespace cipflow {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

SparseMatrix from_triplets(int rows, int cols, const Triplets& t) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

}  // namespace

double PhysParams::reynolds() const {
  if (mu <= 0.0) return std::numeric_limits<double>::infinity();
  return h * beta_inf / mu;
}

double PhysParams::xi() const {
  const double re = reynolds();
  return re <= 1.0 ? 1.0 : 1.0 / re;
}

void PhysParams::validate() const {
  if (!(mu >= 0.0)) throw SetupError("viscosity must be nonnegative");
  if (!(gamma_u >= 0.0) || !(gamma_p >= 0.0)) throw SetupError("stabilization parameters must be nonnegative");
  if (!(gamma > 0.0)) throw SetupError("Nitsche penalty must be positive");
  if (!(eps_perp > 0.0)) throw SetupError("crosswind parameter must be positive");
  if (!(beta_inf > 0.0)) throw SetupError("reference convection speed must be positive");
  if (!(h > 0.0)) throw SetupError("mesh parameter must be positive");
}

PhysParams default_params(int degree) {
  PhysParams p;
  p.gamma = 10.0 * degree * degree;
  return p;
}

SparseMatrix assemble_mass(const FeSpace& space) {
  const int nloc = space.local_size();
  Triplets t;
  t.reserve(idx(space.mesh().num_triangles() * nloc * nloc * space.components()));
  for (int cell = 0; cell < space.mesh().num_triangles(); ++cell) {
    const double det = std::abs(space.cell_map(cell).det);
    const auto dofs = space.cell_dofs(cell);
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(nloc, nloc);
    for (std::size_t q = 0; q < space.elem_quadrature().size(); ++q) {
      const double w = space.elem_quadrature()[q].weight * det;
      const auto& phi = space.elem_values(static_cast<int>(q));
      for (int i = 0; i < nloc; ++i)
        for (int j = 0; j < nloc; ++j) local(i, j) += w * phi[idx(i)] * phi[idx(j)];
    }
    for (int c = 0; c < space.components(); ++c)
      for (int i = 0; i < nloc; ++i)
        for (int j = 0; j < nloc; ++j)
          t.emplace_back(space.dof(dofs[idx(i)], c), space.dof(dofs[idx(j)], c), local(i, j));
  }
  return from_triplets(space.size(), space.size(), t);
}

SparseMatrix assemble_stiffness(const FeSpace& space) {
  const int nloc = space.local_size();
  Triplets t;
  for (int cell = 0; cell < space.mesh().num_triangles(); ++cell) {
    const double det = std::abs(space.cell_map(cell).det);
    const auto dofs = space.cell_dofs(cell);
    for (std::size_t q = 0; q < space.elem_quadrature().size(); ++q) {
      const double w = space.elem_quadrature()[q].weight * det;
      const auto g = space.physical_gradients(cell, space.elem_ref_gradients(static_cast<int>(q)));
      for (int c = 0; c < space.components(); ++c)
        for (int i = 0; i < nloc; ++i)
          for (int j = 0; j < nloc; ++j)
            t.emplace_back(space.dof(dofs[idx(i)], c), space.dof(dofs[idx(j)], c), w * g[idx(i)].dot(g[idx(j)]));
    }
  }
  return from_triplets(space.size(), space.size(), t);
}

SparseMatrix assemble_viscous_nitsche(const FeSpace& vspace, const PhysParams& params, const BoundaryLayout& layout) {
  if (params.mu == 0.0) return SparseMatrix(vspace.size(), vspace.size());
  SparseMatrix a = assemble_stiffness(vspace) * params.mu;
  const int nloc = vspace.local_size();
  const double penalty = params.gamma * params.mu / params.h;
  Triplets t;
  const auto& faces = vspace.mesh().boundary_faces();
  for (std::size_t f = 0; f < faces.size(); ++f) {
    if (!layout.is_dirichlet(faces[f].side)) continue;
    const Vec2& n = faces[f].normal;
    const auto dofs = vspace.cell_dofs(faces[f].triangle);
    for (const auto& p : vspace.boundary_face_points(static_cast<int>(f))) {
      for (int i = 0; i < nloc; ++i) {
        const double dni = p.grads[idx(i)].dot(n);
        for (int j = 0; j < nloc; ++j) {
          const double dnj = p.grads[idx(j)].dot(n);
          const double v = p.weight * (-params.mu * dnj * p.values[idx(i)] - params.mu * dni * p.values[idx(j)] +
                                       penalty * p.values[idx(i)] * p.values[idx(j)]);
          for (int c = 0; c < vspace.components(); ++c)
            t.emplace_back(vspace.dof(dofs[idx(i)], c), vspace.dof(dofs[idx(j)], c), v);
        }
      }
    }
  }
  a += from_triplets(vspace.size(), vspace.size(), t);
  a.makeCompressed();
  return a;
}

SparseMatrix assemble_gradient(const FeSpace& vspace, const FeSpace& pspace) {
  if (&vspace.mesh() != &pspace.mesh()) throw SetupError("velocity and pressure spaces live on different meshes");
  if (vspace.components() != 2 || pspace.components() != 1) {
    throw SetupError("gradient coupling needs a vector velocity space and a scalar pressure space");
  }
  const int nv = vspace.local_size();
  const int np = pspace.local_size();
  Triplets t;
  const auto& rule = vspace.elem_quadrature();
  for (int cell = 0; cell < vspace.mesh().num_triangles(); ++cell) {
    const double det = std::abs(vspace.cell_map(cell).det);
    const auto vd = vspace.cell_dofs(cell);
    const auto pd = pspace.cell_dofs(cell);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double w = rule[q].weight * det;
      const auto g = vspace.physical_gradients(cell, vspace.elem_ref_gradients(static_cast<int>(q)));
      const auto psi = pspace.basis().values(rule[q].point);
      for (int i = 0; i < nv; ++i)
        for (int j = 0; j < np; ++j)
          for (int c = 0; c < 2; ++c)
            t.emplace_back(vspace.dof(vd[idx(i)], c), pd[idx(j)], -w * psi[idx(j)] * g[idx(i)][c]);
    }
  }
  const auto& faces = vspace.mesh().boundary_faces();
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Vec2& n = faces[f].normal;
    const auto vd = vspace.cell_dofs(faces[f].triangle);
    const auto pd = pspace.cell_dofs(faces[f].triangle);
    for (const auto& p : vspace.boundary_face_points(static_cast<int>(f))) {
      const auto psi = pspace.basis().values(p.ref);
      for (int i = 0; i < nv; ++i)
        for (int j = 0; j < np; ++j)
          for (int c = 0; c < 2; ++c)
            t.emplace_back(vspace.dof(vd[idx(i)], c), pd[idx(j)], p.weight * psi[idx(j)] * p.values[idx(i)] * n[c]);
    }
  }
  return from_triplets(vspace.size(), pspace.size(), t);
}

SparseMatrix assemble_pressure_stab(const FeSpace& pspace, const PhysParams& params) {
  if (params.mu <= 0.0) {
    throw SetupError(
        "pressure stabilization needs mu > 0 (its coefficient scales with 1/mu); use the inviscid splitting "
        "scheme for mu = 0");
  }
  const double coef = params.gamma_p * params.xi() * std::pow(params.h, 3) / params.mu;
  const int nloc = pspace.local_size();
  Triplets t;
  const auto& faces = pspace.mesh().interior_faces();
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const auto ld = pspace.cell_dofs(faces[f].left);
    const auto rd = pspace.cell_dofs(faces[f].right);
    for (const auto& p : pspace.interior_face_points(static_cast<int>(f))) {
      const double w = coef * p.weight;
      // Jump contributions: +grad on the left side, -grad on the right side.
      for (int i = 0; i < 2 * nloc; ++i) {
        const bool il = i < nloc;
        const int di = il ? ld[idx(i)] : rd[idx(i - nloc)];
        const Vec2 gi = il ? p.grad_left[idx(i)] : Vec2(-p.grad_right[idx(i - nloc)]);
        for (int j = 0; j < 2 * nloc; ++j) {
          const bool jl = j < nloc;
          const int dj = jl ? ld[idx(j)] : rd[idx(j - nloc)];
          const Vec2 gj = jl ? p.grad_left[idx(j)] : Vec2(-p.grad_right[idx(j - nloc)]);
          t.emplace_back(di, dj, w * gi.dot(gj));
        }
      }
    }
  }
  return from_triplets(pspace.size(), pspace.size(), t);
}

Vector assemble_mean_row(const FeSpace& pspace) {
  return assemble_load(pspace, ScalarFunction([](const Vec2&) { return 1.0; }));
}

Vector assemble_load(const FeSpace& space, const VectorFunction& f) {
  if (space.components() != 2) throw SetupError("vector load on a scalar space");
  Vector b = Vector::Zero(space.size());
  const auto& rule = space.elem_quadrature();
  for (int cell = 0; cell < space.mesh().num_triangles(); ++cell) {
    const auto& cm = space.cell_map(cell);
    const double det = std::abs(cm.det);
    const auto dofs = space.cell_dofs(cell);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vec2 fx = f(cm.to_physical(rule[q].point));
      const double w = rule[q].weight * det;
      const auto& phi = space.elem_values(static_cast<int>(q));
      for (int i = 0; i < space.local_size(); ++i)
        for (int c = 0; c < 2; ++c) b[space.dof(dofs[idx(i)], c)] += w * fx[c] * phi[idx(i)];
    }
  }
  return b;
}

Vector assemble_load(const FeSpace& space, const ScalarFunction& f) {
  if (space.components() != 1) throw SetupError("scalar load on a vector space");
  Vector b = Vector::Zero(space.size());
  const auto& rule = space.elem_quadrature();
  for (int cell = 0; cell < space.mesh().num_triangles(); ++cell) {
    const auto& cm = space.cell_map(cell);
    const double det = std::abs(cm.det);
    const auto dofs = space.cell_dofs(cell);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double fx = f(cm.to_physical(rule[q].point));
      const double w = rule[q].weight * det;
      const auto& phi = space.elem_values(static_cast<int>(q));
      for (int i = 0; i < space.local_size(); ++i) b[dofs[idx(i)]] += w * fx * phi[idx(i)];
    }
  }
  return b;
}

Vector nitsche_data(const FeSpace& vspace, const PhysParams& params, const BoundaryLayout& layout,
                    const VectorFunction& g) {
  Vector b = Vector::Zero(vspace.size());
  if (params.mu == 0.0) return b;
  const double penalty = params.gamma * params.mu / params.h;
  const auto& faces = vspace.mesh().boundary_faces();
  for (std::size_t f = 0; f < faces.size(); ++f) {
    if (!layout.is_dirichlet(faces[f].side)) continue;
    const Vec2& n = faces[f].normal;
    const auto dofs = vspace.cell_dofs(faces[f].triangle);
    for (const auto& p : vspace.boundary_face_points(static_cast<int>(f))) {
      const Vec2 gx = g(p.x);
      for (int i = 0; i < vspace.local_size(); ++i) {
        const double v = p.weight * (-params.mu * p.grads[idx(i)].dot(n) + penalty * p.values[idx(i)]);
        for (int c = 0; c < 2; ++c) b[vspace.dof(dofs[idx(i)], c)] += v * gx[c];
      }
    }
  }
  return b;
}

Vector boundary_flux_data(const FeSpace& pspace, const BoundaryLayout& layout, const VectorFunction& g) {
  Vector b = Vector::Zero(pspace.size());
  const auto& faces = pspace.mesh().boundary_faces();
  for (std::size_t f = 0; f < faces.size(); ++f) {
    if (!layout.is_dirichlet(faces[f].side)) continue;
    const auto dofs = pspace.cell_dofs(faces[f].triangle);
    for (const auto& p : pspace.boundary_face_points(static_cast<int>(f))) {
      const double gn = g(p.x).dot(faces[f].normal);
      for (int i = 0; i < pspace.local_size(); ++i) b[dofs[idx(i)]] -= p.weight * gn * p.values[idx(i)];
    }
  }
  return b;
}

namespace {

template <typename Fn>
Vector project(const FeSpace& space, const Fn& f) {
  Eigen::SimplicialLLT<SparseMatrix> llt(assemble_mass(space));
  if (llt.info() != Eigen::Success) throw SolverError("mass matrix factorization failed");
  return llt.solve(assemble_load(space, f));
}

}  // namespace

Vector l2_project(const FeSpace& space, const VectorFunction& f) { return project(space, f); }
Vector l2_project(const FeSpace& space, const ScalarFunction& f) { return project(space, f); }

Vector interpolate(const FeSpace& space, const VectorFunction& f) {
  if (space.components() != 2) throw SetupError("vector interpolation on a scalar space");
  Vector u(space.size());
  for (int s = 0; s < space.scalar_size(); ++s) {
    const Vec2 v = f(space.dof_coords()[idx(s)]);
    u[space.dof(s, 0)] = v.x();
    u[space.dof(s, 1)] = v.y();
  }
  return u;
}

Vector interpolate(const FeSpace& space, const ScalarFunction& f) {
  if (space.components() != 1) throw SetupError("scalar interpolation on a vector space");
  Vector u(space.size());
  for (int s = 0; s < space.scalar_size(); ++s) u[s] = f(space.dof_coords()[idx(s)]);
  return u;
}

DiscreteOperators assemble_operators(const FeSpace& vspace, const FeSpace& pspace, const PhysParams& params,
                                     const BoundaryLayout& layout, bool with_pressure_stab) {
  params.validate();
  DiscreteOperators ops;
  ops.M = assemble_mass(vspace);
  ops.A = assemble_viscous_nitsche(vspace, params, layout);
  ops.G = assemble_gradient(vspace, pspace);
  ops.Sp = with_pressure_stab ? assemble_pressure_stab(pspace, params) : SparseMatrix(pspace.size(), pspace.size());
  ops.mean_row = assemble_mean_row(pspace);
  return ops;
}

void write_matrix(std::ostream& out, const SparseMatrix& m) {
  out << std::setprecision(17);
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

}  // namespace cipflow
