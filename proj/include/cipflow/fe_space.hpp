#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include "cipflow/mesh.hpp"
#include "cipflow/quadrature.hpp"

namespace cipflow {

inline constexpr int kMaxLocalDofs = 6;

using BasisValues = std::array<double, kMaxLocalDofs>;
using BasisGradients = std::array<Vec2, kMaxLocalDofs>;

/// Lagrange basis of degree 1 or 2 on the reference triangle.
/// Local order: the three vertices, then edge midpoints (0,1), (1,2), (2,0).
class LagrangeBasis {
 public:
  explicit LagrangeBasis(int degree);

  int degree() const { return degree_; }
  int size() const { return degree_ == 1 ? 3 : 6; }

  BasisValues values(const Vec2& ref) const;
  BasisGradients gradients(const Vec2& ref) const;
  /// Reference coordinates of local node i.
  Vec2 node(int i) const;

 private:
  int degree_;
};

/// Affine map from the reference triangle onto a mesh triangle.
struct CellMap {
  Vec2 origin = Vec2::Zero();
  Eigen::Matrix2d jacobian = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d inverse_transpose = Eigen::Matrix2d::Identity();
  double det = 1.0;

  Vec2 to_physical(const Vec2& ref) const { return origin + jacobian * ref; }
  Vec2 to_reference(const Vec2& x) const { return inverse_transpose.transpose() * (x - origin); }
};

/// One quadrature point on an interior face, with the basis gradients of both
/// neighbouring triangles evaluated there.
struct InteriorFacePoint {
  double weight;  // includes the face length
  Vec2 x;         // physical point (left-triangle copy)
  Vec2 ref_left;
  Vec2 ref_right;
  BasisValues values_left;
  BasisGradients grad_left;
  BasisGradients grad_right;
};

struct BoundaryFacePoint {
  double weight;
  Vec2 x;
  Vec2 ref;
  BasisValues values;
  BasisGradients grads;
};

/// Continuous Lagrange space of degree k on a Mesh2D, scalar or 2-vector.
///
/// Vector dofs are blocked by component: dof(s, c) = c * scalar_size() + s.
/// Periodic meshes share the dofs of identified vertices and edges.
class FeSpace {
 public:
  FeSpace(std::shared_ptr<const Mesh2D> mesh, int degree, int components);

  const Mesh2D& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh2D> mesh_ptr() const { return mesh_; }
  int degree() const { return basis_.degree(); }
  int components() const { return components_; }
  int scalar_size() const { return static_cast<int>(dof_coords_.size()); }
  int size() const { return components_ * scalar_size(); }
  int local_size() const { return basis_.size(); }
  int dof(int scalar, int component) const { return component * scalar_size() + scalar; }

  const LagrangeBasis& basis() const { return basis_; }
  std::span<const int> cell_dofs(int cell) const {
    return {cell_dofs_.data() + static_cast<std::ptrdiff_t>(cell) * local_size(),
            static_cast<std::size_t>(local_size())};
  }
  const std::vector<Vec2>& dof_coords() const { return dof_coords_; }
  const CellMap& cell_map(int cell) const { return cell_maps_[static_cast<std::size_t>(cell)]; }

  /// Element rule, exact for degree 2k+2.
  const std::vector<QuadPoint>& elem_quadrature() const { return elem_rule_; }
  /// Face rule on [0,1], exact for degree 2k+1.
  const std::vector<LinePoint>& face_quadrature() const { return face_rule_; }
  /// Basis values/reference gradients at the element quadrature points.
  const BasisValues& elem_values(int q) const { return elem_values_[static_cast<std::size_t>(q)]; }
  const BasisGradients& elem_ref_gradients(int q) const { return elem_ref_grads_[static_cast<std::size_t>(q)]; }

  /// Physical basis gradients in `cell` from reference gradients.
  BasisGradients physical_gradients(int cell, const BasisGradients& ref_grads) const;

  std::span<const InteriorFacePoint> interior_face_points(int face) const;
  std::span<const BoundaryFacePoint> boundary_face_points(int face) const;

  /// Local dof indices lying on the edge (a, b) of `cell`.
  std::vector<int> edge_local_dofs(int cell, int a, int b) const;

  /// Scalar dofs located on boundary faces accepted by the predicate.
  std::vector<int> boundary_scalar_dofs(const std::function<bool(const BoundaryFace&)>& select) const;

  /// Value of a coefficient vector (one component) in `cell` at a reference point.
  double evaluate(std::span<const double> coeffs, int component, int cell, const Vec2& ref) const;
  Vec2 evaluate_vector(std::span<const double> coeffs, int cell, const Vec2& ref) const;
  Eigen::Matrix2d evaluate_gradient(std::span<const double> coeffs, int cell, const Vec2& ref) const;

 private:
  std::shared_ptr<const Mesh2D> mesh_;
  LagrangeBasis basis_;
  int components_;
  std::vector<int> cell_dofs_;
  std::vector<Vec2> dof_coords_;
  std::vector<CellMap> cell_maps_;
  std::vector<QuadPoint> elem_rule_;
  std::vector<LinePoint> face_rule_;
  std::vector<BasisValues> elem_values_;
  std::vector<BasisGradients> elem_ref_grads_;
  std::vector<InteriorFacePoint> interior_points_;
  std::vector<BoundaryFacePoint> boundary_points_;
};

/// Throws SetupError for degree outside {1, 2} or components outside {1, 2}.
FeSpace build_space(std::shared_ptr<const Mesh2D> mesh, int degree, int components);

}  // namespace cipflow
