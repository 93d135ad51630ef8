#include "cipflow/fe_space.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <utility>

#include "cipflow/errors.hpp"

namespace cipflow {

namespace {

const std::array<Vec2, 3> kBaryGrad = {Vec2(-1.0, -1.0), Vec2(1.0, 0.0), Vec2(0.0, 1.0)};
constexpr std::array<std::array<int, 2>, 3> kEdges = {{{0, 1}, {1, 2}, {2, 0}}};

std::array<double, 3> barycentric(const Vec2& ref) {
  return {1.0 - ref.x() - ref.y(), ref.x(), ref.y()};
}

}  // namespace

LagrangeBasis::LagrangeBasis(int degree) : degree_(degree) {
  if (degree != 1 && degree != 2) {
    throw SetupError("unsupported polynomial degree " + std::to_string(degree) + " (expected 1 or 2)");
  }
}

BasisValues LagrangeBasis::values(const Vec2& ref) const {
  const auto l = barycentric(ref);
  BasisValues v{};
  if (degree_ == 1) {
    v[0] = l[0];
    v[1] = l[1];
    v[2] = l[2];
    return v;
  }
  for (int i = 0; i < 3; ++i) v[static_cast<std::size_t>(i)] = l[static_cast<std::size_t>(i)] * (2.0 * l[static_cast<std::size_t>(i)] - 1.0);
  for (int e = 0; e < 3; ++e) {
    const auto [i, j] = kEdges[static_cast<std::size_t>(e)];
    v[static_cast<std::size_t>(3 + e)] = 4.0 * l[static_cast<std::size_t>(i)] * l[static_cast<std::size_t>(j)];
  }
  return v;
}

BasisGradients LagrangeBasis::gradients(const Vec2& ref) const {
  BasisGradients g;
  g.fill(Vec2::Zero());
  if (degree_ == 1) {
    for (std::size_t i = 0; i < 3; ++i) g[i] = kBaryGrad[i];
    return g;
  }
  const auto l = barycentric(ref);
  for (std::size_t i = 0; i < 3; ++i) g[i] = (4.0 * l[i] - 1.0) * kBaryGrad[i];
  for (std::size_t e = 0; e < 3; ++e) {
    const auto i = static_cast<std::size_t>(kEdges[e][0]);
    const auto j = static_cast<std::size_t>(kEdges[e][1]);
    g[3 + e] = 4.0 * (l[j] * kBaryGrad[i] + l[i] * kBaryGrad[j]);
  }
  return g;
}

Vec2 LagrangeBasis::node(int i) const {
  static const std::array<Vec2, 6> nodes = {Vec2(0.0, 0.0), Vec2(1.0, 0.0), Vec2(0.0, 1.0),
                                            Vec2(0.5, 0.0), Vec2(0.5, 0.5), Vec2(0.0, 0.5)};
  return nodes[static_cast<std::size_t>(i)];
}

FeSpace::FeSpace(std::shared_ptr<const Mesh2D> mesh, int degree, int components)
    : mesh_(std::move(mesh)), basis_(degree), components_(components) {
  if (!mesh_) throw SetupError("finite element space needs a mesh");
  if (components != 1 && components != 2) {
    throw SetupError("unsupported component count " + std::to_string(components));
  }
  const Mesh2D& m = *mesh_;
  const int nt = m.num_triangles();
  const int nloc = basis_.size();

  cell_maps_.resize(static_cast<std::size_t>(nt));
  for (int t = 0; t < nt; ++t) {
    CellMap& cm = cell_maps_[static_cast<std::size_t>(t)];
    cm.origin = m.triangle_vertex(t, 0);
    cm.jacobian.col(0) = m.triangle_vertex(t, 1) - cm.origin;
    cm.jacobian.col(1) = m.triangle_vertex(t, 2) - cm.origin;
    cm.det = cm.jacobian.determinant();
    cm.inverse_transpose = cm.jacobian.inverse().transpose();
  }

  // Vertex dofs first (canonical images only), then one dof per edge.
  std::vector<int> vertex_dof(static_cast<std::size_t>(m.num_vertices()), -1);
  for (int v = 0; v < m.num_vertices(); ++v) {
    const int img = m.vertex_image(v);
    if (vertex_dof[static_cast<std::size_t>(img)] < 0) {
      vertex_dof[static_cast<std::size_t>(img)] = static_cast<int>(dof_coords_.size());
      dof_coords_.push_back(m.vertices()[static_cast<std::size_t>(img)]);
    }
  }
  cell_dofs_.assign(static_cast<std::size_t>(nt * nloc), -1);
  std::map<std::pair<int, int>, int> edge_dof;
  for (int t = 0; t < nt; ++t) {
    const auto& tri = m.triangles()[static_cast<std::size_t>(t)];
    int* dofs = cell_dofs_.data() + static_cast<std::ptrdiff_t>(t) * nloc;
    for (std::size_t i = 0; i < 3; ++i) dofs[i] = vertex_dof[static_cast<std::size_t>(m.vertex_image(tri[i]))];
    if (degree == 2) {
      for (std::size_t e = 0; e < 3; ++e) {
        // Only edges lying on the seam are identified with their image; an
        // edge touching the seam at one end is distinct from any translate.
        int a = tri[static_cast<std::size_t>(kEdges[e][0])];
        int b = tri[static_cast<std::size_t>(kEdges[e][1])];
        if (m.vertex_image(a) != a && m.vertex_image(b) != b) {
          a = m.vertex_image(a);
          b = m.vertex_image(b);
        }
        const auto key = std::make_pair(std::min(a, b), std::max(a, b));
        auto [it, inserted] = edge_dof.try_emplace(key, static_cast<int>(dof_coords_.size()));
        if (inserted) {
          const Vec2 mid = 0.5 * (m.triangle_vertex(t, kEdges[e][0]) + m.triangle_vertex(t, kEdges[e][1]));
          dof_coords_.push_back(mid);
        }
        dofs[3 + e] = it->second;
      }
    }
  }

  elem_rule_ = triangle_rule(2 * degree + 2);
  face_rule_ = segment_rule(2 * degree + 1);
  for (const auto& qp : elem_rule_) {
    elem_values_.push_back(basis_.values(qp.point));
    elem_ref_grads_.push_back(basis_.gradients(qp.point));
  }

  const std::size_t nfq = face_rule_.size();
  interior_points_.reserve(m.interior_faces().size() * nfq);
  for (const auto& f : m.interior_faces()) {
    const Vec2 a = m.vertices()[static_cast<std::size_t>(f.vertices[0])];
    const Vec2 b = m.vertices()[static_cast<std::size_t>(f.vertices[1])];
    const Vec2 ar = m.vertices()[static_cast<std::size_t>(f.right_vertices[0])];
    const Vec2 br = m.vertices()[static_cast<std::size_t>(f.right_vertices[1])];
    for (const auto& lp : face_rule_) {
      InteriorFacePoint p;
      p.weight = lp.weight * f.length;
      p.x = a + lp.s * (b - a);
      p.ref_left = cell_map(f.left).to_reference(p.x);
      p.ref_right = cell_map(f.right).to_reference(ar + lp.s * (br - ar));
      p.values_left = basis_.values(p.ref_left);
      p.grad_left = physical_gradients(f.left, basis_.gradients(p.ref_left));
      p.grad_right = physical_gradients(f.right, basis_.gradients(p.ref_right));
      interior_points_.push_back(p);
    }
  }
  boundary_points_.reserve(m.boundary_faces().size() * nfq);
  for (const auto& f : m.boundary_faces()) {
    const Vec2 a = m.vertices()[static_cast<std::size_t>(f.vertices[0])];
    const Vec2 b = m.vertices()[static_cast<std::size_t>(f.vertices[1])];
    for (const auto& lp : face_rule_) {
      BoundaryFacePoint p;
      p.weight = lp.weight * f.length;
      p.x = a + lp.s * (b - a);
      p.ref = cell_map(f.triangle).to_reference(p.x);
      p.values = basis_.values(p.ref);
      p.grads = physical_gradients(f.triangle, basis_.gradients(p.ref));
      boundary_points_.push_back(p);
    }
  }
}

BasisGradients FeSpace::physical_gradients(int cell, const BasisGradients& ref_grads) const {
  const Eigen::Matrix2d& jit = cell_map(cell).inverse_transpose;
  BasisGradients g;
  g.fill(Vec2::Zero());
  for (int i = 0; i < local_size(); ++i) g[static_cast<std::size_t>(i)] = jit * ref_grads[static_cast<std::size_t>(i)];
  return g;
}

std::span<const InteriorFacePoint> FeSpace::interior_face_points(int face) const {
  const std::size_t n = face_rule_.size();
  return {interior_points_.data() + static_cast<std::size_t>(face) * n, n};
}

std::span<const BoundaryFacePoint> FeSpace::boundary_face_points(int face) const {
  const std::size_t n = face_rule_.size();
  return {boundary_points_.data() + static_cast<std::size_t>(face) * n, n};
}

std::vector<int> FeSpace::edge_local_dofs(int cell, int a, int b) const {
  const auto& tri = mesh_->triangles()[static_cast<std::size_t>(cell)];
  int ia = -1, ib = -1;
  for (int i = 0; i < 3; ++i) {
    if (tri[static_cast<std::size_t>(i)] == a) ia = i;
    if (tri[static_cast<std::size_t>(i)] == b) ib = i;
  }
  if (ia < 0 || ib < 0 || ia == ib) throw SetupError("edge does not belong to cell " + std::to_string(cell));
  std::vector<int> local = {ia, ib};
  if (degree() == 2) {
    for (int e = 0; e < 3; ++e) {
      const auto [i, j] = kEdges[static_cast<std::size_t>(e)];
      if ((i == ia && j == ib) || (i == ib && j == ia)) local.push_back(3 + e);
    }
  }
  return local;
}

std::vector<int> FeSpace::boundary_scalar_dofs(const std::function<bool(const BoundaryFace&)>& select) const {
  std::vector<int> out;
  for (const auto& f : mesh_->boundary_faces()) {
    if (!select(f)) continue;
    const auto dofs = cell_dofs(f.triangle);
    for (int l : edge_local_dofs(f.triangle, f.vertices[0], f.vertices[1])) out.push_back(dofs[static_cast<std::size_t>(l)]);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double FeSpace::evaluate(std::span<const double> coeffs, int component, int cell, const Vec2& ref) const {
  const auto phi = basis_.values(ref);
  const auto dofs = cell_dofs(cell);
  double v = 0.0;
  for (int i = 0; i < local_size(); ++i) {
    v += coeffs[static_cast<std::size_t>(dof(dofs[static_cast<std::size_t>(i)], component))] * phi[static_cast<std::size_t>(i)];
  }
  return v;
}

Vec2 FeSpace::evaluate_vector(std::span<const double> coeffs, int cell, const Vec2& ref) const {
  return {evaluate(coeffs, 0, cell, ref), evaluate(coeffs, 1, cell, ref)};
}

Eigen::Matrix2d FeSpace::evaluate_gradient(std::span<const double> coeffs, int cell, const Vec2& ref) const {
  const auto grads = physical_gradients(cell, basis_.gradients(ref));
  const auto dofs = cell_dofs(cell);
  Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
  for (int c = 0; c < components_; ++c) {
    for (int i = 0; i < local_size(); ++i) {
      g.row(c) += coeffs[static_cast<std::size_t>(dof(dofs[static_cast<std::size_t>(i)], c))] *
                  grads[static_cast<std::size_t>(i)].transpose();
    }
  }
  return g;
}

FeSpace build_space(std::shared_ptr<const Mesh2D> mesh, int degree, int components) {
  return FeSpace(std::move(mesh), degree, components);
}

}  // namespace cipflow
