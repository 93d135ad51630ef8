#include "cipflow/convection.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "cipflow/errors.hpp"

namespace cipflow {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

// Evaluates beta, reusing cached basis values when the field lives on a
// space with the same basis and mesh as the one being assembled.
class BetaEvaluator {
 public:
  BetaEvaluator(const FeSpace& vspace, const ConvectionField& field)
      : field_(field),
        reuse_(field.space() != nullptr && field.space()->degree() == vspace.degree() &&
               &field.space()->mesh() == &vspace.mesh()) {}

  Vec2 operator()(int cell, const BasisValues& phi, const Vec2& ref, const Vec2& x) const {
    return reuse_ ? field_.value(cell, phi, x) : field_.value(cell, ref, x);
  }

 private:
  const ConvectionField& field_;
  bool reuse_;
};

}  // namespace

ConvectionField ConvectionField::analytic(VectorFunction beta) {
  ConvectionField f;
  f.fn_ = std::move(beta);
  return f;
}

ConvectionField ConvectionField::discrete(const FeSpace& vspace, Vector coeffs) {
  if (vspace.components() != 2 || coeffs.size() != vspace.size()) {
    throw SetupError("discrete convection field needs a vector space and matching coefficients");
  }
  ConvectionField f;
  f.space_ = &vspace;
  f.coeffs_ = std::move(coeffs);
  return f;
}

Vec2 ConvectionField::value(int cell, const Vec2& ref, const Vec2& x) const {
  if (space_ == nullptr) return fn_(x);
  return space_->evaluate_vector({coeffs_.data(), idx(static_cast<int>(coeffs_.size()))}, cell, ref);
}

Vec2 ConvectionField::value(int cell, const BasisValues& phi, const Vec2& x) const {
  if (space_ == nullptr) return fn_(x);
  const auto dofs = space_->cell_dofs(cell);
  Vec2 b = Vec2::Zero();
  for (int i = 0; i < space_->local_size(); ++i) {
    const int s = dofs[idx(i)];
    b.x() += coeffs_[space_->dof(s, 0)] * phi[idx(i)];
    b.y() += coeffs_[space_->dof(s, 1)] * phi[idx(i)];
  }
  return b;
}

double max_speed(const FeSpace& vspace, const ConvectionField& field) {
  const BetaEvaluator beta(vspace, field);
  double m = 0.0;
  const auto& rule = vspace.elem_quadrature();
  for (int cell = 0; cell < vspace.mesh().num_triangles(); ++cell) {
    const auto& cm = vspace.cell_map(cell);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      m = std::max(m, beta(cell, vspace.elem_values(static_cast<int>(q)), rule[q].point, cm.to_physical(rule[q].point)).norm());
    }
  }
  const auto& faces = vspace.mesh().interior_faces();
  for (std::size_t f = 0; f < faces.size(); ++f)
    for (const auto& p : vspace.interior_face_points(static_cast<int>(f)))
      m = std::max(m, beta(faces[f].left, p.values_left, p.ref_left, p.x).norm());
  const auto& bfaces = vspace.mesh().boundary_faces();
  for (std::size_t f = 0; f < bfaces.size(); ++f)
    for (const auto& p : vspace.boundary_face_points(static_cast<int>(f)))
      m = std::max(m, beta(bfaces[f].triangle, p.values, p.ref, p.x).norm());
  return m;
}

Convection make_convection(const FeSpace& vspace, ConvectionField field) {
  const double b = max_speed(vspace, field);
  return {std::move(field), b};
}

namespace {

// Walks the three contributions of C_h and hands local blocks to a sink.
// Volume: sink.volume(cell, weight, beta, phi, grads)
// CIP:    sink.jump(face, weight, grad_left, grad_right)        (weight includes all coefficients)
// Normal: sink.normal(face, weight, n, phi)                       (weight includes beta_inf)
template <typename Sink>
void walk_convection(const FeSpace& vspace, const Convection& conv, const PhysParams& params, Sink& sink) {
  const BetaEvaluator beta(vspace, conv.field);
  const auto& rule = vspace.elem_quadrature();
  for (int cell = 0; cell < vspace.mesh().num_triangles(); ++cell) {
    const auto& cm = vspace.cell_map(cell);
    const double det = std::abs(cm.det);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto& phi = vspace.elem_values(static_cast<int>(q));
      const Vec2 b = beta(cell, phi, rule[q].point, cm.to_physical(rule[q].point));
      const auto g = vspace.physical_gradients(cell, vspace.elem_ref_gradients(static_cast<int>(q)));
      sink.volume(cell, rule[q].weight * det, b, phi, g);
    }
  }
  if (params.gamma_u > 0.0) {
    const auto& faces = vspace.mesh().interior_faces();
    for (std::size_t f = 0; f < faces.size(); ++f) {
      const double h2 = faces[f].length * faces[f].length;
      for (const auto& p : vspace.interior_face_points(static_cast<int>(f))) {
        const Vec2 b = beta(faces[f].left, p.values_left, p.ref_left, p.x);
        const double coef =
            params.gamma_u * h2 * (std::abs(b.dot(faces[f].normal)) + conv.beta_inf * params.eps_perp);
        sink.jump(static_cast<int>(f), coef * p.weight, p.grad_left, p.grad_right);
      }
    }
  }
  const auto& bfaces = vspace.mesh().boundary_faces();
  for (std::size_t f = 0; f < bfaces.size(); ++f)
    for (const auto& p : vspace.boundary_face_points(static_cast<int>(f)))
      sink.normal(static_cast<int>(f), conv.beta_inf * p.weight, bfaces[f].normal, p.values);
}

struct MatrixSink {
  const FeSpace& s;
  std::vector<Eigen::Triplet<double>> t;
  int nloc = s.local_size();

  void volume(int cell, double w, const Vec2& b, const BasisValues& phi, const BasisGradients& g) {
    const auto dofs = s.cell_dofs(cell);
    for (int i = 0; i < nloc; ++i)
      for (int j = 0; j < nloc; ++j) {
        const double v = w * b.dot(g[idx(j)]) * phi[idx(i)];
        for (int c = 0; c < 2; ++c) t.emplace_back(s.dof(dofs[idx(i)], c), s.dof(dofs[idx(j)], c), v);
      }
  }
  void jump(int f, double w, const BasisGradients& gl, const BasisGradients& gr) {
    const auto& face = s.mesh().interior_faces()[idx(f)];
    const auto ld = s.cell_dofs(face.left);
    const auto rd = s.cell_dofs(face.right);
    for (int i = 0; i < 2 * nloc; ++i) {
      const int di = i < nloc ? ld[idx(i)] : rd[idx(i - nloc)];
      const Vec2 gi = i < nloc ? gl[idx(i)] : Vec2(-gr[idx(i - nloc)]);
      for (int j = 0; j < 2 * nloc; ++j) {
        const int dj = j < nloc ? ld[idx(j)] : rd[idx(j - nloc)];
        const Vec2 gj = j < nloc ? gl[idx(j)] : Vec2(-gr[idx(j - nloc)]);
        const double v = w * gi.dot(gj);
        for (int c = 0; c < 2; ++c) t.emplace_back(s.dof(di, c), s.dof(dj, c), v);
      }
    }
  }
  void normal(int f, double w, const Vec2& n, const BasisValues& phi) {
    const auto dofs = s.cell_dofs(s.mesh().boundary_faces()[idx(f)].triangle);
    for (int i = 0; i < nloc; ++i)
      for (int j = 0; j < nloc; ++j)
        for (int c = 0; c < 2; ++c)
          for (int d = 0; d < 2; ++d)
            t.emplace_back(s.dof(dofs[idx(i)], c), s.dof(dofs[idx(j)], d), w * phi[idx(i)] * n[c] * phi[idx(j)] * n[d]);
  }
};

struct ApplySink {
  const FeSpace& s;
  const Vector& w;
  Vector out;
  int nloc = s.local_size();

  void volume(int cell, double wt, const Vec2& b, const BasisValues& phi, const BasisGradients& g) {
    const auto dofs = s.cell_dofs(cell);
    for (int c = 0; c < 2; ++c) {
      Vec2 grad = Vec2::Zero();
      for (int j = 0; j < nloc; ++j) grad += w[s.dof(dofs[idx(j)], c)] * g[idx(j)];
      const double adv = wt * b.dot(grad);
      for (int i = 0; i < nloc; ++i) out[s.dof(dofs[idx(i)], c)] += adv * phi[idx(i)];
    }
  }
  void jump(int f, double wt, const BasisGradients& gl, const BasisGradients& gr) {
    const auto& face = s.mesh().interior_faces()[idx(f)];
    const auto ld = s.cell_dofs(face.left);
    const auto rd = s.cell_dofs(face.right);
    for (int c = 0; c < 2; ++c) {
      Vec2 jmp = Vec2::Zero();
      for (int j = 0; j < nloc; ++j) jmp += w[s.dof(ld[idx(j)], c)] * gl[idx(j)] - w[s.dof(rd[idx(j)], c)] * gr[idx(j)];
      jmp *= wt;
      for (int i = 0; i < nloc; ++i) {
        out[s.dof(ld[idx(i)], c)] += jmp.dot(gl[idx(i)]);
        out[s.dof(rd[idx(i)], c)] -= jmp.dot(gr[idx(i)]);
      }
    }
  }
  void normal(int f, double wt, const Vec2& n, const BasisValues& phi) {
    const auto dofs = s.cell_dofs(s.mesh().boundary_faces()[idx(f)].triangle);
    double wn = 0.0;
    for (int j = 0; j < nloc; ++j) wn += (w[s.dof(dofs[idx(j)], 0)] * n.x() + w[s.dof(dofs[idx(j)], 1)] * n.y()) * phi[idx(j)];
    wn *= wt;
    for (int i = 0; i < nloc; ++i)
      for (int c = 0; c < 2; ++c) out[s.dof(dofs[idx(i)], c)] += wn * phi[idx(i)] * n[c];
  }
};

}  // namespace

SparseMatrix assemble_convection(const FeSpace& vspace, const Convection& conv, const PhysParams& params) {
  if (vspace.components() != 2) throw SetupError("convection operator needs a vector space");
  MatrixSink sink{vspace, {}};
  walk_convection(vspace, conv, params, sink);
  SparseMatrix c(vspace.size(), vspace.size());
  c.setFromTriplets(sink.t.begin(), sink.t.end());
  c.makeCompressed();
  return c;
}

Vector apply_convection(const FeSpace& vspace, const Convection& conv, const PhysParams& params, const Vector& w) {
  if (vspace.components() != 2 || w.size() != vspace.size()) throw SetupError("convection: size mismatch");
  ApplySink sink{vspace, w, Vector::Zero(vspace.size())};
  walk_convection(vspace, conv, params, sink);
  return std::move(sink.out);
}

Vector normal_penalty_data(const FeSpace& vspace, const Convection& conv, const BoundaryLayout& layout,
                           const VectorFunction& g) {
  Vector b = Vector::Zero(vspace.size());
  const auto& faces = vspace.mesh().boundary_faces();
  for (std::size_t f = 0; f < faces.size(); ++f) {
    if (!layout.is_dirichlet(faces[f].side)) continue;
    const Vec2& n = faces[f].normal;
    const auto dofs = vspace.cell_dofs(faces[f].triangle);
    for (const auto& p : vspace.boundary_face_points(static_cast<int>(f))) {
      const double gn = conv.beta_inf * p.weight * g(p.x).dot(n);
      for (int i = 0; i < vspace.local_size(); ++i)
        for (int c = 0; c < 2; ++c) b[vspace.dof(dofs[idx(i)], c)] += gn * p.values[idx(i)] * n[c];
    }
  }
  return b;
}

double su_seminorm(const FeSpace& vspace, const Vector& u, const Convection& conv, const PhysParams& params) {
  const Mesh2D& mesh = vspace.mesh();
  const std::span<const double> coeffs(u.data(), idx(static_cast<int>(u.size())));
  const auto& rule = segment_rule(2 * vspace.degree() + 1);
  double total = 0.0;
  for (const auto& f : mesh.interior_faces()) {
    const Vec2 a = mesh.vertices()[idx(f.vertices[0])];
    const Vec2 b = mesh.vertices()[idx(f.vertices[1])];
    const Vec2 ar = mesh.vertices()[idx(f.right_vertices[0])];
    const Vec2 br = mesh.vertices()[idx(f.right_vertices[1])];
    for (const auto& lp : rule) {
      const Vec2 xl = a + lp.s * (b - a);
      const Vec2 xr = ar + lp.s * (br - ar);
      const Vec2 rl = vspace.cell_map(f.left).to_reference(xl);
      const Vec2 rr = vspace.cell_map(f.right).to_reference(xr);
      const Eigen::Matrix2d jump =
          vspace.evaluate_gradient(coeffs, f.left, rl) - vspace.evaluate_gradient(coeffs, f.right, rr);
      const Vec2 beta = conv.field.value(f.left, rl, xl);
      const double weight = std::abs(beta.dot(f.normal)) + conv.beta_inf * params.eps_perp;
      total += params.gamma_u * f.length * f.length * weight * jump.squaredNorm() * lp.weight * f.length;
    }
  }
  for (const auto& f : mesh.boundary_faces()) {
    const Vec2 a = mesh.vertices()[idx(f.vertices[0])];
    const Vec2 b = mesh.vertices()[idx(f.vertices[1])];
    for (const auto& lp : rule) {
      const Vec2 x = a + lp.s * (b - a);
      const Vec2 val = vspace.evaluate_vector(coeffs, f.triangle, vspace.cell_map(f.triangle).to_reference(x));
      const double un = val.dot(f.normal);
      total += conv.beta_inf * un * un * lp.weight * f.length;
    }
  }
  return total;
}

}  // namespace cipflow
