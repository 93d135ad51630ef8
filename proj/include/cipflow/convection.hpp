#pragma once

#include <memory>

#include "cipflow/operators.hpp"

namespace cipflow {

/// Convection velocity beta at the current time: either a closed-form field or
/// a discrete velocity (coefficients in a vector FeSpace).
class ConvectionField {
 public:
  static ConvectionField analytic(VectorFunction beta);
  static ConvectionField discrete(const FeSpace& vspace, Vector coeffs);

  bool is_discrete() const { return space_ != nullptr; }
  /// Space of a discrete field, null for a closed-form one.
  const FeSpace* space() const { return space_; }

  /// beta at reference point `ref` of `cell`, physical location `x`.
  Vec2 value(int cell, const Vec2& ref, const Vec2& x) const;
  /// Same, reusing basis values already evaluated at `ref` (degree must match).
  Vec2 value(int cell, const BasisValues& phi, const Vec2& x) const;

 private:
  VectorFunction fn_;
  const FeSpace* space_ = nullptr;
  Vector coeffs_;
};

/// A field plus the measured sup of |beta| used by the stabilization.
struct Convection {
  ConvectionField field;
  double beta_inf;
};

/// Max |beta| over all element and face quadrature points of the space.
double max_speed(const FeSpace& vspace, const ConvectionField& field);

/// Pairs a field with its measured sup norm.
Convection make_convection(const FeSpace& vspace, ConvectionField field);

/// Matrix of C_h: (beta.grad w, v) + s_u(w, v).
SparseMatrix assemble_convection(const FeSpace& vspace, const Convection& conv, const PhysParams& params);

/// C_h w without forming the matrix.
Vector apply_convection(const FeSpace& vspace, const Convection& conv, const PhysParams& params,
                        const Vector& w);

/// Boundary data of the normal penalty: (beta_inf g.n, v.n) on Dirichlet sides.
Vector normal_penalty_data(const FeSpace& vspace, const Convection& conv, const BoundaryLayout& layout,
                           const VectorFunction& g);

/// |u|^2_{s_u} evaluated face by face directly from the coefficients.
double su_seminorm(const FeSpace& vspace, const Vector& u, const Convection& conv, const PhysParams& params);

}  // namespace cipflow
