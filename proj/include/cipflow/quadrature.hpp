#pragma once

#include <vector>

#include "cipflow/mesh.hpp"

namespace cipflow {

struct QuadPoint {
  Vec2 point;
  double weight;
};

struct LinePoint {
  double s;
  double weight;
};

/// n-point Gauss-Legendre rule on [0, 1].
std::vector<LinePoint> gauss_legendre(int n);

/// Rule on [0, 1] exact for polynomials of the given degree.
std::vector<LinePoint> segment_rule(int degree);

/// Rule on the reference triangle (0,0), (1,0), (0,1) exact for total degree
/// `degree`. Collapsed tensor-product Gauss points; weights sum to 1/2.
std::vector<QuadPoint> triangle_rule(int degree);

}  // namespace cipflow
