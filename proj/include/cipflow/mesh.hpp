#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

namespace cipflow {

using Vec2 = Eigen::Vector2d;

struct Rectangle {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 1.0;
  double y_max = 1.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  double perimeter() const { return 2.0 * (width() + height()); }
};

/// Side of the bounding rectangle a boundary face lies on.
enum class Side { bottom = 0, right = 1, top = 2, left = 3 };

struct InteriorFace {
  /// Endpoints as seen from the left triangle.
  std::array<int, 2> vertices{};
  /// The same two points as seen from the right triangle. Equal to `vertices`
  /// except across a periodic seam, where they are the translated copies.
  std::array<int, 2> right_vertices{};
  int left = -1;
  int right = -1;
  /// Unit normal pointing from the left triangle into the right one.
  Vec2 normal = Vec2::Zero();
  double length = 0.0;
  bool periodic = false;
};

struct BoundaryFace {
  std::array<int, 2> vertices{};
  int triangle = -1;
  /// Outward unit normal.
  Vec2 normal = Vec2::Zero();
  double length = 0.0;
  Side side = Side::bottom;
};

/// Conforming triangulation of a rectangle with face adjacency.
///
/// Triangles are stored counterclockwise. Interior faces carry both owners and
/// the normal oriented left to right; boundary faces carry the single owner and
/// the outward normal. With periodic identification in x, vertices on the
/// right edge map to their partner on the left edge through `vertex_image`.
class Mesh2D {
 public:
  /// Builds from raw connectivity: validates orientation and enumerates faces.
  Mesh2D(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
         Rectangle domain);

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<InteriorFace>& interior_faces() const { return interior_faces_; }
  const std::vector<BoundaryFace>& boundary_faces() const { return boundary_faces_; }
  const Rectangle& domain() const { return domain_; }

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }

  /// Largest triangle diameter.
  double diameter() const { return diameter_; }
  /// Mesh parameter used for stabilization scalings and time-step selection.
  /// For structured meshes this is the cell side; otherwise the diameter.
  double h() const { return mesh_size_; }

  bool periodic_x() const { return periodic_x_; }
  /// Canonical vertex after periodic identification (identity otherwise).
  int vertex_image(int v) const { return vertex_image_[static_cast<std::size_t>(v)]; }

  double triangle_area(int t) const;
  Vec2 triangle_vertex(int t, int local) const {
    return vertices_[static_cast<std::size_t>(triangles_[static_cast<std::size_t>(t)][static_cast<std::size_t>(local)])];
  }

 private:
  friend Mesh2D build_structured_mesh(int nx, int ny, const Rectangle& domain);
  friend void enumerate_faces(Mesh2D& mesh);
  friend Mesh2D make_periodic_x(const Mesh2D& mesh);

  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<InteriorFace> interior_faces_;
  std::vector<BoundaryFace> boundary_faces_;
  std::vector<int> vertex_image_;
  Rectangle domain_;
  double diameter_ = 0.0;
  double mesh_size_ = 0.0;
  bool periodic_x_ = false;
};

/// nx-by-ny rectangle cells, each split by its bottom-left to top-right diagonal.
Mesh2D build_structured_mesh(int nx, int ny, const Rectangle& domain = {});

/// Rebuilds interior/boundary face lists from the triangle list.
/// Throws MeshError when an edge has more than two owners.
void enumerate_faces(Mesh2D& mesh);

/// Identifies x = x_min with x = x_max. Paired faces become interior faces.
Mesh2D make_periodic_x(const Mesh2D& mesh);

/// A "num_vertices num_triangles" line, then "x y" per vertex and "i j k" per
/// triangle (zero-based).
void write_mesh(std::ostream& out, const Mesh2D& mesh);

}  // namespace cipflow
