#include "cipflow/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <string>
#include <utility>

#include "cipflow/errors.hpp"

namespace cipflow {

namespace {

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

// Outward normal of the edge a->b of a counterclockwise triangle.
Vec2 outward_normal(const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  return Vec2(d.y(), -d.x()).normalized();
}

Side classify_side(const Vec2& a, const Vec2& b, const Rectangle& dom) {
  const double tol = 1e-10 * std::max(dom.width(), dom.height());
  auto on = [tol](double v, double ref) { return std::abs(v - ref) <= tol; };
  if (on(a.y(), dom.y_min) && on(b.y(), dom.y_min)) return Side::bottom;
  if (on(a.y(), dom.y_max) && on(b.y(), dom.y_max)) return Side::top;
  if (on(a.x(), dom.x_min) && on(b.x(), dom.x_min)) return Side::left;
  if (on(a.x(), dom.x_max) && on(b.x(), dom.x_max)) return Side::right;
  throw MeshError("boundary edge does not lie on the domain rectangle");
}

}  // namespace

Mesh2D::Mesh2D(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
               Rectangle domain)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)), domain_(domain) {
  if (domain_.width() <= 0.0 || domain_.height() <= 0.0) {
    throw MeshError("domain must have positive side lengths");
  }
  const int nv = num_vertices();
  for (const auto& tri : triangles_) {
    for (int v : tri) {
      if (v < 0 || v >= nv) throw MeshError("triangle references vertex " + std::to_string(v) + " out of range");
    }
  }
  for (int t = 0; t < num_triangles(); ++t) {
    if (triangle_area(t) <= 0.0) {
      throw MeshError("triangle " + std::to_string(t) + " is not counterclockwise");
    }
    for (int i = 0; i < 3; ++i) {
      diameter_ = std::max(diameter_, (triangle_vertex(t, i) - triangle_vertex(t, (i + 1) % 3)).norm());
    }
  }
  mesh_size_ = diameter_;
  vertex_image_.resize(vertices_.size());
  for (int v = 0; v < nv; ++v) vertex_image_[static_cast<std::size_t>(v)] = v;
  enumerate_faces(*this);
}

double Mesh2D::triangle_area(int t) const {
  return signed_area(triangle_vertex(t, 0), triangle_vertex(t, 1), triangle_vertex(t, 2));
}

Mesh2D build_structured_mesh(int nx, int ny, const Rectangle& domain) {
  if (nx < 1 || ny < 1) {
    throw MeshError("cell counts must be positive, got " + std::to_string(nx) + "x" + std::to_string(ny));
  }
  if (domain.width() <= 0.0 || domain.height() <= 0.0) {
    throw MeshError("domain must have positive side lengths");
  }
  const double dx = domain.width() / nx;
  const double dy = domain.height() / ny;
  std::vector<Vec2> vertices;
  vertices.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  for (int j = 0; j <= ny; ++j) {
    // Pin the last row/column to the exact domain bounds.
    const double y = (j == ny) ? domain.y_max : domain.y_min + j * dy;
    for (int i = 0; i <= nx; ++i) {
      const double x = (i == nx) ? domain.x_max : domain.x_min + i * dx;
      vertices.emplace_back(x, y);
    }
  }
  std::vector<std::array<int, 3>> triangles;
  triangles.reserve(static_cast<std::size_t>(2 * nx * ny));
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int v00 = id(i, j), v10 = id(i + 1, j), v01 = id(i, j + 1), v11 = id(i + 1, j + 1);
      triangles.push_back({v00, v10, v11});
      triangles.push_back({v00, v11, v01});
    }
  }
  Mesh2D mesh(std::move(vertices), std::move(triangles), domain);
  mesh.mesh_size_ = std::max(dx, dy);
  return mesh;
}

void enumerate_faces(Mesh2D& mesh) {
  struct Owner {
    int triangle;
    int a;
    int b;
  };
  std::map<std::pair<int, int>, std::vector<Owner>> edges;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles_[static_cast<std::size_t>(t)];
    for (int i = 0; i < 3; ++i) {
      const int a = tri[static_cast<std::size_t>(i)];
      const int b = tri[static_cast<std::size_t>((i + 1) % 3)];
      edges[{std::min(a, b), std::max(a, b)}].push_back({t, a, b});
    }
  }
  mesh.interior_faces_.clear();
  mesh.boundary_faces_.clear();
  for (const auto& [key, owners] : edges) {
    if (owners.size() > 2) {
      throw MeshError("non-conforming connectivity: edge (" + std::to_string(key.first) + ", " +
                      std::to_string(key.second) + ") has " + std::to_string(owners.size()) + " owners");
    }
    const Owner& o = owners.front();
    const Vec2& pa = mesh.vertices_[static_cast<std::size_t>(o.a)];
    const Vec2& pb = mesh.vertices_[static_cast<std::size_t>(o.b)];
    if (owners.size() == 2) {
      InteriorFace f;
      f.vertices = {o.a, o.b};
      f.right_vertices = f.vertices;
      f.left = o.triangle;
      f.right = owners[1].triangle;
      f.normal = outward_normal(pa, pb);
      f.length = (pb - pa).norm();
      mesh.interior_faces_.push_back(f);
    } else {
      BoundaryFace f;
      f.vertices = {o.a, o.b};
      f.triangle = o.triangle;
      f.normal = outward_normal(pa, pb);
      f.length = (pb - pa).norm();
      f.side = classify_side(pa, pb, mesh.domain_);
      mesh.boundary_faces_.push_back(f);
    }
  }
}

Mesh2D make_periodic_x(const Mesh2D& mesh) {
  if (mesh.periodic_x()) return mesh;
  const Rectangle& dom = mesh.domain();
  const double tol = 1e-10 * std::max(dom.width(), dom.height());

  std::vector<int> left_nodes, right_nodes;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const Vec2& p = mesh.vertices()[static_cast<std::size_t>(v)];
    if (std::abs(p.x() - dom.x_min) <= tol) left_nodes.push_back(v);
    if (std::abs(p.x() - dom.x_max) <= tol) right_nodes.push_back(v);
  }
  if (left_nodes.size() != right_nodes.size()) {
    throw MeshError("periodic identification: " + std::to_string(left_nodes.size()) + " nodes on x_min vs " +
                    std::to_string(right_nodes.size()) + " on x_max");
  }
  auto by_y = [&mesh](int a, int b) {
    return mesh.vertices()[static_cast<std::size_t>(a)].y() < mesh.vertices()[static_cast<std::size_t>(b)].y();
  };
  std::sort(left_nodes.begin(), left_nodes.end(), by_y);
  std::sort(right_nodes.begin(), right_nodes.end(), by_y);

  Mesh2D out = mesh;
  // Vertices on x_max map onto their x_min partners.
  std::map<int, int> partner;
  for (std::size_t i = 0; i < left_nodes.size(); ++i) {
    const double yl = mesh.vertices()[static_cast<std::size_t>(left_nodes[i])].y();
    const double yr = mesh.vertices()[static_cast<std::size_t>(right_nodes[i])].y();
    if (std::abs(yl - yr) > tol) {
      throw MeshError("periodic identification: node y-coordinates differ on x_min and x_max");
    }
    out.vertex_image_[static_cast<std::size_t>(right_nodes[i])] = left_nodes[i];
    partner[right_nodes[i]] = left_nodes[i];
  }
  std::vector<BoundaryFace> kept;
  std::vector<BoundaryFace> right_faces;
  std::map<std::pair<int, int>, BoundaryFace> left_faces;
  for (const auto& f : mesh.boundary_faces()) {
    if (f.side == Side::right) {
      right_faces.push_back(f);
    } else if (f.side == Side::left) {
      left_faces[{std::min(f.vertices[0], f.vertices[1]), std::max(f.vertices[0], f.vertices[1])}] = f;
    } else {
      kept.push_back(f);
    }
  }
  if (right_faces.size() != left_faces.size()) {
    throw MeshError("periodic identification: face counts differ on x_min and x_max");
  }
  for (const auto& rf : right_faces) {
    const int a = partner.at(rf.vertices[0]);
    const int b = partner.at(rf.vertices[1]);
    auto it = left_faces.find({std::min(a, b), std::max(a, b)});
    if (it == left_faces.end()) {
      throw MeshError("periodic identification: no matching face on x_min");
    }
    const BoundaryFace& lf = it->second;
    InteriorFace f;
    f.left = rf.triangle;
    f.right = lf.triangle;
    f.vertices = rf.vertices;
    f.right_vertices = {a, b};
    f.normal = rf.normal;
    f.length = rf.length;
    f.periodic = true;
    out.interior_faces_.push_back(f);
    left_faces.erase(it);
  }
  out.boundary_faces_ = std::move(kept);
  out.periodic_x_ = true;
  return out;
}

void write_mesh(std::ostream& out, const Mesh2D& mesh) {
  out << mesh.num_vertices() << ' ' << mesh.num_triangles() << '\n';
  out << std::setprecision(17);
  for (const auto& v : mesh.vertices()) out << v.x() << ' ' << v.y() << '\n';
  for (const auto& t : mesh.triangles()) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

}  // namespace cipflow
