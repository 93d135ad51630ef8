#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "cipflow/errors.hpp"
#include "cipflow/mesh.hpp"

using namespace cipflow;

namespace {

// Counts edges shared by two triangles by comparing every pair of triangles.
int brute_force_shared_edges(const Mesh2D& m) {
  int shared = 0;
  for (int a = 0; a < m.num_triangles(); ++a)
    for (int b = a + 1; b < m.num_triangles(); ++b) {
      int common = 0;
      for (int va : m.triangles()[a])
        for (int vb : m.triangles()[b]) common += (va == vb);
      shared += (common == 2);
    }
  return shared;
}

double total_area(const Mesh2D& m) {
  double a = 0.0;
  for (int t = 0; t < m.num_triangles(); ++t) a += m.triangle_area(t);
  return a;
}

}  // namespace

TEST_CASE("1x1 unit square splits into two triangles") {
  const Mesh2D m = build_structured_mesh(1, 1);
  CHECK(m.num_triangles() == 2);
  CHECK(m.interior_faces().size() == 1);
  CHECK(m.boundary_faces().size() == 4);
  CHECK(m.interior_faces()[0].length == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("2x2 mesh covers the unit square") {
  const Mesh2D m = build_structured_mesh(2, 2);
  CHECK(m.num_triangles() == 8);
  CHECK(std::abs(total_area(m) - 1.0) < 1e-12);
}

TEST_CASE("80x80 mesh: diameter is the cell diagonal, h is the cell side") {
  const Mesh2D m = build_structured_mesh(80, 80);
  CHECK(m.diameter() == doctest::Approx(std::sqrt(2.0) / 80).epsilon(1e-12));
  CHECK(m.h() == doctest::Approx(0.0125).epsilon(1e-14));
}

TEST_CASE("interior face count matches brute force and 3n^2 - 2n") {
  for (int n = 1; n <= 4; ++n) {
    const Mesh2D m = build_structured_mesh(n, n);
    const int brute = brute_force_shared_edges(m);
    CHECK(brute == 3 * n * n - 2 * n);
    CHECK(static_cast<int>(m.interior_faces().size()) == brute);
  }
}

TEST_CASE("mesh invariants on a rectangle") {
  const Rectangle dom{-1.0, 0.5, 2.0, 1.75};
  const Mesh2D m = build_structured_mesh(5, 3, dom);
  double perim = 0.0;
  for (const auto& f : m.boundary_faces()) perim += f.length;
  CHECK(std::abs(perim - dom.perimeter()) < 1e-12 * dom.perimeter());
  CHECK(std::abs(total_area(m) - dom.area()) < 1e-12 * dom.area());
  for (int t = 0; t < m.num_triangles(); ++t) CHECK(m.triangle_area(t) > 0.0);

  std::map<int, int> owners;
  for (const auto& f : m.interior_faces()) {
    CHECK(std::abs(f.normal.norm() - 1.0) < 1e-14);
    CHECK(f.left != f.right);
    // Normal points from the left centroid towards the right centroid.
    Vec2 cl = Vec2::Zero(), cr = Vec2::Zero();
    for (int i = 0; i < 3; ++i) {
      cl += m.triangle_vertex(f.left, i) / 3.0;
      cr += m.triangle_vertex(f.right, i) / 3.0;
    }
    CHECK((cr - cl).dot(f.normal) > 0.0);
    ++owners[f.left];
    ++owners[f.right];
  }
  for (const auto& f : m.boundary_faces()) {
    CHECK(std::abs(f.normal.norm() - 1.0) < 1e-14);
    ++owners[f.triangle];
  }
  for (const auto& [t, count] : owners) CHECK(count == 3);
}

TEST_CASE("refining by 2 halves h") {
  const Mesh2D a = build_structured_mesh(6, 6);
  const Mesh2D b = build_structured_mesh(12, 12);
  CHECK(b.h() == doctest::Approx(a.h() / 2).epsilon(1e-15));
  CHECK(b.diameter() == doctest::Approx(a.diameter() / 2).epsilon(1e-14));
}

TEST_CASE("invalid cell counts are rejected") {
  CHECK_THROWS_AS(build_structured_mesh(0, 3), MeshError);
  CHECK_THROWS_AS(build_structured_mesh(2, -1), MeshError);
  CHECK_THROWS_AS(build_structured_mesh(2, 2, Rectangle{0, 0, 0, 1}), MeshError);
}

TEST_CASE("an edge with three owners is rejected") {
  std::vector<Vec2> v = {{0, 0}, {1, 0}, {0.5, 1}, {0.5, -1}, {0.5, 0.5}};
  // Triangles 0 and 2 both contain the edge (0,1) on the same side.
  std::vector<std::array<int, 3>> t = {{0, 1, 2}, {0, 3, 1}, {0, 1, 4}};
  CHECK_THROWS_AS(Mesh2D(v, t, Rectangle{0, -1, 1, 1}), MeshError);
}

TEST_CASE("clockwise triangles are rejected") {
  std::vector<Vec2> v = {{0, 0}, {1, 0}, {0, 1}};
  CHECK_THROWS_AS(Mesh2D(v, {{0, 2, 1}}, Rectangle{0, 0, 1, 1}), MeshError);
}

TEST_CASE("periodic identification in x") {
  SUBCASE("2x2") {
    const Mesh2D m = build_structured_mesh(2, 2);
    const Mesh2D p = make_periodic_x(m);
    CHECK(m.boundary_faces().size() == 8);
    CHECK(p.boundary_faces().size() == 4);
    CHECK(p.interior_faces().size() == m.interior_faces().size() + 2);
    CHECK(p.periodic_x());
    for (const auto& f : p.boundary_faces()) CHECK((f.side == Side::bottom || f.side == Side::top));
    int seams = 0;
    for (const auto& f : p.interior_faces()) {
      if (!f.periodic) continue;
      ++seams;
      // Left copy on x = 1, right copy on x = 0.
      CHECK(p.vertices()[f.vertices[0]].x() == doctest::Approx(1.0));
      CHECK(p.vertices()[f.right_vertices[0]].x() == doctest::Approx(0.0));
      CHECK(p.vertices()[f.vertices[0]].y() == doctest::Approx(p.vertices()[f.right_vertices[0]].y()));
      CHECK(f.normal.x() == doctest::Approx(1.0));
    }
    CHECK(seams == 2);
  }
  SUBCASE("1x1 vertical faces merge") {
    const Mesh2D p = make_periodic_x(build_structured_mesh(1, 1));
    CHECK(p.interior_faces().size() == 2);
    CHECK(p.boundary_faces().size() == 2);
  }
  SUBCASE("non-matching nodes") {
    // Right edge has an extra node at y = 0.5; the left edge does not.
    std::vector<Vec2> v = {{0, 0}, {1, 0}, {1, 0.5}, {1, 1}, {0, 1}};
    std::vector<std::array<int, 3>> t = {{0, 1, 2}, {0, 2, 3}, {0, 3, 4}};
    const Mesh2D m(v, t, Rectangle{0, 0, 1, 1});
    CHECK_THROWS_AS(make_periodic_x(m), MeshError);
  }
  SUBCASE("shifted nodes") {
    std::vector<Vec2> v = {{0, 0}, {1, 0}, {1, 0.6}, {1, 1}, {0, 1}, {0, 0.4}};
    std::vector<std::array<int, 3>> t = {{0, 1, 2}, {0, 2, 5}, {5, 2, 3}, {5, 3, 4}};
    const Mesh2D m(v, t, Rectangle{0, 0, 1, 1});
    CHECK_THROWS_AS(make_periodic_x(m), MeshError);
  }
}

TEST_CASE("mesh dump lists vertices then triangles") {
  std::ostringstream os;
  write_mesh(os, build_structured_mesh(1, 1));
  CHECK(os.str() == "4 2\n0 0\n1 0\n0 1\n1 1\n0 1 3\n0 3 2\n");
}
