#include <doctest.h>

#include <memory>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "cipflow/errors.hpp"
#include "cipflow/saddle_solver.hpp"

using namespace cipflow;

namespace {

std::shared_ptr<const Mesh2D> square(int n) { return std::make_shared<const Mesh2D>(build_structured_mesh(n, n)); }

struct Setup {
  std::shared_ptr<const Mesh2D> mesh;
  FeSpace vs;
  FeSpace ps;
  PhysParams params;
  DiscreteOperators ops;
};

Setup make_setup(int n, int k, double mu, bool stab) {
  auto m = square(n);
  FeSpace vs = build_space(m, k, 2);
  FeSpace ps = build_space(m, k, 1);
  PhysParams p = default_params(k);
  p.mu = mu;
  p.h = m->h();
  DiscreteOperators ops = assemble_operators(vs, ps, p, BoundaryLayout{}, stab);
  return {m, std::move(vs), std::move(ps), p, std::move(ops)};
}

Vector random_vector(int n, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

}  // namespace

TEST_CASE("mass/gradient saddle returns a discretely divergence-free field unchanged") {
  Setup s = make_setup(1, 1, 0.0, false);
  const double tau = 0.1;
  const SaddleSystem sys = build_imex_system(s.ops, tau);
  const Eigen::MatrixXd gt = Eigen::MatrixXd(s.ops.G).transpose();
  const Eigen::MatrixXd kernel = Eigen::FullPivLU<Eigen::MatrixXd>(gt).kernel();
  REQUIRE(kernel.cols() > 0);
  const Vector u = kernel.col(0);
  const Vector rhs_u = s.ops.M * u / tau;
  const StepSolution x = solve_step(sys, rhs_u, Vector::Zero(s.ps.size()));
  CHECK((x.u - u).norm() < 1e-12 * u.norm());
  CHECK(x.p.norm() < 1e-12);

  // Brute-force dense solve of the same bordered system.
  const int nu = s.vs.size();
  const int np = s.ps.size();
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(nu + np + 1, nu + np + 1);
  k.topLeftCorner(nu, nu) = Eigen::MatrixXd(s.ops.M) / tau;
  k.block(0, nu, nu, np) = Eigen::MatrixXd(s.ops.G);
  k.block(nu, 0, np, nu) = -gt;
  k.block(nu, nu + np, np, 1) = s.ops.mean_row;
  k.block(nu + np, nu, 1, np) = s.ops.mean_row.transpose();
  std::mt19937 rng(1);
  Vector b = random_vector(nu + np + 1, rng);
  b[nu + np] = 0.0;
  const Vector dense = k.fullPivLu().solve(b);
  const StepSolution y = solve_step(sys, b.head(nu), b.segment(nu, np));
  CHECK((y.u - dense.head(nu)).norm() < 1e-10 * dense.norm());
  CHECK((y.p - dense.segment(nu, np)).norm() < 1e-10 * dense.norm());
}

TEST_CASE("IMEX saddle solves") {
  std::mt19937 rng(42);
  for (int k : {1, 2}) {
    CAPTURE(k);
    Setup s = make_setup(4, k, 3.571e-6, true);
    const long before = factorization_count();
    const SaddleSystem sys = build_imex_system(s.ops, 0.01);
    CHECK(factorization_count() == before + 1);
    const int nu = s.vs.size();
    const int np = s.ps.size();

    SUBCASE("zero rhs gives zero") {
      const StepSolution x = solve_step(sys, Vector::Zero(nu), Vector::Zero(np));
      CHECK(x.u.norm() == 0.0);
      CHECK(x.p.norm() == 0.0);
    }
    SUBCASE("residual, zero mean, linearity, determinism") {
      const Vector a_u = random_vector(nu, rng), a_p = random_vector(np, rng);
      const Vector b_u = random_vector(nu, rng), b_p = random_vector(np, rng);
      const StepSolution xa = solve_step(sys, a_u, a_p);
      const StepSolution xb = solve_step(sys, b_u, b_p);
      CHECK(saddle_residual(sys, xa, a_u, a_p) <= 1e-10);
      CHECK(std::abs(s.ops.mean_row.dot(xa.p)) <= 1e-12);
      const StepSolution xc = solve_step(sys, 2.5 * a_u - 0.5 * b_u, 2.5 * a_p - 0.5 * b_p);
      CHECK((xc.u - (2.5 * xa.u - 0.5 * xb.u)).norm() <= 1e-10 * xc.u.norm());
      CHECK((xc.p - (2.5 * xa.p - 0.5 * xb.p)).norm() <= 1e-10 * xc.p.norm());
      const StepSolution again = solve_step(sys, a_u, a_p);
      CHECK((again.u.array() == xa.u.array()).all());
      CHECK((again.p.array() == xa.p.array()).all());
      // Many solves, still one factorization.
      CHECK(factorization_count() == before + 1);
    }
  }
}

TEST_CASE("fixed velocity dofs take their prescribed values") {
  Setup s = make_setup(3, 2, 0.01, true);
  const auto scalar = s.vs.boundary_scalar_dofs([](const BoundaryFace&) { return true; });
  std::vector<int> fixed;
  for (int d : scalar)
    for (int c = 0; c < 2; ++c) fixed.push_back(s.vs.dof(d, c));
  const SaddleSystem sys = build_imex_system(s.ops, 0.05, fixed);
  std::mt19937 rng(9);
  const Vector rhs_u = random_vector(s.vs.size(), rng);
  const Vector rhs_p = random_vector(s.ps.size(), rng);
  const StepSolution x = solve_step(sys, rhs_u, rhs_p);
  for (int d : fixed) CHECK(x.u[d] == doctest::Approx(rhs_u[d]).epsilon(1e-12));
  CHECK(saddle_residual(sys, x, rhs_u, rhs_p) <= 1e-10);
}

TEST_CASE("saddle solver errors") {
  Setup s = make_setup(2, 1, 0.01, true);
  const SaddleSystem sys = build_imex_system(s.ops, 0.1);
  CHECK_THROWS_AS(solve_step(sys, Vector::Zero(s.vs.size() + 1), Vector::Zero(s.ps.size())), SolverError);
  CHECK_THROWS_AS(build_imex_system(s.ops, 0.0), SetupError);

  SparseMatrix singular(3, 3);
  singular.insert(0, 0) = 1.0;
  singular.insert(1, 1) = 1.0;
  singular.insert(1, 2) = 1.0;
  singular.insert(2, 1) = 1.0;
  singular.insert(2, 2) = 1.0;
  try {
    FactorizedSystem f(singular);
    FAIL("singular matrix factorized");
  } catch (const SolverError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("COLUMN") != std::string::npos);
  }
}

TEST_CASE("pressure Poisson system") {
  for (int k : {1, 2}) {
    CAPTURE(k);
    const auto m = square(4);
    const auto ps = build_space(m, k, 1);
    const PoissonSystem poisson = build_pressure_poisson(ps);
    CHECK(poisson.solve(Vector::Zero(ps.size())).norm() == 0.0);

    // p* = x - 1/2 has zero mean; (grad p*, grad phi_i) = integral of d(phi_i)/dx,
    // evaluated through the divergence theorem on boundary faces.
    Vector rhs = Vector::Zero(ps.size());
    for (std::size_t f = 0; f < m->boundary_faces().size(); ++f) {
      const auto& face = m->boundary_faces()[f];
      const auto dofs = ps.cell_dofs(face.triangle);
      for (const auto& pt : ps.boundary_face_points(static_cast<int>(f)))
        for (int i = 0; i < ps.local_size(); ++i) rhs[dofs[i]] += pt.weight * pt.values[i] * face.normal.x();
    }
    CHECK(std::abs(rhs.sum()) < 1e-14);
    const Vector p = poisson.solve(rhs);
    const Vector expect = interpolate(ps, ScalarFunction([](const Vec2& x) { return x.x() - 0.5; }));
    CHECK((p - expect).lpNorm<Eigen::Infinity>() < 1e-10);
    CHECK(std::abs(poisson.mean_row().dot(p)) < 1e-12);
  }
}

TEST_CASE("velocity system with identity rows") {
  Setup s = make_setup(2, 1, 0.1, false);
  const std::vector<int> fixed = {0, 3};
  const FactorizedSystem v = build_velocity_system(s.ops, 0.1, 0.5, fixed);
  Vector b = Vector::Ones(s.vs.size());
  b[0] = 7.0;
  b[3] = -2.0;
  const Vector x = v.solve(b);
  CHECK(x[0] == doctest::Approx(7.0));
  CHECK(x[3] == doctest::Approx(-2.0));
  CHECK(v.relative_residual(x, b) < 1e-12);
  const SparseMatrix w = with_identity_rows(s.ops.M, fixed);
  CHECK(w.row(0).sum() == 1.0);
  CHECK(w.coeff(3, 3) == 1.0);
}
