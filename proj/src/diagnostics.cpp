#include "cipflow/diagnostics.hpp"

#include <cmath>
#include <iomanip>

#include "cipflow/errors.hpp"
#include "cipflow/quadrature.hpp"

namespace cipflow {

namespace {

std::span<const double> view(const Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

/// Calls fn(cell, ref, x, weight) over an element rule of degree 2k+4.
template <typename Fn>
void for_each_error_point(const FeSpace& space, Fn&& fn) {
  const auto rule = triangle_rule(2 * space.degree() + 4);
  for (int cell = 0; cell < space.mesh().num_triangles(); ++cell) {
    const CellMap& map = space.cell_map(cell);
    const double det = std::abs(map.det);
    for (const auto& q : rule) fn(cell, q.point, map.to_physical(q.point), q.weight * det);
  }
}

}  // namespace

double l2_error(const FeSpace& space, const Vector& coeffs, const VectorFunction& exact) {
  if (space.components() != 2 || coeffs.size() != space.size()) throw SetupError("vector error on mismatched data");
  double e2 = 0.0;
  for_each_error_point(space, [&](int cell, const Vec2& ref, const Vec2& x, double w) {
    e2 += w * (exact(x) - space.evaluate_vector(view(coeffs), cell, ref)).squaredNorm();
  });
  return std::sqrt(e2);
}

double l2_error(const FeSpace& space, const Vector& coeffs, const ScalarFunction& exact, bool modulo_constants) {
  if (space.components() != 1 || coeffs.size() != space.size()) throw SetupError("scalar error on mismatched data");
  double shift = 0.0;
  if (modulo_constants) {
    double area = 0.0, diff = 0.0;
    for_each_error_point(space, [&](int cell, const Vec2& ref, const Vec2& x, double w) {
      area += w;
      diff += w * (exact(x) - space.evaluate(view(coeffs), 0, cell, ref));
    });
    shift = diff / area;
  }
  double e2 = 0.0;
  for_each_error_point(space, [&](int cell, const Vec2& ref, const Vec2& x, double w) {
    const double d = exact(x) - space.evaluate(view(coeffs), 0, cell, ref) - shift;
    e2 += w * d * d;
  });
  return std::sqrt(e2);
}

double h1_error(const FeSpace& space, const Vector& coeffs, const GradientFunction& grad_exact) {
  if (coeffs.size() != space.size()) throw SetupError("gradient error on mismatched data");
  double e2 = 0.0;
  const int rows = space.components();
  for_each_error_point(space, [&](int cell, const Vec2& ref, const Vec2& x, double w) {
    const Eigen::Matrix2d d = grad_exact(x) - space.evaluate_gradient(view(coeffs), cell, ref);
    e2 += w * d.topRows(rows).squaredNorm();
  });
  return std::sqrt(e2);
}

namespace {

void check_rate_input(const std::vector<double>& hs, const std::vector<double>& errors) {
  if (hs.size() != errors.size()) throw SetupError("rate fit needs as many errors as mesh sizes");
  if (hs.size() < 2) throw SetupError("rate fit needs at least two levels");
  for (std::size_t i = 0; i < hs.size(); ++i)
    if (!(hs[i] > 0.0) || !(errors[i] > 0.0)) throw SetupError("rate fit needs positive mesh sizes and errors");
}

}  // namespace

std::vector<double> convergence_rates(const std::vector<double>& hs, const std::vector<double>& errors) {
  check_rate_input(hs, errors);
  std::vector<double> rates;
  for (std::size_t i = 0; i + 1 < hs.size(); ++i)
    rates.push_back(std::log(errors[i] / errors[i + 1]) / std::log(hs[i] / hs[i + 1]));
  return rates;
}

double fitted_rate(const std::vector<double>& hs, const std::vector<double>& errors) {
  check_rate_input(hs, errors);
  const auto n = static_cast<double>(hs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    const double x = std::log(hs[i]), y = std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  if (!(std::abs(denom) > 0.0)) throw SetupError("rate fit needs distinct mesh sizes");
  return (n * sxy - sx * sy) / denom;
}

DiagnosticsRow energy_row(const FeSpace& vspace, const DiscreteOperators& ops, const PhysParams& params,
                          const Convection& beta, const Vector& u, double t) {
  DiagnosticsRow row;
  row.t = t;
  row.kinetic_energy = 0.5 * u.dot(ops.M * u);
  double grad2 = 0.0;
  for (int cell = 0; cell < vspace.mesh().num_triangles(); ++cell) {
    const double det = std::abs(vspace.cell_map(cell).det);
    for (const auto& q : vspace.elem_quadrature())
      grad2 += q.weight * det * vspace.evaluate_gradient(view(u), cell, q.point).squaredNorm();
  }
  row.physical_dissipation = params.mu * grad2;
  row.artificial_dissipation = su_seminorm(vspace, u, beta, params);
  return row;
}

DiagnosticsRow state_row(const FlowSolver& solver, const FlowState& s) {
  DiagnosticsRow row = energy_row(solver.vspace(), solver.ops(), solver.params(), solver.convection(s.time, s.u_curr),
                                  s.u_curr, s.time);
  const BenchmarkCase& c = solver.bench();
  if (c.has_exact()) {
    const double t = s.time;
    row.err_u_l2 = l2_error(solver.vspace(), s.u_curr, VectorFunction([&](const Vec2& x) { return c.velocity(t, x); }));
    const double tp = t - 0.5 * solver.tau();
    row.err_p_l2 = l2_error(solver.pspace(), s.p_curr, ScalarFunction([&](const Vec2& x) { return c.pressure(tp, x); }),
                            true);
    row.err_u_h1 =
        h1_error(solver.vspace(), s.u_curr, GradientFunction([&](const Vec2& x) { return c.velocity_gradient(t, x); }));
  }
  return row;
}

void write_csv_header(std::ostream& out, bool with_errors) {
  out << "t,ke,phys_diss,art_diss";
  if (with_errors) out << ",err_u_l2,err_p_l2,err_u_h1";
  out << '\n';
}

void write_csv_row(std::ostream& out, const DiagnosticsRow& row) {
  const auto old = out.precision(17);
  out << row.t << ',' << row.kinetic_energy << ',' << row.physical_dissipation << ',' << row.artificial_dissipation;
  for (const auto& e : {row.err_u_l2, row.err_p_l2, row.err_u_h1})
    if (e) out << ',' << *e;
  out << '\n';
  out.precision(old);
}

}  // namespace cipflow
