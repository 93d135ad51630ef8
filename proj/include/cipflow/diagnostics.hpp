#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include "cipflow/convection.hpp"
#include "cipflow/timestepping.hpp"

namespace cipflow {

using GradientFunction = std::function<Eigen::Matrix2d(const Vec2&)>;

/// ||u - u_h|| over the domain with an element rule of degree 2k+4.
double l2_error(const FeSpace& space, const Vector& coeffs, const VectorFunction& exact);
/// Scalar version; with `modulo_constants` both means are removed first.
double l2_error(const FeSpace& space, const Vector& coeffs, const ScalarFunction& exact, bool modulo_constants = false);
/// ||grad(u - u_h)||; row c of `grad_exact` is grad u_c.
double h1_error(const FeSpace& space, const Vector& coeffs, const GradientFunction& grad_exact);

/// slope_i = log(e_i / e_{i+1}) / log(h_i / h_{i+1}). Throws SetupError for
/// fewer than two entries, mismatched lengths or nonpositive values.
std::vector<double> convergence_rates(const std::vector<double>& hs, const std::vector<double>& errors);
/// Least-squares slope of log(error) against log(h); same checks as convergence_rates.
double fitted_rate(const std::vector<double>& hs, const std::vector<double>& errors);

struct DiagnosticsRow {
  double t = 0.0;
  double kinetic_energy = 0.0;          // |u_h|^2 / 2
  double physical_dissipation = 0.0;    // mu |grad u_h|^2
  double artificial_dissipation = 0.0;  // |u_h|_{s_u}^2
  std::optional<double> err_u_l2;
  std::optional<double> err_p_l2;
  std::optional<double> err_u_h1;
};

/// Energy quantities of velocity u at time t; beta enters through the s_u weights.
DiagnosticsRow energy_row(const FeSpace& vspace, const DiscreteOperators& ops, const PhysParams& params,
                          const Convection& beta, const Vector& u, double t);

/// Energy row of a solver state, plus errors when the case has an exact
/// solution. The pressure is compared with p(t - tau/2), up to a constant.
DiagnosticsRow state_row(const FlowSolver& solver, const FlowState& s);

/// Header `t,ke,phys_diss,art_diss` with the three error columns appended when requested.
void write_csv_header(std::ostream& out, bool with_errors);
/// One line at 17 significant digits; error columns written when present.
void write_csv_row(std::ostream& out, const DiagnosticsRow& row);

}  // namespace cipflow
