#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cipflow/config.hpp"
#include "cipflow/diagnostics.hpp"

namespace cipflow {

/// n-by-n structured mesh of the case domain, periodic in x when the case is.
std::shared_ptr<const Mesh2D> case_mesh(const BenchmarkCase& bench, int n);

/// Solver for `cfg` on the n-by-n mesh.
std::unique_ptr<FlowSolver> make_solver(const RunConfig& cfg, int n);

struct RunReport {
  std::shared_ptr<const FlowSolver> solver;
  int n = 0;
  double h = 0.0;
  double tau = 0.0;
  int steps = 0;
  FlowState final_state;  // last accepted state
  DiagnosticsRow final_row;
  double reference_norm = 0.0;
  double max_velocity_norm = 0.0;
  int rows_written = 0;
  std::optional<std::string> abort_message;  // set after a blow-up
};

using StepHook = std::function<void(const FlowSolver&, const FlowState&)>;

/// Runs `cfg` on level n. When `csv` is given it receives the header and one
/// row at u^1, every `stride` steps and at the last step; a blow-up appends
/// the line `# aborted: <message>` and is reported instead of thrown.
/// `on_step` sees every accepted state.
RunReport run_single(const RunConfig& cfg, int n, std::ostream* csv, const StepHook& on_step = {});

/// Writes the mesh, then the coordinates and values of every velocity and
/// pressure dof of `s`.
void write_state_dump(std::ostream& out, const FlowSolver& solver, const FlowState& s);

struct SweepRow {
  int n = 0;
  double h = 0.0;
  double tau = 0.0;
  int steps = 0;
  double err_u_l2 = 0.0;
  double err_p_l2 = 0.0;
  double err_u_h1 = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  /// Pairwise rates between consecutive levels.
  std::vector<double> rate_u_l2, rate_p_l2, rate_u_h1;
  /// Least-squares rates over all levels.
  double fit_u_l2 = 0.0, fit_p_l2 = 0.0, fit_u_h1 = 0.0;
};

/// Final-time errors on every level and the observed rates. Needs at least
/// two levels and a case with an exact solution (ConfigError otherwise).
/// Failures carry the level in their message; a blow-up stays a BlowUpError.
SweepResult run_convergence_sweep(const RunConfig& cfg, const std::vector<int>& levels,
                                  const std::function<void(const SweepRow&)>& progress = {});

/// Header `n,h,tau,steps,err_u_l2,err_p_l2,err_u_h1`, one row per level, then
/// `# rate,<n_coarse>,<n_fine>,<u_l2>,<p_l2>,<u_h1>` per level pair and a
/// final `# fit,<n_first>,<n_last>,...` line.
void write_sweep_csv(std::ostream& out, const SweepResult& result);

}  // namespace cipflow
