#include "cipflow/experiment.hpp"

#include <iomanip>

#include "cipflow/errors.hpp"

namespace cipflow {

std::shared_ptr<const Mesh2D> case_mesh(const BenchmarkCase& bench, int n) {
  Mesh2D mesh = build_structured_mesh(n, n, bench.domain());
  if (bench.periodic_x()) mesh = make_periodic_x(mesh);
  return std::make_shared<const Mesh2D>(std::move(mesh));
}

std::unique_ptr<FlowSolver> make_solver(const RunConfig& cfg, int n) {
  auto bench = cfg.make_bench();
  auto mesh = case_mesh(*bench, n);
  const double h = mesh->h();
  return std::make_unique<FlowSolver>(std::move(bench), std::move(mesh), cfg.degree, cfg.phys_params(),
                                      cfg.stepping(h));
}

RunReport run_single(const RunConfig& cfg, int n, std::ostream* csv, const StepHook& on_step) {
  std::shared_ptr<FlowSolver> solver = make_solver(cfg, n);
  RunReport report;
  report.solver = solver;
  report.n = n;
  report.h = solver->params().h;
  report.tau = solver->tau();
  report.steps = solver->num_steps();
  const bool with_errors = solver->bench().has_exact();
  if (csv) write_csv_header(*csv, with_errors);

  FlowState last;
  const auto observe = [&](const FlowState& s) {
    last = s;
    if (on_step) on_step(*solver, s);
    const bool first = s.step == 1;
    if (!first && s.step % cfg.stride != 0 && s.step != solver->num_steps()) return;
    const DiagnosticsRow row = state_row(*solver, s);
    report.final_row = row;
    if (csv) {
      write_csv_row(*csv, row);
      ++report.rows_written;
    }
  };
  try {
    run(*solver, 1, observe);
  } catch (const BlowUpError& e) {
    report.abort_message = e.what();
    if (csv) *csv << "# aborted: " << e.what() << '\n';
  }
  report.final_state = std::move(last);
  report.reference_norm = solver->reference_norm();
  report.max_velocity_norm = solver->max_velocity_norm();
  return report;
}

void write_state_dump(std::ostream& out, const FlowSolver& solver, const FlowState& s) {
  const FeSpace& vs = solver.vspace();
  const FeSpace& ps = solver.pspace();
  const Mesh2D& mesh = vs.mesh();
  out << std::setprecision(17);
  out << "case " << solver.bench().name() << '\n';
  out << "degree " << vs.degree() << '\n';
  out << "step " << s.step << '\n';
  out << "time " << s.time << '\n';
  out << "mesh\n";
  write_mesh(out, mesh);
  out << std::setprecision(17);
  out << "velocity " << vs.scalar_size() << '\n';
  for (int d = 0; d < vs.scalar_size(); ++d) {
    const Vec2& x = vs.dof_coords()[static_cast<std::size_t>(d)];
    out << x.x() << ' ' << x.y() << ' ' << s.u_curr[vs.dof(d, 0)] << ' ' << s.u_curr[vs.dof(d, 1)] << '\n';
  }
  out << "pressure " << ps.scalar_size() << '\n';
  for (int d = 0; d < ps.scalar_size(); ++d) {
    const Vec2& x = ps.dof_coords()[static_cast<std::size_t>(d)];
    out << x.x() << ' ' << x.y() << ' ' << s.p_curr[d] << '\n';
  }
}

SweepResult run_convergence_sweep(const RunConfig& cfg, const std::vector<int>& levels,
                                  const std::function<void(const SweepRow&)>& progress) {
  if (levels.size() < 2) throw ConfigError("a convergence sweep needs at least two mesh levels");
  if (!cfg.make_bench()->has_exact())
    throw ConfigError("case " + cfg.case_name + " has no exact solution to measure errors against");
  SweepResult result;
  for (int n : levels) {
    RunReport r;
    try {
      r = run_single(cfg, n, nullptr);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw SolverError("level n = " + std::to_string(n) + ": " + e.what());
    }
    if (r.abort_message)
      throw BlowUpError("level n = " + std::to_string(n) + ": " + *r.abort_message, r.final_state.step,
                        r.final_state.time);
    SweepRow row;
    row.n = n;
    row.h = r.h;
    row.tau = r.tau;
    row.steps = r.steps;
    row.err_u_l2 = r.final_row.err_u_l2.value();
    row.err_p_l2 = r.final_row.err_p_l2.value();
    row.err_u_h1 = r.final_row.err_u_h1.value();
    result.rows.push_back(row);
    if (progress) progress(row);
  }
  std::vector<double> hs, eu, ep, eh;
  for (const auto& row : result.rows) {
    hs.push_back(row.h);
    eu.push_back(row.err_u_l2);
    ep.push_back(row.err_p_l2);
    eh.push_back(row.err_u_h1);
  }
  result.rate_u_l2 = convergence_rates(hs, eu);
  result.rate_p_l2 = convergence_rates(hs, ep);
  result.rate_u_h1 = convergence_rates(hs, eh);
  result.fit_u_l2 = fitted_rate(hs, eu);
  result.fit_p_l2 = fitted_rate(hs, ep);
  result.fit_u_h1 = fitted_rate(hs, eh);
  return result;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << std::setprecision(17);
  out << "n,h,tau,steps,err_u_l2,err_p_l2,err_u_h1\n";
  for (const auto& r : result.rows)
    out << r.n << ',' << r.h << ',' << r.tau << ',' << r.steps << ',' << r.err_u_l2 << ',' << r.err_p_l2 << ','
        << r.err_u_h1 << '\n';
  for (std::size_t i = 0; i < result.rate_u_l2.size(); ++i)
    out << "# rate," << result.rows[i].n << ',' << result.rows[i + 1].n << ',' << result.rate_u_l2[i] << ','
        << result.rate_p_l2[i] << ',' << result.rate_u_h1[i] << '\n';
  if (!result.rows.empty())
    out << "# fit," << result.rows.front().n << ',' << result.rows.back().n << ',' << result.fit_u_l2 << ','
        << result.fit_p_l2 << ',' << result.fit_u_h1 << '\n';
}

}  // namespace cipflow
