#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cipflow/cases.hpp"
#include "cipflow/timestepping.hpp"

namespace cipflow {

/// Everything needed to reproduce a run or a sweep.
///
/// File format: `[section]` headers and `key = value` lines; `#` starts a
/// comment. Sections and keys:
///
///   [case]            name, mu
///   [discretization]  degree, levels, gamma_u, gamma_p, gamma, eps_perp, beta_inf
///   [time]            scheme, convection, dirichlet, cfl_rule, courant, tau,
///                     final_time, explicit_viscosity, blowup_factor
///   [output]          directory, stride
///
/// Unknown sections or keys, duplicates and malformed values are errors.
struct RunConfig {
  std::string case_name = "taylor_green";
  std::optional<double> mu;  // case default when absent
  int degree = 1;
  std::vector<int> levels;   // case default ladder when empty
  double gamma_u = 0.001;
  double gamma_p = 0.001;
  std::optional<double> gamma;  // 10 k^2 when absent
  double eps_perp = 0.01;
  double beta_inf = 1.0;

  Scheme scheme = Scheme::imex_cn;
  ConvectionMode convection = ConvectionMode::navier_stokes;
  DirichletMode dirichlet = DirichletMode::strong_inflow;
  std::optional<CflRule> cfl_rule;  // hyperbolic for k = 1, four_thirds otherwise
  std::optional<double> courant;    // 0.05 (hyperbolic) or 0.025 (four_thirds)
  std::optional<double> tau;        // overrides the Courant rule
  std::optional<double> final_time; // case default when absent
  bool explicit_viscosity = true;
  double blowup_factor = 1e6;

  std::filesystem::path output_directory = "out";
  int stride = 1;

  std::shared_ptr<const BenchmarkCase> make_bench() const;
  CflRule effective_cfl_rule() const;
  double effective_courant() const;
  /// Mesh sizes n of the levels actually used.
  std::vector<int> effective_levels() const;
  double effective_final_time() const;
  PhysParams phys_params() const;
  /// Stepping configuration on a mesh of parameter h.
  SteppingConfig stepping(double h) const;
};

/// Parses configuration text; `origin` names the source in error messages.
/// Throws ConfigError with the line number on any problem.
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");
RunConfig parse_config(const std::filesystem::path& path);

/// Rejects inconsistent combinations (ConfigError).
void validate(const RunConfig& cfg);

}  // namespace cipflow
