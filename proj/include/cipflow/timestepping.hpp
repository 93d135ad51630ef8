#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/SparseCholesky>

#include "cipflow/cases.hpp"
#include "cipflow/convection.hpp"
#include "cipflow/saddle_solver.hpp"

namespace cipflow {

enum class Scheme { imex_cn, split_inviscid, split_viscous };
enum class ConvectionMode { oseen, navier_stokes };
enum class CflRule { hyperbolic, four_thirds };
/// nitsche: weak imposition everywhere. strong: boundary velocity dofs fixed
/// to the interpolated data on all Dirichlet sides. strong_inflow: fixed only
/// on Dirichlet faces where the initial boundary data enters the domain,
/// Nitsche elsewhere.
enum class DirichletMode { nitsche, strong, strong_inflow };

std::string to_string(Scheme s);
std::string to_string(ConvectionMode m);
std::string to_string(CflRule r);
std::string to_string(DirichletMode m);

/// tau = Co h (hyperbolic) or tau = Co h^(4/3) (four_thirds).
double cfl_time_step(CflRule rule, double courant, double h);

struct SteppingConfig {
  Scheme scheme = Scheme::imex_cn;
  ConvectionMode convection = ConvectionMode::navier_stokes;
  DirichletMode dirichlet = DirichletMode::nitsche;
  /// Time step; the run shortens it to T / ceil(T / tau) so that it ends on T.
  double tau = 0.0;
  double final_time = 1.0;
  /// The inviscid split keeps mu A on the explicit side when mu > 0.
  bool explicit_viscosity = true;
  /// Abort when ||u^n|| exceeds this multiple of ||u^1||.
  double blowup_factor = 1e6;

  /// Throws SetupError for an inconsistent combination.
  void validate(const PhysParams& params, const BenchmarkCase& c) const;
};

/// Velocity at two time levels and the latest pressure, which approximates
/// p at t^n - tau/2.
struct FlowState {
  Vector u_prev;  // t^{n-1}
  Vector u_curr;  // t^n
  Vector p_curr;
  int step = 0;
  double time = 0.0;
};

/// u_hat = 3/2 u^n - 1/2 u^{n-1}.
Vector extrapolate(const FlowState& s);

/// Relative residuals of the equations solved in the last step.
struct StepResiduals {
  double saddle = 0.0;    // monolithic block system
  double poisson = 0.0;   // pressure Poisson equation of the splits
  double velocity = 0.0;  // velocity update of the splits
};

/// Owns the spaces, the constant operators and their factorizations for one
/// run of one case on one mesh.
class FlowSolver {
 public:
  FlowSolver(std::shared_ptr<const BenchmarkCase> bench, std::shared_ptr<const Mesh2D> mesh, int degree,
             PhysParams params, SteppingConfig config);

  const BenchmarkCase& bench() const { return *case_; }
  const FeSpace& vspace() const { return vspace_; }
  const FeSpace& pspace() const { return pspace_; }
  const DiscreteOperators& ops() const { return ops_; }
  const PhysParams& params() const { return params_; }
  const SteppingConfig& config() const { return config_; }
  double tau() const { return tau_; }
  int num_steps() const { return num_steps_; }

  /// u^0 = pi_h u(0) and u^1 = pi_h u(tau) when the case has an exact
  /// solution; otherwise u^1 comes from one step with u_hat = u^0.
  FlowState initialize();

  /// One step of the configured scheme, with the blow-up check.
  FlowState step(const FlowState& s);

  FlowState imex_cn_step(const FlowState& s);
  FlowState split_inviscid_step(const FlowState& s);
  FlowState split_viscous_step(const FlowState& s);

  /// beta used for the convection operator at time t with extrapolated velocity u_hat.
  Convection convection(double t, const Vector& u_hat) const;

  const StepResiduals& last_residuals() const { return residuals_; }
  /// Number of IMEX block factorizations so far.
  int imex_factorizations() const { return imex_builds_; }
  /// L2 norm of a velocity coefficient vector.
  double velocity_norm(const Vector& u) const;
  /// L2 norm of u^1, the blow-up reference.
  double reference_norm() const { return reference_norm_; }
  /// Largest velocity L2 norm since initialize().
  double max_velocity_norm() const { return max_norm_; }
  /// Velocity dofs fixed by strong Dirichlet conditions (empty for Nitsche).
  const std::vector<int>& fixed_dofs() const { return fixed_; }

 private:
  VectorFunction boundary_data(double t) const;
  /// Forcing load plus normal-penalty data at t^{n+1/2}.
  Vector explicit_data(double t_half, const Convection& conv) const;
  Vector mass_solve(const Vector& b) const;
  Vector boundary_values(double t) const;
  /// Returns the L2 norm of the new velocity; throws BlowUpError on growth.
  double check_growth(const FlowState& s) const;
  const SaddleSystem& imex_system();
  const PoissonSystem& poisson();
  const FactorizedSystem& velocity_system(double theta);

  std::shared_ptr<const BenchmarkCase> case_;
  std::shared_ptr<const Mesh2D> mesh_;
  FeSpace vspace_;
  FeSpace pspace_;
  PhysParams params_;
  SteppingConfig config_;
  BoundaryLayout layout_;
  bool has_dirichlet_ = false;
  double tau_ = 0.0;
  int num_steps_ = 0;
  DiscreteOperators ops_;
  std::vector<int> fixed_;
  Eigen::SimplicialLLT<SparseMatrix> mass_llt_;
  std::optional<SaddleSystem> imex_;
  std::optional<PoissonSystem> poisson_;
  std::optional<FactorizedSystem> velocity_;
  int imex_builds_ = 0;
  double reference_norm_ = 0.0;
  double max_norm_ = 0.0;
  StepResiduals residuals_;
};

/// Advances from initialize() to the final time, calling `observe` on the
/// initial state u^1 and then every `stride` steps and on the last step.
/// Returns the final state. Step failures propagate with their step index.
FlowState run(FlowSolver& solver, int stride, const std::function<void(const FlowState&)>& observe);

}  // namespace cipflow
