#include "cipflow/timestepping.hpp"

#include <cmath>
#include <sstream>

#include "cipflow/errors.hpp"

namespace cipflow {

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::imex_cn: return "imex_cn";
    case Scheme::split_inviscid: return "split_inviscid";
    case Scheme::split_viscous: return "split_viscous";
  }
  return "?";
}

std::string to_string(ConvectionMode m) { return m == ConvectionMode::oseen ? "oseen" : "navier_stokes"; }
std::string to_string(CflRule r) { return r == CflRule::hyperbolic ? "hyperbolic" : "four_thirds"; }
std::string to_string(DirichletMode m) {
  switch (m) {
    case DirichletMode::nitsche: return "nitsche";
    case DirichletMode::strong: return "strong";
    case DirichletMode::strong_inflow: return "strong_inflow";
  }
  return "unknown";
}

double cfl_time_step(CflRule rule, double courant, double h) {
  if (!(courant > 0.0) || !(h > 0.0)) throw SetupError("Courant number and mesh size must be positive");
  return rule == CflRule::hyperbolic ? courant * h : courant * std::pow(h, 4.0 / 3.0);
}

void SteppingConfig::validate(const PhysParams& params, const BenchmarkCase& c) const {
  if (!(tau > 0.0)) throw SetupError("time step must be positive");
  if (!(final_time >= tau)) throw SetupError("final time must be at least one time step");
  if (!(blowup_factor > 1.0)) throw SetupError("blow-up factor must exceed 1");
  if (scheme == Scheme::split_inviscid && params.mu > 0.0 && !explicit_viscosity)
    throw SetupError("split_inviscid has no implicit viscous part; set explicit viscosity or mu = 0");
  if (scheme == Scheme::split_viscous && !(params.mu > 0.0)) throw SetupError("split_viscous needs mu > 0");
  if (scheme == Scheme::imex_cn && !(params.mu > 0.0))
    throw SetupError("imex_cn needs mu > 0 for the pressure stabilization scaling");
  if (convection == ConvectionMode::oseen && !c.has_exact())
    throw SetupError("oseen mode needs an exact velocity for beta; case " + c.name() + " has none");
}

Vector extrapolate(const FlowState& s) { return 1.5 * s.u_curr - 0.5 * s.u_prev; }

FlowSolver::FlowSolver(std::shared_ptr<const BenchmarkCase> bench, std::shared_ptr<const Mesh2D> mesh, int degree,
                       PhysParams params, SteppingConfig config)
    : case_(std::move(bench)),
      mesh_(std::move(mesh)),
      vspace_(build_space(mesh_, degree, 2)),
      pspace_(build_space(mesh_, degree, 1)),
      params_(params),
      config_(config),
      layout_(case_->layout()) {
  if (mesh_->periodic_x() != case_->periodic_x())
    throw SetupError("case " + case_->name() + (case_->periodic_x() ? " needs" : " does not use") +
                     " a periodic mesh");
  params_.h = mesh_->h();
  params_.validate();
  config_.validate(params_, *case_);
  for (const auto& f : mesh_->boundary_faces()) has_dirichlet_ = has_dirichlet_ || layout_.is_dirichlet(f.side);
  num_steps_ = static_cast<int>(std::ceil(config_.final_time / config_.tau - 1e-9));
  tau_ = config_.final_time / num_steps_;
  ops_ = assemble_operators(vspace_, pspace_, params_, layout_, config_.scheme == Scheme::imex_cn);
  mass_llt_.compute(ops_.M);
  if (mass_llt_.info() != Eigen::Success) throw SolverError("mass matrix factorization failed");
  if (config_.dirichlet != DirichletMode::nitsche) {
    const bool inflow_only = config_.dirichlet == DirichletMode::strong_inflow;
    const auto scalar = vspace_.boundary_scalar_dofs([&](const BoundaryFace& f) {
      if (!layout_.is_dirichlet(f.side)) return false;
      if (!inflow_only) return true;
      const Vec2 mid = 0.5 * (mesh_->vertices()[static_cast<std::size_t>(f.vertices[0])] +
                              mesh_->vertices()[static_cast<std::size_t>(f.vertices[1])]);
      return case_->boundary_velocity(0.0, mid).dot(f.normal) < -1e-10;
    });
    for (int c = 0; c < 2; ++c)
      for (int d : scalar) fixed_.push_back(vspace_.dof(d, c));
  }
}

VectorFunction FlowSolver::boundary_data(double t) const {
  return [this, t](const Vec2& x) { return case_->boundary_velocity(t, x); };
}

Vector FlowSolver::explicit_data(double t_half, const Convection& conv) const {
  Vector b = Vector::Zero(vspace_.size());
  if (case_->has_forcing())
    b += assemble_load(vspace_, VectorFunction([this, t_half](const Vec2& x) { return case_->forcing(t_half, x); }));
  if (has_dirichlet_) b += normal_penalty_data(vspace_, conv, layout_, boundary_data(t_half));
  return b;
}

Vector FlowSolver::mass_solve(const Vector& b) const { return mass_llt_.solve(b); }

Vector FlowSolver::boundary_values(double t) const {
  Vector g = Vector::Zero(vspace_.size());
  if (fixed_.empty()) return g;
  const Vector all = interpolate(vspace_, boundary_data(t));
  for (int d : fixed_) g[d] = all[d];
  return g;
}

double FlowSolver::velocity_norm(const Vector& u) const { return std::sqrt(std::max(0.0, u.dot(ops_.M * u))); }

Convection FlowSolver::convection(double t, const Vector& u_hat) const {
  if (config_.convection == ConvectionMode::oseen)
    return make_convection(vspace_, ConvectionField::analytic([this, t](const Vec2& x) { return case_->velocity(t, x); }));
  return make_convection(vspace_, ConvectionField::discrete(vspace_, u_hat));
}

const SaddleSystem& FlowSolver::imex_system() {
  if (!imex_) {
    imex_.emplace(build_imex_system(ops_, tau_, fixed_));
    ++imex_builds_;
  }
  return *imex_;
}

const PoissonSystem& FlowSolver::poisson() {
  if (!poisson_) poisson_.emplace(build_pressure_poisson(pspace_));
  return *poisson_;
}

const FactorizedSystem& FlowSolver::velocity_system(double theta) {
  if (!velocity_) velocity_.emplace(build_velocity_system(ops_, tau_, theta, fixed_));
  return *velocity_;
}

FlowState FlowSolver::initialize() {
  FlowState s;
  const VectorFunction u0 = [this](const Vec2& x) { return case_->initial_velocity(x); };
  s.u_prev = l2_project(vspace_, u0);
  s.p_curr = Vector::Zero(pspace_.size());
  if (case_->has_exact()) {
    s.u_curr = l2_project(vspace_, VectorFunction([this](const Vec2& x) { return case_->velocity(tau_, x); }));
    s.step = 1;
    s.time = tau_;
  } else {
    s.u_curr = s.u_prev;
    s = step(s);
  }
  reference_norm_ = velocity_norm(s.u_curr);
  max_norm_ = reference_norm_;
  return s;
}

FlowState FlowSolver::step(const FlowState& s) {
  FlowState next;
  switch (config_.scheme) {
    case Scheme::imex_cn: next = imex_cn_step(s); break;
    case Scheme::split_inviscid: next = split_inviscid_step(s); break;
    case Scheme::split_viscous: next = split_viscous_step(s); break;
  }
  max_norm_ = std::max(max_norm_, check_growth(next));
  return next;
}

double FlowSolver::check_growth(const FlowState& s) const {
  const double norm = velocity_norm(s.u_curr);
  const bool finite = std::isfinite(norm) && s.p_curr.allFinite();
  if (finite && (reference_norm_ == 0.0 || norm <= config_.blowup_factor * reference_norm_)) return norm;
  std::ostringstream msg;
  msg << "velocity blow-up at step " << s.step << " (t = " << s.time << "): ";
  if (!finite)
    msg << "non-finite values";
  else
    msg << "||u|| = " << norm << " exceeds " << config_.blowup_factor << " * ||u^1|| = " << reference_norm_;
  const double h = params_.h;
  msg << "; tau = " << tau_ << ", tau/h = " << tau_ / h << ", tau/h^(4/3) = " << tau_ / std::pow(h, 4.0 / 3.0)
      << "; reduce the Courant number";
  throw BlowUpError(msg.str(), s.step, s.time);
}

FlowState FlowSolver::imex_cn_step(const FlowState& s) {
  const double t0 = s.time, t1 = (s.step + 1) * tau_, th = (s.step + 0.5) * tau_;
  const Vector u_hat = extrapolate(s);
  const Convection conv = convection(th, u_hat);

  Vector rhs_u = ops_.M * s.u_curr / tau_ - 0.5 * (ops_.A * s.u_curr) - apply_convection(vspace_, conv, params_, u_hat) +
                 explicit_data(th, conv);
  Vector rhs_p = Vector::Zero(pspace_.size());
  if (has_dirichlet_) {
    if (params_.mu > 0.0)
      rhs_u += 0.5 * (nitsche_data(vspace_, params_, layout_, boundary_data(t0)) +
                      nitsche_data(vspace_, params_, layout_, boundary_data(t1)));
    rhs_p = boundary_flux_data(pspace_, layout_, boundary_data(t1));
  }
  if (!fixed_.empty()) {
    const Vector g = boundary_values(t1);
    for (int d : fixed_) rhs_u[d] = g[d];
  }
  const SaddleSystem& sys = imex_system();
  const StepSolution x = solve_step(sys, rhs_u, rhs_p);
  residuals_ = {};
  residuals_.saddle = saddle_residual(sys, x, rhs_u, rhs_p);
  return {s.u_curr, x.u, x.p, s.step + 1, t1};
}

FlowState FlowSolver::split_inviscid_step(const FlowState& s) {
  const double t1 = (s.step + 1) * tau_, th = (s.step + 0.5) * tau_;
  // Step 1: extrapolation; step 2: explicit operator on u*.
  const Vector u_star = extrapolate(s);
  const Convection conv = convection(th, u_star);
  Vector load = explicit_data(th, conv) - apply_convection(vspace_, conv, params_, u_star);
  if (params_.mu > 0.0) {
    load -= ops_.A * u_star;
    if (has_dirichlet_) load += nitsche_data(vspace_, params_, layout_, boundary_data(th));
  }
  // R_C(v) = (r, v) with r = u^n / tau + M^-1 load.
  const Vector r = s.u_curr / tau_ + mass_solve(load);
  const Vector mr = ops_.M * r;

  // Step 3: (grad p, grad q) = R_C(grad q) plus the boundary flux of the data.
  Vector prhs = ops_.G.transpose() * r;
  if (has_dirichlet_) prhs += boundary_flux_data(pspace_, layout_, boundary_data(t1)) / tau_;
  double lambda = 0.0;
  const PoissonSystem& pois = poisson();
  const Vector p = pois.solve(prhs, &lambda);

  // Step 4: (u^{n+1} / tau, v) = -(G p, v) + R_C(v).
  Vector vrhs = mr - ops_.G * p;
  Vector u;
  residuals_ = {};
  residuals_.poisson = pois.relative_residual(p, lambda, prhs);
  if (fixed_.empty()) {
    u = tau_ * mass_solve(vrhs);
    residuals_.velocity = (ops_.M * u / tau_ - vrhs).norm() / std::max(vrhs.norm(), 1e-300);
  } else {
    const Vector g = boundary_values(t1);
    for (int d : fixed_) vrhs[d] = g[d];
    const FactorizedSystem& vs = velocity_system(0.0);
    u = vs.solve(vrhs);
    residuals_.velocity = vs.relative_residual(u, vrhs);
  }
  return {s.u_curr, u, p, s.step + 1, t1};
}

FlowState FlowSolver::split_viscous_step(const FlowState& s) {
  const double t0 = s.time, t1 = (s.step + 1) * tau_, th = (s.step + 0.5) * tau_;
  const Vector u_star = extrapolate(s);
  const Convection conv = convection(th, u_star);
  // R_C carries convection, forcing and the normal-penalty data; R_D adds the
  // explicit viscous operator on u*.
  const Vector load_c = explicit_data(th, conv) - apply_convection(vspace_, conv, params_, u_star);
  Vector load_d = load_c - ops_.A * u_star;
  if (has_dirichlet_) load_d += nitsche_data(vspace_, params_, layout_, boundary_data(th));
  const Vector r_d = s.u_curr / tau_ + mass_solve(load_d);

  Vector prhs = ops_.G.transpose() * r_d;
  if (has_dirichlet_) prhs += boundary_flux_data(pspace_, layout_, boundary_data(t1)) / tau_;
  double lambda = 0.0;
  const PoissonSystem& pois = poisson();
  const Vector p = pois.solve(prhs, &lambda);

  // (u^{n+1}/tau, v) + (A (u^{n+1} + u^n)/2, v) = -(G p, v) + R_C(v).
  Vector vrhs = ops_.M * s.u_curr / tau_ + load_c - ops_.G * p - 0.5 * (ops_.A * s.u_curr);
  if (has_dirichlet_)
    vrhs += 0.5 * (nitsche_data(vspace_, params_, layout_, boundary_data(t0)) +
                   nitsche_data(vspace_, params_, layout_, boundary_data(t1)));
  if (!fixed_.empty()) {
    const Vector g = boundary_values(t1);
    for (int d : fixed_) vrhs[d] = g[d];
  }
  const FactorizedSystem& vs = velocity_system(0.5);
  const Vector u = vs.solve(vrhs);
  residuals_ = {};
  residuals_.poisson = pois.relative_residual(p, lambda, prhs);
  residuals_.velocity = vs.relative_residual(u, vrhs);
  return {s.u_curr, u, p, s.step + 1, t1};
}

FlowState run(FlowSolver& solver, int stride, const std::function<void(const FlowState&)>& observe) {
  if (stride < 1) throw SetupError("diagnostics stride must be at least 1");
  FlowState s = solver.initialize();
  if (observe) observe(s);
  while (s.step < solver.num_steps()) {
    try {
      s = solver.step(s);
    } catch (const BlowUpError&) {
      throw;
    } catch (const std::exception& e) {
      throw SolverError("step " + std::to_string(s.step + 1) + ": " + e.what());
    }
    if (observe && (s.step % stride == 0 || s.step == solver.num_steps())) observe(s);
  }
  return s;
}

}  // namespace cipflow
