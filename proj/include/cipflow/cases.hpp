#pragma once

#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cipflow/operators.hpp"

namespace cipflow {

/// Analytic definition of a benchmark: domain, boundary layout, initial data
/// and, where one exists, the exact solution with its derivatives.
class BenchmarkCase {
 public:
  virtual ~BenchmarkCase() = default;

  virtual std::string name() const = 0;
  virtual Rectangle domain() const { return {}; }
  virtual bool periodic_x() const { return false; }
  virtual BoundaryLayout layout() const { return {}; }
  double mu() const { return mu_; }
  /// Mesh sizes n (n x n grids) of the default refinement ladder.
  virtual std::vector<int> default_levels() const = 0;
  virtual double default_final_time() const = 0;

  virtual bool has_exact() const { return true; }
  /// False when the body force is identically zero.
  virtual bool has_forcing() const { return true; }
  virtual Vec2 velocity(double t, const Vec2& x) const = 0;
  /// Row c is grad u_c.
  virtual Eigen::Matrix2d velocity_gradient(double t, const Vec2& x) const = 0;
  virtual Vec2 velocity_dt(double t, const Vec2& x) const = 0;
  virtual Vec2 velocity_laplacian(double t, const Vec2& x) const = 0;
  virtual double pressure(double t, const Vec2& x) const = 0;
  virtual Vec2 pressure_gradient(double t, const Vec2& x) const = 0;

  virtual Vec2 initial_velocity(const Vec2& x) const { return velocity(0.0, x); }
  /// Dirichlet data on the sides marked dirichlet in layout().
  virtual Vec2 boundary_velocity(double t, const Vec2& x) const { return velocity(t, x); }

  /// du/dt + (u.grad)u + grad p - mu lap u for the exact solution, which is
  /// also the Oseen residual with beta = u. Throws SetupError without one.
  virtual Vec2 forcing(double t, const Vec2& x) const;

 protected:
  explicit BenchmarkCase(double mu) : mu_(mu) {}

 private:
  double mu_;
};

/// Vortex travelling in x on the unit square:
/// u = (1 + sin X cos Y e, -cos X sin Y e), p = (cos 2X + cos 2Y) e^2 / 4,
/// X = 2 pi (x - t), Y = 2 pi y, e = exp(-8 pi^2 mu t). Solves the
/// Navier-Stokes equations exactly, so its forcing is zero.
class TaylorGreen final : public BenchmarkCase {
 public:
  explicit TaylorGreen(double mu = 3.571e-6) : BenchmarkCase(mu) {}
  std::string name() const override { return "taylor_green"; }
  std::vector<int> default_levels() const override { return {10, 20, 40, 80}; }
  double default_final_time() const override { return 1.0; }
  Vec2 velocity(double t, const Vec2& x) const override;
  Eigen::Matrix2d velocity_gradient(double t, const Vec2& x) const override;
  Vec2 velocity_dt(double t, const Vec2& x) const override;
  Vec2 velocity_laplacian(double t, const Vec2& x) const override;
  double pressure(double t, const Vec2& x) const override;
  Vec2 pressure_gradient(double t, const Vec2& x) const override;
  bool has_forcing() const override { return false; }
  Vec2 forcing(double, const Vec2&) const override { return Vec2::Zero(); }
};

/// Manufactured low-Reynolds solution vanishing on the boundary of the unit square:
/// u = (2 cos t sin^2(pi x) y(1-y)(1-2y), -pi cos t sin(2 pi x) y^2 (1-y)^2),
/// p = sin(pi x) cos(pi y) cos t.
class LowReynolds final : public BenchmarkCase {
 public:
  explicit LowReynolds(double mu = 0.1) : BenchmarkCase(mu) {}
  std::string name() const override { return "low_re"; }
  std::vector<int> default_levels() const override { return {10, 20, 40, 80}; }
  double default_final_time() const override { return 1.1; }
  Vec2 velocity(double t, const Vec2& x) const override;
  Eigen::Matrix2d velocity_gradient(double t, const Vec2& x) const override;
  Vec2 velocity_dt(double t, const Vec2& x) const override;
  Vec2 velocity_laplacian(double t, const Vec2& x) const override;
  double pressure(double t, const Vec2& x) const override;
  Vec2 pressure_gradient(double t, const Vec2& x) const override;
};

struct ShearLayerParams {
  double u_inf = 1.0;
  double sigma0 = 1.0 / 28.0;
  double amplitude = 0.001;  // c
  double wavenumber = 8.0 * std::numbers::pi;  // theta
};

/// Double-periodic-in-x shear layer: tanh profile plus the curl of the stream
/// function c u_inf exp(-(y-1/2)^2 / sigma0^2) cos(theta x). Slip walls at
/// y = 0 and y = 1; no exact solution.
class KelvinHelmholtz final : public BenchmarkCase {
 public:
  explicit KelvinHelmholtz(double mu = 3.571e-6, ShearLayerParams p = {}) : BenchmarkCase(mu), p_(p) {}
  std::string name() const override { return "kelvin_helmholtz"; }
  bool periodic_x() const override { return true; }
  BoundaryLayout layout() const override;
  std::vector<int> default_levels() const override { return {40}; }
  double default_final_time() const override { return 10.0; }
  const ShearLayerParams& params() const { return p_; }

  bool has_exact() const override { return false; }
  bool has_forcing() const override { return false; }
  Vec2 velocity(double, const Vec2&) const override;
  Eigen::Matrix2d velocity_gradient(double, const Vec2&) const override;
  Vec2 velocity_dt(double, const Vec2&) const override;
  Vec2 velocity_laplacian(double, const Vec2&) const override;
  double pressure(double, const Vec2&) const override;
  Vec2 pressure_gradient(double, const Vec2&) const override;

  Vec2 initial_velocity(const Vec2& x) const override;
  Vec2 boundary_velocity(double, const Vec2&) const override { return Vec2::Zero(); }

 private:
  ShearLayerParams p_;
};

/// Case by name ("taylor_green", "low_re", "kelvin_helmholtz"); mu <= 0
/// selects the case default. Throws ConfigError for unknown names.
std::unique_ptr<BenchmarkCase> make_case(const std::string& name, double mu = -1.0);

}  // namespace cipflow
