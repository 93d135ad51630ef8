#include "cipflow/cases.hpp"

#include <cmath>
#include <numbers>

#include "cipflow/errors.hpp"

namespace cipflow {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

Vec2 BenchmarkCase::forcing(double t, const Vec2& x) const {
  if (!has_exact()) throw SetupError("case " + name() + " has no exact solution to derive a forcing from");
  const Vec2 u = velocity(t, x);
  return velocity_dt(t, x) + velocity_gradient(t, x) * u + pressure_gradient(t, x) - mu() * velocity_laplacian(t, x);
}

// Taylor-Green

Vec2 TaylorGreen::velocity(double t, const Vec2& x) const {
  const double e = std::exp(-8 * kPi * kPi * mu() * t);
  const double X = 2 * kPi * (x.x() - t), Y = 2 * kPi * x.y();
  return {1 + std::sin(X) * std::cos(Y) * e, -std::cos(X) * std::sin(Y) * e};
}

Eigen::Matrix2d TaylorGreen::velocity_gradient(double t, const Vec2& x) const {
  const double e = 2 * kPi * std::exp(-8 * kPi * kPi * mu() * t);
  const double X = 2 * kPi * (x.x() - t), Y = 2 * kPi * x.y();
  const double cc = std::cos(X) * std::cos(Y) * e, ss = std::sin(X) * std::sin(Y) * e;
  Eigen::Matrix2d g;
  g << cc, -ss, ss, -cc;
  return g;
}

Vec2 TaylorGreen::velocity_dt(double t, const Vec2& x) const {
  const double decay = 8 * kPi * kPi * mu();
  const double e = std::exp(-decay * t);
  const double X = 2 * kPi * (x.x() - t), Y = 2 * kPi * x.y();
  return {(-2 * kPi * std::cos(X) * std::cos(Y) - decay * std::sin(X) * std::cos(Y)) * e,
          (-2 * kPi * std::sin(X) * std::sin(Y) + decay * std::cos(X) * std::sin(Y)) * e};
}

Vec2 TaylorGreen::velocity_laplacian(double t, const Vec2& x) const {
  const double e = 8 * kPi * kPi * std::exp(-8 * kPi * kPi * mu() * t);
  const double X = 2 * kPi * (x.x() - t), Y = 2 * kPi * x.y();
  return {-std::sin(X) * std::cos(Y) * e, std::cos(X) * std::sin(Y) * e};
}

double TaylorGreen::pressure(double t, const Vec2& x) const {
  const double e = std::exp(-16 * kPi * kPi * mu() * t);
  return 0.25 * (std::cos(4 * kPi * (x.x() - t)) + std::cos(4 * kPi * x.y())) * e;
}

Vec2 TaylorGreen::pressure_gradient(double t, const Vec2& x) const {
  const double e = kPi * std::exp(-16 * kPi * kPi * mu() * t);
  return {-std::sin(4 * kPi * (x.x() - t)) * e, -std::sin(4 * kPi * x.y()) * e};
}

// Low Reynolds manufactured solution

namespace {

struct LowReTerms {
  double S, S1, S2;  // sin^2(pi x) and x-derivatives
  double T, T1, T2;  // sin(2 pi x) and x-derivatives
  double g, g1, g2;  // y(1-y)(1-2y) and y-derivatives
  double G, G1, G2;  // y^2(1-y)^2 and y-derivatives
};

LowReTerms low_re_terms(const Vec2& p) {
  const double x = p.x(), y = p.y();
  const double s = std::sin(kPi * x);
  LowReTerms r{};
  r.S = s * s;
  r.S1 = kPi * std::sin(2 * kPi * x);
  r.S2 = 2 * kPi * kPi * std::cos(2 * kPi * x);
  r.T = std::sin(2 * kPi * x);
  r.T1 = 2 * kPi * std::cos(2 * kPi * x);
  r.T2 = -4 * kPi * kPi * std::sin(2 * kPi * x);
  r.g = y * (1 - y) * (1 - 2 * y);
  r.g1 = 1 - 6 * y + 6 * y * y;
  r.g2 = -6 + 12 * y;
  r.G = y * y * (1 - y) * (1 - y);
  r.G1 = 2 * r.g;
  r.G2 = 2 * r.g1;
  return r;
}

}  // namespace

Vec2 LowReynolds::velocity(double t, const Vec2& x) const {
  const LowReTerms r = low_re_terms(x);
  return {2 * std::cos(t) * r.S * r.g, -kPi * std::cos(t) * r.T * r.G};
}

Eigen::Matrix2d LowReynolds::velocity_gradient(double t, const Vec2& x) const {
  const LowReTerms r = low_re_terms(x);
  const double c = std::cos(t);
  Eigen::Matrix2d g;
  g << 2 * c * r.S1 * r.g, 2 * c * r.S * r.g1, -kPi * c * r.T1 * r.G, -kPi * c * r.T * r.G1;
  return g;
}

Vec2 LowReynolds::velocity_dt(double t, const Vec2& x) const {
  const LowReTerms r = low_re_terms(x);
  return {-2 * std::sin(t) * r.S * r.g, kPi * std::sin(t) * r.T * r.G};
}

Vec2 LowReynolds::velocity_laplacian(double t, const Vec2& x) const {
  const LowReTerms r = low_re_terms(x);
  const double c = std::cos(t);
  return {2 * c * (r.S2 * r.g + r.S * r.g2), -kPi * c * (r.T2 * r.G + r.T * r.G2)};
}

double LowReynolds::pressure(double t, const Vec2& x) const {
  return std::sin(kPi * x.x()) * std::cos(kPi * x.y()) * std::cos(t);
}

Vec2 LowReynolds::pressure_gradient(double t, const Vec2& x) const {
  const double c = kPi * std::cos(t);
  return {c * std::cos(kPi * x.x()) * std::cos(kPi * x.y()), -c * std::sin(kPi * x.x()) * std::sin(kPi * x.y())};
}

// Kelvin-Helmholtz

BoundaryLayout KelvinHelmholtz::layout() const {
  BoundaryLayout l;
  l.sides[static_cast<std::size_t>(Side::bottom)] = BoundaryKind::slip;
  l.sides[static_cast<std::size_t>(Side::top)] = BoundaryKind::slip;
  return l;
}

Vec2 KelvinHelmholtz::initial_velocity(const Vec2& x) const {
  const double dy = x.y() - 0.5;
  const double bump = p_.amplitude * p_.u_inf * std::exp(-dy * dy / (p_.sigma0 * p_.sigma0));
  const double dxi_dy = -2 * dy / (p_.sigma0 * p_.sigma0) * bump * std::cos(p_.wavenumber * x.x());
  const double dxi_dx = -p_.wavenumber * bump * std::sin(p_.wavenumber * x.x());
  return {p_.u_inf * std::tanh((2 * x.y() - 1) / p_.sigma0) + dxi_dy, -dxi_dx};
}

namespace {

[[noreturn]] void no_exact() { throw SetupError("kelvin_helmholtz has no exact solution"); }

}  // namespace

Vec2 KelvinHelmholtz::velocity(double, const Vec2&) const { no_exact(); }
Eigen::Matrix2d KelvinHelmholtz::velocity_gradient(double, const Vec2&) const { no_exact(); }
Vec2 KelvinHelmholtz::velocity_dt(double, const Vec2&) const { no_exact(); }
Vec2 KelvinHelmholtz::velocity_laplacian(double, const Vec2&) const { no_exact(); }
double KelvinHelmholtz::pressure(double, const Vec2&) const { no_exact(); }
Vec2 KelvinHelmholtz::pressure_gradient(double, const Vec2&) const { no_exact(); }

std::unique_ptr<BenchmarkCase> make_case(const std::string& name, double mu) {
  if (name == "taylor_green") return mu > 0 ? std::make_unique<TaylorGreen>(mu) : std::make_unique<TaylorGreen>();
  if (name == "low_re") return mu > 0 ? std::make_unique<LowReynolds>(mu) : std::make_unique<LowReynolds>();
  if (name == "kelvin_helmholtz")
    return mu > 0 ? std::make_unique<KelvinHelmholtz>(mu) : std::make_unique<KelvinHelmholtz>();
  throw ConfigError("unknown case '" + name + "'");
}

}  // namespace cipflow
