#include "gbmred/reduce_ode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gbmred {

namespace {

double max_abs_coeff(const Polynomial& p) {
  double m = 0.0;
  for (double c : p.coefficients()) m = std::max(m, std::abs(c));
  return m;
}

}  // namespace

ClosedOde::ClosedOde(Polynomial coefficients, double forcing, std::optional<double> equilibrium)
    : coeffs_(std::move(coefficients)), forcing_(forcing), equilibrium_(equilibrium) {
  if (coeffs_.degree() < 1) throw DomainError("ClosedOde: order must be at least 1");
  if (!std::isfinite(forcing_)) throw DomainError("ClosedOde: non-finite forcing");
  if (equilibrium_) {
    if (!std::isfinite(*equilibrium_)) throw DomainError("ClosedOde: non-finite equilibrium");
    const double expect = coeffs_[0] * *equilibrium_;
    const double scale = std::max({1.0, std::abs(expect), std::abs(forcing_)});
    if (std::abs(expect - forcing_) > 1e-12 * scale) {
      throw DomainError("ClosedOde: forcing " + std::to_string(forcing_) + " differs from a_0 * u_inf = " +
                        std::to_string(expect));
    }
  }
}

ClosedOde closed_ode_from_system(const Matrix& F, ClosureKind kind) {
  return ClosedOde(kind == ClosureKind::minimal ? minimal_poly(F) : char_poly(F));
}

ClosedOde closed_ode_from_system(const Matrix& F, double u_inf, ClosureKind kind) {
  Polynomial p = kind == ClosureKind::minimal ? minimal_poly(F) : char_poly(F);
  const double c = p[0] * u_inf;
  return ClosedOde(std::move(p), c, u_inf);
}

ClosedOde factor_zero_root(const ClosedOde& ode, double u_inf) {
  const Polynomial& p = ode.coefficients();
  if (std::abs(p[0]) > 1e-10 * max_abs_coeff(p)) {
    throw DomainError("factor_zero_root: a_0 = " + std::to_string(p[0]) + " is not zero, no root at 0 to factor");
  }
  if (p.degree() < 2) throw DomainError("factor_zero_root: order would drop below 1");
  std::vector<double> q(p.coefficients().begin() + 1, p.coefficients().end());
  Polynomial reduced(std::move(q));
  const double c = reduced[0] * u_inf;
  return ClosedOde(std::move(reduced), c, u_inf);
}

ReducedScalarOde adiabatic_truncate(const ClosedOde& ode) {
  const Polynomial& p = ode.coefficients();
  if (p.degree() < 2) throw DomainError("adiabatic_truncate: equation is already first order");
  if (p[1] == 0.0) throw DomainError("adiabatic_truncate: a_1 = 0, truncation undefined");
  ReducedScalarOde r;
  r.rate = -p[0] / p[1];
  if (ode.equilibrium()) {
    r.equilibrium = *ode.equilibrium();
  } else if (p[0] != 0.0) {
    r.equilibrium = ode.forcing() / p[0];
  } else if (ode.forcing() != 0.0) {
    throw DomainError("adiabatic_truncate: a_0 = 0 with nonzero forcing has no equilibrium");
  }
  return r;
}

ClosedOde drop_highest_derivative(const ClosedOde& ode) {
  std::vector<double> c = ode.coefficients().coefficients();
  c.pop_back();
  return ClosedOde(Polynomial(std::move(c)), ode.forcing(), ode.equilibrium());
}

ClosedOde scale_equation(const ClosedOde& ode, double s) {
  if (s == 0.0 || !std::isfinite(s)) throw DomainError("scale_equation: factor must be finite and nonzero");
  std::vector<double> c = ode.coefficients().coefficients();
  for (double& v : c) v *= s;
  return ClosedOde(Polynomial(std::move(c)), ode.forcing() * s, ode.equilibrium());
}

ClosedOde shift_coefficient(const ClosedOde& ode, int order, double delta) {
  if (order < 0) throw DomainError("shift_coefficient: negative order");
  std::vector<double> c = ode.coefficients().coefficients();
  if (static_cast<std::size_t>(order) >= c.size()) c.resize(order + 1, 0.0);
  c[order] += delta;
  Polynomial p(std::move(c));
  double forcing = ode.forcing();
  if (ode.equilibrium()) forcing = p[0] * *ode.equilibrium();
  return ClosedOde(std::move(p), forcing, ode.equilibrium());
}

std::vector<ChainStage> large_beta_chain(const ClosedOde& third_order, double alpha, double beta) {
  if (third_order.order() != 3) throw DomainError("large_beta_chain: expected a third-order equation");
  if (!third_order.equilibrium()) throw DomainError("large_beta_chain: equation carries no equilibrium");
  if (!(beta > 0.0)) throw DomainError("large_beta_chain: beta must be positive");
  const double b2 = beta * beta;

  std::vector<ChainStage> stages;
  stages.push_back({"drop_third_derivative", drop_highest_derivative(third_order)});
  stages.push_back({"halve", scale_equation(stages.back().ode, 0.5)});
  stages.push_back({"drop_alpha_damping", shift_coefficient(stages.back().ode, 1, -8.0 * alpha * alpha)});
  stages.push_back({"divide_by_beta_squared", scale_equation(stages.back().ode, 1.0 / b2)});
  stages.push_back({"drop_second_derivative", drop_highest_derivative(stages.back().ode)});
  stages.push_back({"divide_by_eight", scale_equation(stages.back().ode, 0.125)});
  return stages;
}

ScalarTrajectory solve_reduced(const ReducedScalarOde& ode, double u0, const std::vector<double>& t_grid) {
  ScalarTrajectory out;
  out.times = t_grid;
  out.values.reserve(t_grid.size());
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    if (k > 0 && !(t_grid[k] > t_grid[k - 1])) throw DomainError("solve_reduced: time grid must be increasing");
    out.values.push_back(ode.equilibrium + (u0 - ode.equilibrium) * std::exp(ode.rate * t_grid[k]));
  }
  return out;
}

ScalarTrajectory solve_closed_ode(const ClosedOde& ode, const std::vector<double>& initial_derivatives,
                                  const std::vector<double>& t_grid) {
  const Polynomial& p = ode.coefficients();
  const int n = p.degree();
  if (static_cast<int>(initial_derivatives.size()) != n) {
    throw DimensionError("solve_closed_ode: need " + std::to_string(n) + " initial derivatives, got " +
                         std::to_string(initial_derivatives.size()));
  }
  const double an = p[n];

  // w_k = u^(k) / s^k keeps every entry of the companion matrix within s.
  double s = 0.0;
  for (int k = 0; k < n; ++k) s = std::max(s, std::pow(std::abs(p[k] / an), 1.0 / (n - k)));
  if (s == 0.0) s = 1.0;

  Matrix F = Matrix::Zero(n, n);
  for (int k = 0; k + 1 < n; ++k) F(k, k + 1) = s;
  for (int j = 0; j < n; ++j) F(n - 1, j) = -(p[j] / an) * std::pow(s, static_cast<double>(j - n + 1));
  Vector c = Vector::Zero(n);
  c(n - 1) = ode.forcing() / an / std::pow(s, static_cast<double>(n - 1));
  Vector w0(n);
  for (int k = 0; k < n; ++k) w0(k) = initial_derivatives[k] / std::pow(s, static_cast<double>(k));

  const Trajectory traj = integrate_linear_ode(F, c, w0, t_grid);
  ScalarTrajectory out;
  out.times = traj.times;
  out.values = traj.component(0);
  return out;
}

std::vector<double> initial_derivatives_from_system(const Matrix& F, const Vector& c, const Vector& u0,
                                                    int component, int count) {
  require_square(F, "initial_derivatives_from_system");
  if (u0.size() != F.rows() || c.size() != F.rows()) {
    throw DimensionError("initial_derivatives_from_system: vector length mismatch");
  }
  if (component < 0 || component >= F.rows()) throw DimensionError("initial_derivatives_from_system: bad component");
  std::vector<double> out;
  out.push_back(u0(component));
  if (count <= 1) return out;
  Vector d = F * u0 + c;
  for (int k = 1; k < count; ++k) {
    out.push_back(d(component));
    d = F * d;
  }
  return out;
}

}  // namespace gbmred
