#pragma once

///
/// \file reduce_ode.hpp
///
/// Scalar closures of linear systems u' = F u. Every component of the
/// solution satisfies sum_i a_i u^(i) = 0 with a_i the coefficients of the
/// characteristic (or minimal) polynomial of F. Adiabatic truncation then
/// keeps the two lowest orders.
///

#include <optional>
#include <string>
#include <vector>

#include "gbmred/gbm.hpp"
#include "gbmred/linalg.hpp"

namespace gbmred {

///
/// sum_i a_i u^(i) = forcing. If an equilibrium u_inf is present the forcing
/// equals a_0 * u_inf, so the equation reads sum_i a_i (u - u_inf)^(i) = 0.
///
class ClosedOde {
 public:
  explicit ClosedOde(Polynomial coefficients, double forcing = 0.0, std::optional<double> equilibrium = std::nullopt);

  const Polynomial& coefficients() const noexcept { return coeffs_; }
  double forcing() const noexcept { return forcing_; }
  const std::optional<double>& equilibrium() const noexcept { return equilibrium_; }
  int order() const noexcept { return coeffs_.degree(); }

 private:
  Polynomial coeffs_;
  double forcing_;
  std::optional<double> equilibrium_;
};

/// u' = rate * (u - equilibrium).
struct ReducedScalarOde {
  double rate = 0.0;
  double equilibrium = 0.0;
};

struct ScalarTrajectory {
  std::vector<double> times;
  std::vector<double> values;
};

enum class ClosureKind { characteristic, minimal };

/// Homogeneous closure from char_poly(F) (or the minimal polynomial).
ClosedOde closed_ode_from_system(const Matrix& F, ClosureKind kind = ClosureKind::characteristic);

/// Closure with forcing a_0 * u_inf, the constant obtained by sending t to
/// infinity in the left-hand side.
ClosedOde closed_ode_from_system(const Matrix& F, double u_inf, ClosureKind kind = ClosureKind::characteristic);

///
/// Divides out a zero root: from sum_{i>=1} a_i u^(i) = 0 to
/// sum_{i>=1} a_i u^(i-1) = a_1 u_inf. Requires |a_0| <= 1e-10 max|a_i| and a
/// result of order >= 1.
///
ClosedOde factor_zero_root(const ClosedOde& ode, double u_inf);

/// rate = -a_0 / a_1, equilibrium carried over (forcing / a_0 when absent).
ReducedScalarOde adiabatic_truncate(const ClosedOde& ode);

/// One named stage of the large-beta simplification.
struct ChainStage {
  std::string name;
  ClosedOde ode;
};

///
/// The large-beta simplification of the third-order variance equation
///   u''' + 10 b^2 u'' + 16 (a^2 + b^4) u' + 96 a^2 b^2 (u - u_inf) = 0
/// carried out one transformation at a time. Stage names and results:
///
///   drop_third_derivative   10 b^2 u'' + 16 (a^2 + b^4) u' + 96 a^2 b^2 (u - u_inf) = 0
///   halve                   5 b^2 u'' + 8 (a^2 + b^4) u' + 48 a^2 b^2 (u - u_inf) = 0
///   drop_alpha_damping      5 b^2 u'' + 8 b^4 u' + 48 a^2 b^2 (u - u_inf) = 0
///   divide_by_beta_squared  5 u'' + 8 b^2 u' + 48 a^2 (u - u_inf) = 0
///   drop_second_derivative  8 b^2 u' + 48 a^2 (u - u_inf) = 0
///   divide_by_eight         b^2 u' + 6 a^2 (u - u_inf) = 0
///
/// The input must be of order 3 with an equilibrium.
///
std::vector<ChainStage> large_beta_chain(const ClosedOde& third_order, double alpha, double beta);

/// Remove the highest derivative term.
ClosedOde drop_highest_derivative(const ClosedOde& ode);

/// Multiply the whole equation by s != 0.
ClosedOde scale_equation(const ClosedOde& ode, double s);

/// Add delta to the coefficient of u^(order).
ClosedOde shift_coefficient(const ClosedOde& ode, int order, double delta);

/// u(t) = u_inf + (u0 - u_inf) e^{rate t}.
ScalarTrajectory solve_reduced(const ReducedScalarOde& ode, double u0, const std::vector<double>& t_grid);

///
/// Solves the closed ODE from (u(0), u'(0), ..., u^(n-1)(0)) through its
/// companion system. The companion matrix is balanced by a diagonal
/// similarity before integration.
///
ScalarTrajectory solve_closed_ode(const ClosedOde& ode, const std::vector<double>& initial_derivatives,
                                  const std::vector<double>& t_grid);

/// (u_i(0), u_i'(0), ...) for u' = F u + c from u0, up to derivative count-1.
std::vector<double> initial_derivatives_from_system(const Matrix& F, const Vector& c, const Vector& u0,
                                                    int component, int count);

}  // namespace gbmred
