#pragma once

///
/// \file reduce_sde.hpp
///
/// Reduced scalar SDE dz = A z dt + B z dW + D du for a resolved variable.
/// Its second moment p(t) relaxes at rate 2A + B^2 to p_inf when
///
///   (2A + B^2) p_inf + D^2 = 0,
///
/// which fixes D once A, B and p_inf are chosen. A is taken from the
/// reduced mean equation and B from matching the reduced second-moment rate
/// as closely as possible in sup or L2 norm.
///

#include <string>
#include <vector>

#include "gbmred/linalg.hpp"
#include "gbmred/reduce_ode.hpp"

namespace gbmred {

enum class ReductionSource { adiabatic, invariant_manifold };
enum class GapNorm { sup, l2 };

const char* to_string(ReductionSource s);
const char* to_string(GapNorm n);

struct ReducedModel {
  double A_bar = 0.0;
  double B_bar = 0.0;
  double D_bar = 0.0;
  double p_inf = 0.0;
  ReductionSource source = ReductionSource::adiabatic;

  /// (2 A + B^2) p_inf + D^2.
  double fdt_residual() const { return (2 * A_bar + B_bar * B_bar) * p_inf + D_bar * D_bar; }
  double second_moment_rate() const { return 2 * A_bar + B_bar * B_bar; }
};

///
/// Distance between e^{a t} and e^{b t} as a function of the candidate
/// rate b, for target rate a and the smallest attainable rate b0 = 2 A.
///
class GapFunction {
 public:
  GapFunction(double a, double b0, GapNorm norm);

  double a() const noexcept { return a_; }
  double b0() const noexcept { return b0_; }
  GapNorm norm() const noexcept { return norm_; }

  /// sup_gap or l2_gap depending on the norm.
  double operator()(double b) const;

 private:
  double a_, b0_;
  GapNorm norm_;
};

/// D = sqrt(-(2 A + B^2) p_inf). Throws DomainError unless 2A + B^2 < 0 and p_inf > 0.
double fdt_additive_noise(double A_bar, double B_bar, double p_inf);

/// max_t |e^{a t} - e^{b t}| = |(a/b)^{b/(b-a)} - (a/b)^{a/(b-a)}|, 0 for a = b.
double sup_gap(const GapFunction& g, double b);

/// int_0^inf (e^{a t} - e^{b t})^2 dt = -1/(2a) + 2/(a+b) - 1/(2b).
double l2_gap(const GapFunction& g, double b);

/// x^{1/(1-x)} - x^{x/(1-x)}, the sup gap written in x = a/b.
double sup_gap_ratio_form(double x);

///
/// Returns B = 0, the minimizer over b = 2A + B^2 in [b0, 0) when a < b0.
/// The premise is checked by evaluating the gap at 50 values
/// B^2 in (0, |2A|); a decrease throws NumericalError. Throws DomainError
/// when a >= b0.
///
double optimize_multiplicative_coefficient(const GapFunction& g);

/// A = A_bar, B from the gap minimization against A_tilde, D from the FDT.
ReducedModel build_reduced_model(double A_bar, double A_tilde, double p_inf, GapNorm norm,
                                 ReductionSource source = ReductionSource::adiabatic);

/// p(t) = p_inf + (p0 - p_inf) e^{(2A + B^2) t}.
ScalarTrajectory reduced_second_moment(const ReducedModel& model, double p0, const std::vector<double>& t_grid);

/// m(t) = m0 e^{A t}.
ScalarTrajectory reduced_mean(const ReducedModel& model, double m0, const std::vector<double>& t_grid);

///
/// For k > 1 the reduced second-moment drift must have the form
/// H = A (x) I + I (x) A + B (x) B for some B, with h = vec(D D^T).
/// Minimizes the squared residual over (B, D) by Levenberg-Marquardt from
/// several starts. No claim is made that a global minimum is found.
///
struct FeasibilityResult {
  bool feasible = false;
  double residual = 0.0;
  Matrix B;
  Matrix D;
};

FeasibilityResult check_reduced_feasibility(const Matrix& A_bar, const Matrix& H_bar, const Vector& h_bar,
                                            double tol = 1e-8);

///
/// Pointwise triangle inequality
///   |p_bar - p_full| <= |p_bar - p_tilde| + |p_tilde - p_full|
/// on a shared grid, with sup-norm summaries.
///
struct ErrorBudget {
  std::vector<double> times;
  std::vector<double> reconstruction_gap;  // |p_bar - p_tilde|
  std::vector<double> reduction_gap;       // |p_tilde - p_full|
  std::vector<double> total_gap;           // |p_bar - p_full|
  double sup_reconstruction = 0.0;
  double sup_reduction = 0.0;
  double sup_total = 0.0;

  /// sup_total <= sup_reconstruction + sup_reduction (+ rounding slack).
  bool holds() const;
};

ErrorBudget error_budget(const ScalarTrajectory& p_bar, const ScalarTrajectory& p_tilde,
                         const ScalarTrajectory& p_full);

}  // namespace gbmred
