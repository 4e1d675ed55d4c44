#pragma once

///
/// \file reduce_im.hpp
///
/// Invariant-manifold reduction of the rescaled two-state system
/// (beta -> beta / sqrt(eps), t -> eps t). The slow variable is m_z for the
/// means and p_zz for the second moments; the closures
///
///   m_y = a m_z                                         (IE1)
///   (p_xx, p_yy, p_yz) = (a1, a2, a3) p_zz              (IE2)
///
/// are invariant exactly when (a, 1) is an eigenvector of Q_eps, resp.
/// (a1, a2, a3, 1) an eigenvector of M_eps. The reduced rate is the matching
/// eigenvalue xi = 2 eps a * a, resp. 4 eps a * a3.
///
/// Rates are on the fast (rescaled) time scale unless the name says slow;
/// slow = fast / eps.
///

#include <array>
#include <utility>
#include <vector>

#include "gbmred/linalg.hpp"
#include "gbmred/reduce_ode.hpp"

namespace gbmred {

struct QuantumParams {
  double alpha = 0.5;
  double beta = 1.0;
  double epsilon = 1.0;

  /// Throws DomainError unless alpha != 0, beta > 0, 0 < epsilon <= 1.
  void validate() const;
};

enum class Branch { plus, minus, physical, trivial };

const char* to_string(Branch b);

struct InvarianceSolution {
  /// a (deterministic) or (a1, a2, a3) (covariance).
  std::vector<double> closure;
  double xi = 0.0;
  Branch branch = Branch::physical;
};

struct CriticalEpsilons {
  /// beta^2 / (2 |alpha|): IE1 roots turn complex above this.
  double eps_det = 0.0;
  /// Onset of a complex pair in the spectrum of M_eps (bisection, width 1e-6).
  double eps_cov = 0.0;
  double eps_usable = 0.0;
  /// Last epsilon reached by continuation of the IE2 branch.
  double eps_continuation = 0.0;
};

/// (Q_eps, M_eps).
std::pair<Matrix, Matrix> rescaled_matrices(const QuantumParams& p);

///
/// Both IE1 roots, (plus, minus). The plus root is the physical one and
/// tends to 0 with eps; it is computed as -2 eps a / (b^2 + sqrt(disc)) to
/// avoid cancellation. Throws CriticalParameterError (carrying eps_det) if
/// eps > eps_det.
///
std::pair<InvarianceSolution, InvarianceSolution> solve_ie_deterministic(const QuantumParams& p);

/// eps a x^2 + b^2 x + eps a.
double ie1_residual(const QuantumParams& p, double a);

/// rate = -(b^2 - sqrt(b^4 - 4 eps^2 a^2)), equilibrium 0.
ReducedScalarOde reduced_mean_dynamics(const QuantumParams& p);
ReducedScalarOde reduced_mean_dynamics_slow(const QuantumParams& p);

/// The three IE2 residuals at (a1, a2, a3).
std::array<double, 3> ie2_residuals(const QuantumParams& p, const std::array<double, 3>& a);

///
/// All real IE2 solutions by elimination: a2 and a1 are rational in a3, and
/// a3 solves a quartic whose roots are 0 (the trivial solution) and the
/// nonzero eigenvalues of M_eps divided by 4 eps a. Sorted by |a3|.
///
std::vector<std::array<double, 3>> ie2_real_solutions(const QuantumParams& p);

/// Chapman-Enskog leading order: (-1/2, -1/2, -3 a eps / (2 b^2)). Modes with a
/// nonzero eigenvalue carry no trace, so a1 + a2 + 1 = 0 on the branch.
std::array<double, 3> chapman_enskog_seed(const QuantumParams& p);

///
/// Physical IE2 branch at p.epsilon: Newton iteration continued in eps from
/// a Chapman-Enskog seed at small eps (the seed is checked against
/// ie2_real_solutions first). Steps are halved on failure down to 1e-6.
/// Throws BranchLostError with the last resolved eps when continuation
/// fails, the Jacobian condition number passes 1e12, or the slow eigenvalue
/// of M_eps stops being real.
///
InvarianceSolution solve_ie_covariance(const QuantumParams& p);

/// rate = 4 eps a a3*, equilibrium 1/3.
ReducedScalarOde reduced_variance_dynamics(const QuantumParams& p);
/// rate = 4 a a3*, equilibrium 1/3.
ReducedScalarOde reduced_variance_dynamics_slow(const QuantumParams& p);

/// True if M_eps has a complex conjugate pair.
bool covariance_spectrum_complex(double alpha, double beta, double epsilon);

CriticalEpsilons critical_epsilons(double alpha, double beta);

struct EigenCheck {
  double xi = 0.0;
  double residual = 0.0;
};

/// v must end in 1. xi = (P v)_last, residual = ||P v - xi v||.
EigenCheck im_eigen_check(const Matrix& P, const Vector& v);

}  // namespace gbmred
