#pragma once

///
/// \file quantum.hpp
///
/// The two-state system as a GBM on the unit sphere,
///
///   dx = -2 b^2 x dt - 2 b y dW
///   dy = -2 b^2 y dt - 2 a z dt + 2 b x dW
///   dz =  2 a y dt
///
/// with its analytic means, the second-moment systems, the exact
/// third-order p_zz closure and two alternative simulators (latitude and
/// longitude; spin-conserving (y, z)).
///

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gbmred/gbm.hpp"
#include "gbmred/reduce_ode.hpp"

namespace gbmred {

GbmModel quantum_gbm(double alpha, double beta);

enum class MeanRegime { oscillatory, overdamped };

struct AnalyticMeanParams {
  double alpha = 0.0;
  double beta = 0.0;
  MeanRegime regime = MeanRegime::overdamped;
  /// |4 a^2 - b^4|^{1/2}
  double omega = 0.0;

  /// Throws DomainError when b^2 = 2|a| (omega = 0).
  static AnalyticMeanParams from(double alpha, double beta);

  /// c1 = -(b^2 y0 + 2 a z0) / omega
  double c1(const Vector& x0) const;
  /// c2 = (b^2 z0 + 2 a y0) / omega
  double c2(const Vector& x0) const;
};

/// (E[x], E[y], E[z]) at time t from x0. cos/sin become cosh/sinh in the
/// overdamped regime.
Vector analytic_mean(const AnalyticMeanParams& params, const Vector& x0, double t);

/// Drift of (E[y], E[z]): [[-2 b^2, -2 e a], [2 e a, 0]].
Matrix mean_subsystem_matrix(double alpha, double beta, double epsilon = 1.0);

/// Drift of (p_xx, p_yy, p_yz, p_zz), with a replaced by e a.
Matrix covariance_system_matrix(double alpha, double beta, double epsilon = 1.0);

/// Drift of (p_xy, p_xz): [[-8 b^2, -2 a], [2 a, -2 b^2]].
Matrix cross_covariance_matrix(double alpha, double beta);

/// Entry lists for symmetric_block.
std::vector<std::pair<int, int>> covariance_entries();        // xx, yy, yz, zz
std::vector<std::pair<int, int>> cross_covariance_entries();  // xy, xz

/// p''' + 10 b^2 p'' + 16 (a^2 + b^4) p' + 96 a^2 b^2 p = 32 a^2 b^2.
ClosedOde pzz_exact_third_order(double alpha, double beta);

/// (x, y, z) from latitude theta and longitude phi.
Vector from_spherical(double theta, double phi);

///
/// Euler-Maruyama on
///   d theta = 2 a sin(phi) dt
///   d phi   = 2 b dW - 2 a tan(theta) cos(phi) dt,
/// stored as (x, y, z). Throws DomainError if |theta| reaches pi/2 - 1e-6,
/// at the start or during integration.
///
PathEnsemble simulate_spherical(double alpha, double beta, double theta0, double phi0,
                                const SimulationOptions& opts);

///
/// Euler-Maruyama on
///   dy = -2 b^2 y dt - 2 a z dt + 2 b sqrt(max(0, 1 - y^2 - z^2)) dW
///   dz = 2 a y dt,
/// stored as (x, y, z) with x = sqrt(max(0, 1 - y^2 - z^2)), so only the
/// (y, z) statistics are comparable with the other simulators. Euler steps
/// overshoot the unit disk by O(b sqrt(dt)) near its rim; such excursions
/// are kept as they are (the clamp switches the noise off there and the
/// drift pulls the state back). Throws DomainError for a start outside the
/// disk (tolerance 1e-6) and when y^2 + z^2 exceeds 1.5, which signals a
/// step size too large for the scheme.
///
PathEnsemble simulate_spin_conserving(double alpha, double beta, double y0, double z0,
                                      const SimulationOptions& opts);

struct QuantumPreset {
  std::string name;
  double alpha = 0.0;
  double beta = 0.0;
  std::optional<double> epsilon;
  /// Horizon that covers the relaxation to 1/3 in the figure.
  double t_max = 20.0;
};

/// fig1-left, fig1-right, fig3-left, fig3-right.
const std::vector<QuantumPreset>& quantum_presets();

/// Throws DomainError for an unknown name.
QuantumPreset find_preset(const std::string& name);

}  // namespace gbmred
