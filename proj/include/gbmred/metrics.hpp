#pragma once

///
/// \file metrics.hpp
///
/// Bounds on the squared 2-Wasserstein distance from first and second
/// moments:
///
///   |m - m'|^2 + tr[S + S' - 2 (S^{1/2} S' S^{1/2})^{1/2}]  <=  W2^2
///   W2^2  <=  |m - m'|^2 + tr[S + S' + 2 (S^{1/2} S' S^{1/2})^{1/2}]
///
/// The lower bound is exact for Gaussian pairs.
///

#include <vector>

#include "gbmred/linalg.hpp"
#include "gbmred/reduce_ode.hpp"

namespace gbmred {

/// Mean and centered covariance.
struct MomentPair {
  Vector m;
  Matrix Sigma;
};

struct W2Bounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Throws DimensionError on mismatched shapes and DomainError when a
/// covariance is asymmetric or indefinite beyond 1e-9.
W2Bounds w2_bounds(const MomentPair& p, const MomentPair& q);

struct ReductionErrorReport {
  std::vector<double> times;
  std::vector<W2Bounds> bounds;
  double sup_lower = 0.0;
  double sup_upper = 0.0;
};

///
/// Scalar full and reduced trajectories of the mean and uncentered second
/// moment on one grid. Centered variances p - m^2 in [-1e-9, 0) are set to
/// 0; more negative values throw DomainError.
///
struct ScalarMoments {
  std::vector<double> times;
  std::vector<double> mean;
  std::vector<double> second_moment;
};

ReductionErrorReport reduction_error_report(const ScalarMoments& full, const ScalarMoments& reduced);

/// General form on trajectories of MomentPair (already centered).
ReductionErrorReport reduction_error_report(const std::vector<double>& times, const std::vector<MomentPair>& full,
                                            const std::vector<MomentPair>& reduced);

}  // namespace gbmred
