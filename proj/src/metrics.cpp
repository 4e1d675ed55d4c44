#include "gbmred/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

namespace gbmred {

namespace {

void require_psd(const Matrix& S, const char* what) {
  require_square(S, what);
  require_finite(S, what);
  if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw DomainError(std::string(what) + ": covariance is not symmetric");
  }
  const double min_ev = Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (S + S.transpose()), Eigen::EigenvaluesOnly)
                            .eigenvalues()
                            .minCoeff();
  if (min_ev < -1e-9) {
    throw DomainError(std::string(what) + ": covariance is indefinite (eigenvalue " + std::to_string(min_ev) + ")");
  }
}

double center(double second_moment, double mean) {
  const double v = second_moment - mean * mean;
  if (v < -1e-9) {
    throw DomainError("reduction_error_report: centered variance " + std::to_string(v) + " is negative");
  }
  return std::max(0.0, v);
}

}  // namespace

W2Bounds w2_bounds(const MomentPair& p, const MomentPair& q) {
  const auto n = p.m.size();
  if (q.m.size() != n || p.Sigma.rows() != n || q.Sigma.rows() != n) {
    throw DimensionError("w2_bounds: means and covariances must share one dimension");
  }
  require_psd(p.Sigma, "w2_bounds");
  require_psd(q.Sigma, "w2_bounds");
  const Matrix S = 0.5 * (p.Sigma + p.Sigma.transpose());
  const Matrix T = 0.5 * (q.Sigma + q.Sigma.transpose());
  const Matrix root = sym_matrix_sqrt(S);
  Matrix inner = root * T * root;
  inner = 0.5 * (inner + inner.transpose());
  const double cross = sym_matrix_sqrt(inner).trace();
  const double dm = (p.m - q.m).squaredNorm();
  const double base = dm + S.trace() + T.trace();
  W2Bounds b;
  b.lower = std::max(0.0, base - 2 * cross);
  b.upper = base + 2 * cross;
  return b;
}

ReductionErrorReport reduction_error_report(const std::vector<double>& times, const std::vector<MomentPair>& full,
                                            const std::vector<MomentPair>& reduced) {
  if (full.size() != times.size() || reduced.size() != times.size()) {
    throw DimensionError("reduction_error_report: trajectories and time grid differ in length");
  }
  ReductionErrorReport r;
  r.times = times;
  for (std::size_t k = 0; k < times.size(); ++k) {
    r.bounds.push_back(w2_bounds(full[k], reduced[k]));
    r.sup_lower = std::max(r.sup_lower, r.bounds.back().lower);
    r.sup_upper = std::max(r.sup_upper, r.bounds.back().upper);
  }
  return r;
}

ReductionErrorReport reduction_error_report(const ScalarMoments& full, const ScalarMoments& reduced) {
  const std::size_t n = full.times.size();
  if (full.mean.size() != n || full.second_moment.size() != n || reduced.times.size() != n ||
      reduced.mean.size() != n || reduced.second_moment.size() != n) {
    throw DimensionError("reduction_error_report: trajectories differ in length");
  }
  std::vector<MomentPair> f, g;
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(full.times[k] - reduced.times[k]) > 1e-12 * std::max(1.0, std::abs(full.times[k]))) {
      throw DomainError("reduction_error_report: time grids are not aligned");
    }
    f.push_back({Vector::Constant(1, full.mean[k]), Matrix::Constant(1, 1, center(full.second_moment[k], full.mean[k]))});
    g.push_back({Vector::Constant(1, reduced.mean[k]),
                 Matrix::Constant(1, 1, center(reduced.second_moment[k], reduced.mean[k]))});
  }
  return reduction_error_report(full.times, f, g);
}

}  // namespace gbmred
