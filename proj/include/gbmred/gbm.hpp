#pragma once

///
/// \file gbm.hpp
///
/// Multivariate geometric Brownian motion with additive noise,
///
///   dX = A X dt + B X dW + D dU,
///
/// where W is a scalar and U an n-dimensional Wiener process. Exact moment
/// dynamics (mean and second-moment matrix), stationary solves and an
/// Euler-Maruyama path simulator.
///
/// Second moments P = E[X X^T] are the primitive throughout; they are not
/// centered.
///

#include <algorithm>
#include <cstdint>
#include <exception>
#include <optional>
#include <random>
#include <thread>
#include <utility>
#include <vector>

#include <boost/random/normal_distribution.hpp>

#include "gbmred/linalg.hpp"

namespace gbmred {

class GbmModel {
 public:
  /// A, B, D must be square and of equal dimension n >= 1.
  GbmModel(Matrix A, Matrix B, Matrix D);

  int dim() const noexcept { return static_cast<int>(A_.rows()); }
  const Matrix& A() const noexcept { return A_; }
  const Matrix& B() const noexcept { return B_; }
  const Matrix& D() const noexcept { return D_; }

 private:
  Matrix A_, B_, D_;
};

/// Row-major stacking (P_11, P_12, ..., P_1n, P_21, ..., P_nn).
Vector vectorize(const Matrix& P);
Matrix unvectorize(const Vector& v, int n);

/// Symmetric second-moment matrix; construction rejects asymmetry above 1e-9.
class CovarianceState {
 public:
  explicit CovarianceState(Matrix P);

  const Matrix& matrix() const noexcept { return P_; }
  Vector vectorized() const { return vectorize(P_); }
  int dim() const noexcept { return static_cast<int>(P_.rows()); }

 private:
  Matrix P_;
};

/// Sampled solution of a vector ODE.
struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> values;

  /// Component `i` of every sample.
  std::vector<double> component(int i) const;
};

using MeanTrajectory = Trajectory;

Vector mean_rhs(const GbmModel& model, const Vector& m);

/// A P + P A^T + B P B^T + D D^T.
Matrix covariance_rhs(const GbmModel& model, const CovarianceState& P);

/// H = A (x) I + I (x) A + B (x) B, so that vec(dP/dt) = H vec(P) + vec(D D^T)
/// under row-major stacking.
Matrix build_vectorized_drift(const GbmModel& model);

/// vec(D D^T).
Vector vectorized_forcing(const GbmModel& model);

///
/// Restriction of a vectorized drift H (n^2 x n^2) to the listed entries of
/// a symmetric P. Each listed (i,j) contributes the row of P_ij; its column
/// folds in the column of P_ji when i != j, since both hold the same value.
///
Matrix symmetric_block(const Matrix& H, int n, const std::vector<std::pair<int, int>>& entries);

/// u' = F u + c sampled on `t_grid` (strictly increasing, starting at 0),
/// classical RK4 with substep h per interval chosen so that ||F||_inf h <= 0.02.
Trajectory integrate_linear_ode(const Matrix& F, const Vector& c, const Vector& u0,
                                const std::vector<double>& t_grid);

/// n+1 evenly spaced points on [0, t_max].
std::vector<double> uniform_grid(double t_max, int n_points);

/// Mean trajectory e^{At} m0 on the grid.
MeanTrajectory mean_trajectory(const GbmModel& model, const Vector& m0, const std::vector<double>& t_grid);

/// Second-moment trajectory from P0 on the grid (integrates the vectorized system).
std::vector<CovarianceState> covariance_trajectory(const GbmModel& model, const CovarianceState& P0,
                                                   const std::vector<double>& t_grid);

/// Affine constraint sum_ij weights_ij P_ij = value.
struct Normalization {
  Matrix weights;
  double value = 0.0;

  static Normalization trace(int n, double value);
};

///
/// Fixed point of the second-moment flow, A P + P A^T + B P B^T + D D^T = 0.
///
/// Nonsingular H: direct solve. Singular H needs a normalization row, which is
/// appended to the vectorized system and solved by minimum-norm least
/// squares. Singular H without normalization throws SingularSystemError whose
/// nullity() is the nullspace dimension.
///
CovarianceState stationary_covariance(const GbmModel& model,
                                      const std::optional<Normalization>& normalization = std::nullopt);

struct SimulationOptions {
  double dt = 1e-3;
  double t_max = 1.0;
  int n_paths = 1000;
  std::uint64_t seed = 0;
  /// Keep every `record_every`-th step (the initial state is always kept).
  int record_every = 1;
  /// Index of the first path. Path p draws from the stream of
  /// first_path + p, so an ensemble may be produced in batches.
  std::uint64_t first_path = 0;
};

///
/// Ensemble of simulated paths. states[(path * n_times + k) * dim + i] holds
/// component i of `path` at times[k].
///
struct PathEnsemble {
  int n_paths = 0;
  int dim = 0;
  double dt = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> times;
  std::vector<double> states;

  std::size_t n_times() const noexcept { return times.size(); }
  double at(int path, std::size_t k, int i) const {
    return states[(static_cast<std::size_t>(path) * times.size() + k) * dim + i];
  }
};

/// Number of Euler steps for a (dt, t_max) pair; throws DomainError if dt <= 0 or t_max < dt.
long long step_count(double dt, double t_max);

/// Recorded times for a step count and recording stride.
std::vector<double> recorded_times(double dt, long long n_steps, int record_every);

///
/// Per-path random stream. Streams depend only on (seed, path index), so an
/// ensemble does not depend on the order in which paths are run.
///
class PathRng {
 public:
  PathRng(std::uint64_t seed, std::uint64_t path);
  /// Standard normal variate.
  double normal() { return normal_(engine_); }

 private:
  std::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_;
};

///
/// Euler-Maruyama in the Ito sense:
///   X_{k+1} = X_k + A X_k dt + B X_k dW + D dU,
/// dW ~ N(0, dt) scalar, dU ~ N(0, dt I_n). Draws for dU are skipped when D = 0.
///
PathEnsemble simulate_paths(const GbmModel& model, const Vector& x0, const SimulationOptions& opts);

///
/// Runs body(path) for path in [0, n_paths) on up to hardware_concurrency
/// threads with static contiguous chunks. If any call throws, the exception
/// from the lowest-numbered failing chunk is rethrown after all threads join.
///
template <class Body>
void parallel_for_paths(int n_paths, Body&& body) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const int workers = static_cast<int>(std::min<long long>(hw, std::max(1, n_paths / 64)));
  if (workers <= 1) {
    for (int p = 0; p < n_paths; ++p) body(p);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    const int lo = static_cast<int>(static_cast<long long>(n_paths) * w / workers);
    const int hi = static_cast<int>(static_cast<long long>(n_paths) * (w + 1) / workers);
    pool.emplace_back([&, w, lo, hi] {
      try {
        for (int p = lo; p < hi; ++p) body(p);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Record indices 0, r, 2r, ... plus the final step.
std::vector<long long> recorded_steps(long long n_steps, int record_every);

/// Sample statistics per recorded time.
struct EmpiricalMoments {
  MeanTrajectory mean;
  std::vector<CovarianceState> second_moment;
  /// Standard errors of the mean and of each second-moment entry.
  std::vector<Vector> mean_std_error;
  std::vector<Matrix> second_moment_std_error;
};

/// Sample mean and (uncentered) sample second moment E[X X^T] per time.
EmpiricalMoments empirical_moments(const PathEnsemble& ensemble);

/// Running sums for empirical_moments over several batches on one time grid.
class MomentAccumulator {
 public:
  void add(const PathEnsemble& batch);
  long long count() const noexcept { return count_; }
  EmpiricalMoments result() const;

 private:
  std::vector<double> times_;
  int dim_ = 0;
  long long count_ = 0;
  std::vector<Vector> s1_, s1sq_;
  std::vector<Matrix> s2_, s2sq_;
};

}  // namespace gbmred
