#include "gbmred/gbm.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace gbmred {

GbmModel::GbmModel(Matrix A, Matrix B, Matrix D) : A_(std::move(A)), B_(std::move(B)), D_(std::move(D)) {
  require_square(A_, "GbmModel: A");
  require_square(B_, "GbmModel: B");
  require_square(D_, "GbmModel: D");
  if (B_.rows() != A_.rows() || D_.rows() != A_.rows()) {
    std::ostringstream os;
    os << "GbmModel: A, B, D must share one dimension (got " << A_.rows() << ", " << B_.rows() << ", "
       << D_.rows() << ")";
    throw DimensionError(os.str());
  }
  require_finite(A_, "GbmModel: A");
  require_finite(B_, "GbmModel: B");
  require_finite(D_, "GbmModel: D");
}

Vector vectorize(const Matrix& P) {
  const auto r = P.rows(), c = P.cols();
  Vector v(r * c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) v(i * c + j) = P(i, j);
  return v;
}

Matrix unvectorize(const Vector& v, int n) {
  if (n < 1 || v.size() != static_cast<Eigen::Index>(n) * n) {
    throw DimensionError("unvectorize: length " + std::to_string(v.size()) + " is not " + std::to_string(n) + "^2");
  }
  Matrix P(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) P(i, j) = v(i * n + j);
  return P;
}

CovarianceState::CovarianceState(Matrix P) : P_(std::move(P)) {
  require_square(P_, "CovarianceState");
  require_finite(P_, "CovarianceState");
  const double asym = (P_ - P_.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-9) {
    throw DomainError("CovarianceState: matrix is not symmetric (max |P - P^T| = " + std::to_string(asym) + ")");
  }
}

std::vector<double> Trajectory::component(int i) const {
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& v : values) {
    if (i < 0 || i >= v.size()) throw DimensionError("Trajectory::component: index out of range");
    out.push_back(v(i));
  }
  return out;
}

Vector mean_rhs(const GbmModel& model, const Vector& m) {
  if (m.size() != model.dim()) throw DimensionError("mean_rhs: state has wrong length");
  return model.A() * m;
}

Matrix covariance_rhs(const GbmModel& model, const CovarianceState& P) {
  if (P.dim() != model.dim()) throw DimensionError("covariance_rhs: P has wrong dimension");
  const Matrix& A = model.A();
  const Matrix& B = model.B();
  const Matrix& D = model.D();
  const Matrix& p = P.matrix();
  return A * p + p * A.transpose() + B * p * B.transpose() + D * D.transpose();
}

Matrix build_vectorized_drift(const GbmModel& model) {
  const Matrix I = Matrix::Identity(model.dim(), model.dim());
  return kron(model.A(), I) + kron(I, model.A()) + kron(model.B(), model.B());
}

Vector vectorized_forcing(const GbmModel& model) { return vectorize(model.D() * model.D().transpose()); }

Matrix symmetric_block(const Matrix& H, int n, const std::vector<std::pair<int, int>>& entries) {
  if (H.rows() != static_cast<Eigen::Index>(n) * n || H.cols() != H.rows()) {
    throw DimensionError("symmetric_block: H is not n^2 x n^2");
  }
  const auto k = static_cast<Eigen::Index>(entries.size());
  Matrix out(k, k);
  for (Eigen::Index r = 0; r < k; ++r) {
    const auto [ri, rj] = entries[r];
    if (ri < 0 || rj < 0 || ri >= n || rj >= n) throw DimensionError("symmetric_block: entry out of range");
    for (Eigen::Index c = 0; c < k; ++c) {
      const auto [ci, cj] = entries[c];
      double v = H(ri * n + rj, ci * n + cj);
      if (ci != cj) v += H(ri * n + rj, cj * n + ci);
      out(r, c) = v;
    }
  }
  return out;
}

Trajectory integrate_linear_ode(const Matrix& F, const Vector& c, const Vector& u0,
                                const std::vector<double>& t_grid) {
  require_square(F, "integrate_linear_ode");
  require_finite(F, "integrate_linear_ode");
  const auto n = F.rows();
  if (c.size() != n || u0.size() != n) throw DimensionError("integrate_linear_ode: vector length mismatch");
  if (t_grid.empty() || t_grid.front() != 0.0) {
    throw DomainError("integrate_linear_ode: time grid must start at 0");
  }
  for (std::size_t k = 1; k < t_grid.size(); ++k) {
    if (!(t_grid[k] > t_grid[k - 1])) throw DomainError("integrate_linear_ode: time grid must be strictly increasing");
  }

  const double fnorm = F.cwiseAbs().rowwise().sum().maxCoeff();
  const Matrix I = Matrix::Identity(n, n);

  Trajectory traj;
  traj.times = t_grid;
  traj.values.reserve(t_grid.size());
  traj.values.push_back(u0);

  // One RK4 step of u' = Fu + c is exactly u <- R u + s; m steps are the
  // m-th power of the affine map [[R, s], [0, 1]], taken by repeated squaring.
  double cached_delta = -1.0;
  Matrix G(n + 1, n + 1);
  Vector u = u0;
  Vector next(n);
  for (std::size_t k = 1; k < t_grid.size(); ++k) {
    const double delta = t_grid[k] - t_grid[k - 1];
    if (delta != cached_delta) {
      long long substeps = std::max(1LL, static_cast<long long>(std::ceil(fnorm * delta / 0.02)));
      const double h = delta / static_cast<double>(substeps);
      const Matrix hF = h * F;
      const Matrix hF2 = hF * hF;
      const Matrix hF3 = hF2 * hF;
      Matrix step = Matrix::Identity(n + 1, n + 1);
      step.topLeftCorner(n, n) = I + hF + hF2 / 2.0 + hF3 / 6.0 + hF3 * hF / 24.0;
      step.topRightCorner(n, 1) = h * ((I + hF / 2.0 + hF2 / 6.0 + hF3 / 24.0) * c);
      G = Matrix::Identity(n + 1, n + 1);
      for (; substeps > 0; substeps >>= 1) {
        if (substeps & 1) G = G * step;
        if (substeps > 1) step = step * step;
      }
      cached_delta = delta;
    }
    next.noalias() = G.topLeftCorner(n, n) * u;
    u = next + G.topRightCorner(n, 1);
    traj.values.push_back(u);
  }
  return traj;
}

std::vector<double> uniform_grid(double t_max, int n_points) {
  if (!(t_max > 0.0) || !std::isfinite(t_max)) throw DomainError("uniform_grid: t_max must be positive");
  if (n_points < 1) throw DomainError("uniform_grid: need at least one interval");
  std::vector<double> g(static_cast<std::size_t>(n_points) + 1);
  for (int k = 0; k <= n_points; ++k) g[k] = t_max * static_cast<double>(k) / n_points;
  return g;
}

MeanTrajectory mean_trajectory(const GbmModel& model, const Vector& m0, const std::vector<double>& t_grid) {
  if (m0.size() != model.dim()) throw DimensionError("mean_trajectory: m0 has wrong length");
  return integrate_linear_ode(model.A(), Vector::Zero(model.dim()), m0, t_grid);
}

std::vector<CovarianceState> covariance_trajectory(const GbmModel& model, const CovarianceState& P0,
                                                   const std::vector<double>& t_grid) {
  const int n = model.dim();
  if (P0.dim() != n) throw DimensionError("covariance_trajectory: P0 has wrong dimension");
  const Trajectory vec =
      integrate_linear_ode(build_vectorized_drift(model), vectorized_forcing(model), P0.vectorized(), t_grid);
  std::vector<CovarianceState> out;
  out.reserve(vec.values.size());
  for (const auto& v : vec.values) out.emplace_back(unvectorize(v, n));
  return out;
}

Normalization Normalization::trace(int n, double value) {
  return Normalization{Matrix::Identity(n, n), value};
}

CovarianceState stationary_covariance(const GbmModel& model, const std::optional<Normalization>& normalization) {
  const int n = model.dim();
  const Matrix H = build_vectorized_drift(model);
  const Vector f = vectorized_forcing(model);
  const int rank = numerical_rank(H);
  const int N = n * n;

  Vector p;
  if (rank == N) {
    p = solve_linear(H, -f);
  } else {
    if (!normalization) {
      throw SingularSystemError("stationary_covariance: vectorized drift is singular (nullspace dimension " +
                                    std::to_string(N - rank) + "); supply a normalization constraint",
                                rank, N);
    }
    if (normalization->weights.rows() != n || normalization->weights.cols() != n) {
      throw DimensionError("stationary_covariance: normalization weights must be n x n");
    }
    Matrix K(N + 1, N);
    K.topRows(N) = H;
    K.row(N) = vectorize(normalization->weights).transpose();
    Vector rhs(N + 1);
    rhs.head(N) = -f;
    rhs(N) = normalization->value;
    p = solve_least_squares(K, rhs);
  }

  Matrix P = unvectorize(p, n);
  P = 0.5 * (P + P.transpose());
  CovarianceState state(P);
  const double resid = covariance_rhs(model, state).norm();
  if (!(resid <= 1e-9)) {
    throw NumericalError("stationary_covariance: residual " + std::to_string(resid) +
                         " above 1e-9 (normalization inconsistent with the fixed-point equation?)");
  }
  if (normalization) {
    const double got = (normalization->weights.array() * P.array()).sum();
    if (std::abs(got - normalization->value) > 1e-9 * std::max(1.0, std::abs(normalization->value))) {
      throw NumericalError("stationary_covariance: normalization not satisfied");
    }
  }
  return state;
}

long long step_count(double dt, double t_max) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("simulation: dt must be positive and finite");
  if (!std::isfinite(t_max) || t_max < dt * (1.0 - 1e-12)) throw DomainError("simulation: need t_max >= dt");
  const double ratio = t_max / dt;
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) <= 1e-9 * ratio) return static_cast<long long>(nearest);
  return static_cast<long long>(std::ceil(ratio));
}

std::vector<long long> recorded_steps(long long n_steps, int record_every) {
  if (record_every < 1) throw DomainError("simulation: record_every must be >= 1");
  std::vector<long long> steps;
  for (long long k = 0; k <= n_steps; k += record_every) steps.push_back(k);
  if (steps.back() != n_steps) steps.push_back(n_steps);
  return steps;
}

std::vector<double> recorded_times(double dt, long long n_steps, int record_every) {
  std::vector<double> t;
  for (long long k : recorded_steps(n_steps, record_every)) t.push_back(static_cast<double>(k) * dt);
  return t;
}

PathRng::PathRng(std::uint64_t seed, std::uint64_t path) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)};
  engine_.seed(seq);
}

PathEnsemble simulate_paths(const GbmModel& model, const Vector& x0, const SimulationOptions& opts) {
  const int n = model.dim();
  if (x0.size() != n) throw DimensionError("simulate_paths: x0 has wrong length");
  require_finite(x0, "simulate_paths: x0");
  if (opts.n_paths < 1) throw DomainError("simulate_paths: n_paths must be >= 1");
  const long long n_steps = step_count(opts.dt, opts.t_max);
  const std::vector<long long> rec = recorded_steps(n_steps, opts.record_every);

  PathEnsemble ens;
  ens.n_paths = opts.n_paths;
  ens.dim = n;
  ens.dt = opts.dt;
  ens.seed = opts.seed;
  ens.times = recorded_times(opts.dt, n_steps, opts.record_every);
  ens.states.resize(static_cast<std::size_t>(opts.n_paths) * rec.size() * n);

  // Row-major copies for the scalar inner loop.
  std::vector<double> A(n * n), B(n * n), D(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      A[i * n + j] = model.A()(i, j);
      B[i * n + j] = model.B()(i, j);
      D[i * n + j] = model.D()(i, j);
    }
  const bool additive = !model.D().isZero(0.0);
  const double dt = opts.dt;
  const double sdt = std::sqrt(dt);

  parallel_for_paths(opts.n_paths, [&](int path) {
    PathRng rng(opts.seed, opts.first_path + static_cast<std::uint64_t>(path));
    std::vector<double> x(x0.data(), x0.data() + n), next(n), du(n);
    double* out = ens.states.data() + static_cast<std::size_t>(path) * rec.size() * n;
    std::size_t r = 0;
    for (long long k = 0;; ++k) {
      if (k == rec[r]) {
        std::copy(x.begin(), x.end(), out + r * n);
        if (++r == rec.size()) break;
      }
      const double dw = sdt * rng.normal();
      if (additive) {
        for (int i = 0; i < n; ++i) du[i] = sdt * rng.normal();
      }
      for (int i = 0; i < n; ++i) {
        double ax = 0.0, bx = 0.0, dd = 0.0;
        for (int j = 0; j < n; ++j) {
          ax += A[i * n + j] * x[j];
          bx += B[i * n + j] * x[j];
        }
        if (additive) {
          for (int j = 0; j < n; ++j) dd += D[i * n + j] * du[j];
        }
        next[i] = x[i] + ax * dt + bx * dw + dd;
      }
      x.swap(next);
    }
  });
  return ens;
}

void MomentAccumulator::add(const PathEnsemble& batch) {
  const int n = batch.dim;
  const int N = batch.n_paths;
  if (N < 1 || n < 1 || batch.times.empty()) throw DomainError("empirical_moments: empty ensemble");
  if (batch.states.size() != static_cast<std::size_t>(N) * batch.n_times() * n) {
    throw DimensionError("empirical_moments: state buffer size does not match the ensemble shape");
  }
  if (count_ == 0) {
    times_ = batch.times;
    dim_ = n;
    s1_.assign(times_.size(), Vector::Zero(n));
    s1sq_.assign(times_.size(), Vector::Zero(n));
    s2_.assign(times_.size(), Matrix::Zero(n, n));
    s2sq_.assign(times_.size(), Matrix::Zero(n, n));
  } else if (batch.times != times_ || n != dim_) {
    throw DimensionError("MomentAccumulator: batches must share the time grid and dimension");
  }
  for (std::size_t k = 0; k < times_.size(); ++k) {
    Vector& s1 = s1_[k];
    Vector& s1sq = s1sq_[k];
    Matrix& s2 = s2_[k];
    Matrix& s2sq = s2sq_[k];
    for (int p = 0; p < N; ++p) {
      const double* x = batch.states.data() + (static_cast<std::size_t>(p) * times_.size() + k) * n;
      for (int i = 0; i < n; ++i) {
        s1(i) += x[i];
        s1sq(i) += x[i] * x[i];
        for (int j = 0; j < n; ++j) {
          const double q = x[i] * x[j];
          s2(i, j) += q;
          s2sq(i, j) += q * q;
        }
      }
    }
  }
  count_ += N;
}

EmpiricalMoments MomentAccumulator::result() const {
  if (count_ == 0) throw DomainError("empirical_moments: empty ensemble");
  const double N = static_cast<double>(count_);
  const int n = dim_;
  EmpiricalMoments out;
  out.mean.times = times_;
  for (std::size_t k = 0; k < times_.size(); ++k) {
    const Vector m = s1_[k] / N;
    const Matrix P = s2_[k] / N;
    Vector se = Vector::Zero(n);
    Matrix se2 = Matrix::Zero(n, n);
    if (count_ > 1) {
      const double f = 1.0 / ((N - 1.0) * N);
      se = ((s1sq_[k].array() - N * m.array().square()).max(0.0) * f).sqrt();
      se2 = ((s2sq_[k].array() - N * P.array().square()).max(0.0) * f).sqrt();
    }
    out.mean.values.push_back(m);
    out.second_moment.emplace_back(0.5 * (P + P.transpose()));
    out.mean_std_error.push_back(se);
    out.second_moment_std_error.push_back(se2);
  }
  return out;
}

EmpiricalMoments empirical_moments(const PathEnsemble& ensemble) {
  MomentAccumulator acc;
  acc.add(ensemble);
  return acc.result();
}

}  // namespace gbmred
