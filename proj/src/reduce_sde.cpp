#include "gbmred/reduce_sde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

namespace gbmred {

const char* to_string(ReductionSource s) {
  return s == ReductionSource::adiabatic ? "adiabatic" : "invariant_manifold";
}

const char* to_string(GapNorm n) { return n == GapNorm::sup ? "sup" : "l2"; }

namespace {

void require_negative_rates(double a, double b, const char* what) {
  if (!(a < 0.0) || !(b < 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    std::ostringstream os;
    os << what << ": rates must be negative (a = " << a << ", b = " << b << ")";
    throw DomainError(os.str());
  }
}

}  // namespace

GapFunction::GapFunction(double a, double b0, GapNorm norm) : a_(a), b0_(b0), norm_(norm) {
  require_negative_rates(a, b0, "GapFunction");
}

double GapFunction::operator()(double b) const { return norm_ == GapNorm::sup ? sup_gap(*this, b) : l2_gap(*this, b); }

double fdt_additive_noise(double A_bar, double B_bar, double p_inf) {
  const double bracket = 2 * A_bar + B_bar * B_bar;
  if (!(bracket < 0.0)) {
    throw DomainError("fdt_additive_noise: 2A + B^2 = " + std::to_string(bracket) +
                      " is not negative, the reduced second moment does not relax");
  }
  if (!(p_inf > 0.0)) throw DomainError("fdt_additive_noise: p_inf must be positive");
  return std::sqrt(-bracket * p_inf);
}

double sup_gap(const GapFunction& g, double b) {
  const double a = g.a();
  require_negative_rates(a, b, "sup_gap");
  if (a == b) return 0.0;
  const double r = a / b;
  return std::abs(std::pow(r, b / (b - a)) - std::pow(r, a / (b - a)));
}

double l2_gap(const GapFunction& g, double b) {
  const double a = g.a();
  require_negative_rates(a, b, "l2_gap");
  if (a == b) return 0.0;
  return std::max(0.0, -1.0 / (2 * a) + 2.0 / (a + b) - 1.0 / (2 * b));
}

double sup_gap_ratio_form(double x) {
  if (!(x > 0.0) || x == 1.0) throw DomainError("sup_gap_ratio_form: need x > 0, x != 1");
  return std::pow(x, 1.0 / (1.0 - x)) - std::pow(x, x / (1.0 - x));
}

double optimize_multiplicative_coefficient(const GapFunction& g) {
  if (!(g.a() < g.b0())) {
    std::ostringstream os;
    os << "optimize_multiplicative_coefficient: need a < b0 (target rate faster than 2A), got a = " << g.a()
       << ", b0 = " << g.b0();
    throw DomainError(os.str());
  }
  const double span = std::abs(g.b0());
  double prev = g(g.b0());
  for (int k = 1; k <= 50; ++k) {
    const double b = g.b0() + span * k / 51.0;
    const double cur = g(b);
    if (cur < prev - 1e-12 * std::max(1.0, prev)) {
      std::ostringstream os;
      os << "optimize_multiplicative_coefficient: gap decreases between b = " << g.b0() + span * (k - 1) / 51.0
         << " and b = " << b << "; B = 0 is not the minimizer";
      throw NumericalError(os.str());
    }
    prev = cur;
  }
  return 0.0;
}

ReducedModel build_reduced_model(double A_bar, double A_tilde, double p_inf, GapNorm norm, ReductionSource source) {
  if (!(A_bar < 0.0)) throw DomainError("build_reduced_model: A_bar must be negative");
  if (!(A_tilde < 0.0)) throw DomainError("build_reduced_model: A_tilde must be negative");
  if (!(p_inf > 0.0)) throw DomainError("build_reduced_model: p_inf must be positive");
  ReducedModel m;
  m.A_bar = A_bar;
  m.B_bar = optimize_multiplicative_coefficient(GapFunction(A_tilde, 2 * A_bar, norm));
  m.D_bar = fdt_additive_noise(m.A_bar, m.B_bar, p_inf);
  m.p_inf = p_inf;
  m.source = source;
  return m;
}

ScalarTrajectory reduced_second_moment(const ReducedModel& model, double p0, const std::vector<double>& t_grid) {
  if (!(p0 >= 0.0)) throw DomainError("reduced_second_moment: p0 must be nonnegative");
  ReducedScalarOde ode{model.second_moment_rate(), model.p_inf};
  return solve_reduced(ode, p0, t_grid);
}

ScalarTrajectory reduced_mean(const ReducedModel& model, double m0, const std::vector<double>& t_grid) {
  return solve_reduced(ReducedScalarOde{model.A_bar, 0.0}, m0, t_grid);
}

namespace {

struct MatchingFunctor {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  int k;
  Matrix base;  // A (x) I + I (x) A - H
  Vector h;

  int inputs() const { return 2 * k * k; }
  int values() const { return k * k * k * k + k * k; }

  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& f) const {
    const Matrix B = Eigen::Map<const Matrix>(x.data(), k, k);
    const Matrix D = Eigen::Map<const Matrix>(x.data() + k * k, k, k);
    const Matrix R = base + kron(B, B);
    const int kk = k * k;
    f.resize(values());
    f.head(kk * kk) = Eigen::Map<const Vector>(R.data(), kk * kk);
    const Vector dd = vectorize(D * D.transpose()) - h;
    f.segment(kk * kk, kk) = dd;
    return 0;
  }
};

}  // namespace

FeasibilityResult check_reduced_feasibility(const Matrix& A_bar, const Matrix& H_bar, const Vector& h_bar,
                                            double tol) {
  require_square(A_bar, "check_reduced_feasibility");
  const int k = static_cast<int>(A_bar.rows());
  if (H_bar.rows() != k * k || H_bar.cols() != k * k || h_bar.size() != k * k) {
    throw DimensionError("check_reduced_feasibility: H must be k^2 x k^2 and h of length k^2");
  }
  const Matrix I = Matrix::Identity(k, k);
  MatchingFunctor fn{k, kron(A_bar, I) + kron(I, A_bar) - H_bar, h_bar};
  Eigen::NumericalDiff<MatchingFunctor> diff(fn);

  FeasibilityResult best;
  best.residual = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> nd(0.0, 1.0);
  const double scale = std::max(1.0, std::sqrt(H_bar.cwiseAbs().maxCoeff()));
  for (int start = 0; start < 8; ++start) {
    Eigen::VectorXd x(2 * k * k);
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = start == 0 ? 0.1 : scale * nd(rng);
    Eigen::LevenbergMarquardt<Eigen::NumericalDiff<MatchingFunctor>> lm(diff);
    lm.parameters.maxfev = 4000;
    lm.parameters.xtol = 1e-14;
    lm.parameters.ftol = 1e-14;
    lm.minimize(x);
    Eigen::VectorXd f;
    fn(x, f);
    const double r = f.norm();
    if (r < best.residual) {
      best.residual = r;
      best.B = Eigen::Map<const Matrix>(x.data(), k, k);
      best.D = Eigen::Map<const Matrix>(x.data() + k * k, k, k);
    }
  }
  best.feasible = best.residual <= tol;
  return best;
}

bool ErrorBudget::holds() const {
  return sup_total <= sup_reconstruction + sup_reduction + 1e-12 * std::max(1.0, sup_total);
}

ErrorBudget error_budget(const ScalarTrajectory& p_bar, const ScalarTrajectory& p_tilde,
                         const ScalarTrajectory& p_full) {
  const std::size_t n = p_full.times.size();
  if (p_bar.times.size() != n || p_tilde.times.size() != n || p_bar.values.size() != n ||
      p_tilde.values.size() != n || p_full.values.size() != n) {
    throw DimensionError("error_budget: trajectories must share one grid");
  }
  ErrorBudget e;
  e.times = p_full.times;
  for (std::size_t i = 0; i < n; ++i) {
    if (p_bar.times[i] != p_full.times[i] || p_tilde.times[i] != p_full.times[i]) {
      throw DomainError("error_budget: time grids are not aligned");
    }
    e.reconstruction_gap.push_back(std::abs(p_bar.values[i] - p_tilde.values[i]));
    e.reduction_gap.push_back(std::abs(p_tilde.values[i] - p_full.values[i]));
    e.total_gap.push_back(std::abs(p_bar.values[i] - p_full.values[i]));
    e.sup_reconstruction = std::max(e.sup_reconstruction, e.reconstruction_gap.back());
    e.sup_reduction = std::max(e.sup_reduction, e.reduction_gap.back());
    e.sup_total = std::max(e.sup_total, e.total_gap.back());
  }
  return e;
}

}  // namespace gbmred
