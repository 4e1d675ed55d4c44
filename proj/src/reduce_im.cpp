#include "gbmred/reduce_im.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include <Eigen/LU>
#include <Eigen/SVD>

namespace gbmred {

void QuantumParams::validate() const {
  if (!std::isfinite(alpha) || alpha == 0.0) throw DomainError("QuantumParams: alpha must be finite and nonzero");
  if (!std::isfinite(beta) || !(beta > 0.0)) throw DomainError("QuantumParams: beta must be positive");
  if (!std::isfinite(epsilon) || !(epsilon > 0.0) || epsilon > 1.0) {
    throw DomainError("QuantumParams: epsilon must lie in (0, 1]");
  }
}

const char* to_string(Branch b) {
  switch (b) {
    case Branch::plus: return "plus";
    case Branch::minus: return "minus";
    case Branch::physical: return "physical";
    case Branch::trivial: return "trivial";
  }
  return "unknown";
}

std::pair<Matrix, Matrix> rescaled_matrices(const QuantumParams& p) {
  p.validate();
  const double b2 = p.beta * p.beta;
  const double ea = p.epsilon * p.alpha;
  Matrix Q(2, 2);
  Q << -2 * b2, -2 * ea,
       2 * ea, 0;
  Matrix M(4, 4);
  M << -4 * b2, 4 * b2, 0, 0,
       4 * b2, -4 * b2, -4 * ea, 0,
       0, 2 * ea, -2 * b2, -2 * ea,
       0, 0, 4 * ea, 0;
  return {Q, M};
}

double ie1_residual(const QuantumParams& p, double a) {
  const double ea = p.epsilon * p.alpha;
  return ea * a * a + p.beta * p.beta * a + ea;
}

std::pair<InvarianceSolution, InvarianceSolution> solve_ie_deterministic(const QuantumParams& p) {
  p.validate();
  const double b2 = p.beta * p.beta;
  const double ea = p.epsilon * p.alpha;
  const double eps_det = b2 / (2 * std::abs(p.alpha));
  const double disc = b2 * b2 - 4 * ea * ea;
  if (p.epsilon > eps_det || disc < 0.0) {
    std::ostringstream os;
    os << "solve_ie_deterministic: epsilon = " << p.epsilon << " exceeds eps_c' = " << eps_det
       << ", the invariance roots are complex";
    throw CriticalParameterError(os.str(), eps_det);
  }
  const double root = std::sqrt(std::max(0.0, disc));
  // a_+ a_- = 1.
  const double a_plus = -2 * ea / (b2 + root);
  const double a_minus = 1.0 / a_plus;
  InvarianceSolution plus{{a_plus}, 2 * ea * a_plus, Branch::physical};
  InvarianceSolution minus{{a_minus}, 2 * ea * a_minus, Branch::minus};
  return {plus, minus};
}

ReducedScalarOde reduced_mean_dynamics(const QuantumParams& p) {
  const auto roots = solve_ie_deterministic(p);
  return ReducedScalarOde{roots.first.xi, 0.0};
}

ReducedScalarOde reduced_mean_dynamics_slow(const QuantumParams& p) {
  ReducedScalarOde r = reduced_mean_dynamics(p);
  r.rate /= p.epsilon;
  return r;
}

std::array<double, 3> ie2_residuals(const QuantumParams& p, const std::array<double, 3>& a) {
  const double b = p.beta * p.beta;
  const double e = p.epsilon * p.alpha;
  const auto [a1, a2, a3] = a;
  return {-4 * b * a1 + 4 * b * a2 - 4 * e * a1 * a3,
          4 * b * a1 - 4 * b * a2 - 4 * e * a3 - 4 * e * a2 * a3,
          2 * e * a2 - 2 * b * a3 - 2 * e - 4 * e * a3 * a3};
}

namespace {

using Coeffs = std::vector<double>;

Coeffs poly_mul(const Coeffs& u, const Coeffs& v) {
  Coeffs w(u.size() + v.size() - 1, 0.0);
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) w[i + j] += u[i] * v[j];
  return w;
}

Coeffs poly_add(Coeffs u, const Coeffs& v, double s = 1.0) {
  if (v.size() > u.size()) u.resize(v.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) u[i] += s * v[i];
  return u;
}

double horner(const Coeffs& c, double x) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Eigen::Matrix3d ie2_jacobian(const QuantumParams& p, const std::array<double, 3>& a) {
  const double b = p.beta * p.beta;
  const double e = p.epsilon * p.alpha;
  const auto [a1, a2, a3] = a;
  Eigen::Matrix3d J;
  J << -4 * b - 4 * e * a3, 4 * b, -4 * e * a1,
       4 * b, -4 * b - 4 * e * a3, -4 * e - 4 * e * a2,
       0, 2 * e, -2 * b - 8 * e * a3;
  return J;
}

double residual_norm(const std::array<double, 3>& r) {
  return std::max({std::abs(r[0]), std::abs(r[1]), std::abs(r[2])});
}

struct NewtonResult {
  bool converged = false;
  std::array<double, 3> a{};
  double condition = 0.0;
};

NewtonResult newton_ie2(const QuantumParams& p, std::array<double, 3> a) {
  NewtonResult out;
  for (int it = 0; it < 40; ++it) {
    const auto r = ie2_residuals(p, a);
    const Eigen::Matrix3d J = ie2_jacobian(p, a);
    if (residual_norm(r) <= 1e-13) {
      const Matrix Jd = J;
      Eigen::JacobiSVD<Matrix> svd(Jd);
      const auto& sv = svd.singularValues();
      out.condition = sv(2) > 0 ? sv(0) / sv(2) : std::numeric_limits<double>::infinity();
      out.converged = true;
      out.a = a;
      return out;
    }
    const Eigen::Vector3d delta = J.fullPivLu().solve(Eigen::Vector3d(r[0], r[1], r[2]));
    if (!delta.allFinite()) return out;
    for (int i = 0; i < 3; ++i) a[i] -= delta(i);
  }
  return out;
}

// The second-largest real eigenvalue of M_eps (the largest is the conserved
// zero mode), or nothing when the spectrum has a complex pair.
std::optional<double> slow_eigenvalue(const QuantumParams& p) {
  const Matrix M = rescaled_matrices(p).second;
  Spectrum spec;
  try {
    spec = eigenvalues(M);
  } catch (const NumericalError&) {
    return std::nullopt;
  }
  if (has_complex_pair(spec)) return std::nullopt;
  return spec[1].real();
}

bool on_slow_branch(const QuantumParams& p, const std::array<double, 3>& a) {
  const auto slow = slow_eigenvalue(p);
  if (!slow) return false;
  const double xi = 4 * p.epsilon * p.alpha * a[2];
  return std::abs(xi - *slow) <= 1e-7 * std::max(1.0, std::abs(*slow));
}

struct Continuation {
  std::optional<std::array<double, 3>> solution;
  double last_good = 0.0;
  std::string failure;
};

Continuation continue_branch(double alpha, double beta, double target) {
  QuantumParams q{alpha, beta, std::min(target, 1e-3)};
  Continuation out;

  // Seed at small eps, cross-checked against the elimination roots.
  const auto exact = ie2_real_solutions(q);
  const NewtonResult seed = newton_ie2(q, chapman_enskog_seed(q));
  if (!seed.converged || exact.size() < 2) {
    out.failure = "Newton iteration from the Chapman-Enskog seed did not converge";
    return out;
  }
  const auto& phys = exact[1];
  const double dev = std::max({std::abs(seed.a[0] - phys[0]), std::abs(seed.a[1] - phys[1]),
                               std::abs(seed.a[2] - phys[2])});
  if (dev > 1e-8) {
    out.failure = "Chapman-Enskog seed converged to a root other than the slow elimination root";
    return out;
  }

  std::array<double, 3> a = seed.a, a_prev = seed.a;
  double eps = q.epsilon, eps_prev = eps;
  out.last_good = eps;
  double step = eps;
  while (eps < target) {
    const double trial = std::min(target, eps + step);
    // Secant predictor.
    std::array<double, 3> guess = a;
    if (eps > eps_prev) {
      const double s = (trial - eps) / (eps - eps_prev);
      for (int i = 0; i < 3; ++i) guess[i] = a[i] + s * (a[i] - a_prev[i]);
    }
    QuantumParams t{alpha, beta, trial};
    const NewtonResult nr = newton_ie2(t, guess);
    const bool ok = nr.converged && nr.condition <= 1e12 && on_slow_branch(t, nr.a);
    if (ok) {
      a_prev = a;
      eps_prev = eps;
      a = nr.a;
      eps = trial;
      out.last_good = eps;
      step = std::min(step * 1.5, 0.05);
    } else {
      step *= 0.5;
      if (step < 1e-6) {
        std::ostringstream os;
        os << "continuation stalled at eps = " << eps;
        if (nr.converged && nr.condition > 1e12) os << " (Jacobian condition " << nr.condition << ")";
        out.failure = os.str();
        return out;
      }
    }
  }
  out.solution = a;
  return out;
}

}  // namespace

std::vector<std::array<double, 3>> ie2_real_solutions(const QuantumParams& p) {
  p.validate();
  const double b = p.beta * p.beta;
  const double e = p.epsilon * p.alpha;
  const Coeffs a2 = {1.0, b / e, 2.0};
  const Coeffs denom = {b, e};  // b + e a3
  const Coeffs a3 = {0.0, 1.0};
  // (b + e a3) * row2 with a1 = b a2 / (b + e a3).
  Coeffs inner = poly_add(poly_add(poly_mul({4 * b}, a2), poly_mul({4 * e}, a3)), poly_mul({4 * e}, poly_mul(a2, a3)));
  Coeffs quartic = poly_add(poly_mul({4 * b * b}, a2), poly_mul(inner, denom), -1.0);
  while (quartic.size() > 1 && quartic.back() == 0.0) quartic.pop_back();

  const int n = static_cast<int>(quartic.size()) - 1;
  Matrix C = Matrix::Zero(n, n);
  for (int k = 0; k + 1 < n; ++k) C(k + 1, k) = 1.0;
  for (int k = 0; k < n; ++k) C(k, n - 1) = -quartic[k] / quartic[n];

  Coeffs dq(quartic.size() - 1);
  for (std::size_t k = 1; k < quartic.size(); ++k) dq[k - 1] = k * quartic[k];

  std::vector<std::array<double, 3>> out;
  for (const Complex& z : eigenvalues(C)) {
    if (std::abs(z.imag()) > 1e-8 * std::max(1.0, std::abs(z))) continue;
    double r = z.real();
    for (int it = 0; it < 5; ++it) {
      const double d = horner(dq, r);
      if (d == 0.0) break;
      r -= horner(quartic, r) / d;
    }
    if (std::abs(r) < 1e-14) r = 0.0;
    const double den = b + e * r;
    if (den == 0.0) continue;
    const double v2 = horner(a2, r);
    out.push_back({b * v2 / den, v2, r});
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return std::abs(x[2]) < std::abs(y[2]); });
  return out;
}

std::array<double, 3> chapman_enskog_seed(const QuantumParams& p) {
  return {-0.5, -0.5, -3 * p.alpha * p.epsilon / (2 * p.beta * p.beta)};
}

InvarianceSolution solve_ie_covariance(const QuantumParams& p) {
  p.validate();
  const Continuation c = continue_branch(p.alpha, p.beta, p.epsilon);
  if (!c.solution) {
    std::ostringstream os;
    os << "solve_ie_covariance: physical branch lost before epsilon = " << p.epsilon << " (" << c.failure
       << "); last resolved epsilon = " << c.last_good;
    throw BranchLostError(os.str(), c.last_good);
  }
  const auto& a = *c.solution;
  return InvarianceSolution{{a[0], a[1], a[2]}, 4 * p.epsilon * p.alpha * a[2], Branch::physical};
}

ReducedScalarOde reduced_variance_dynamics(const QuantumParams& p) {
  return ReducedScalarOde{solve_ie_covariance(p).xi, 1.0 / 3.0};
}

ReducedScalarOde reduced_variance_dynamics_slow(const QuantumParams& p) {
  ReducedScalarOde r = reduced_variance_dynamics(p);
  r.rate /= p.epsilon;
  return r;
}

bool covariance_spectrum_complex(double alpha, double beta, double epsilon) {
  const double b2 = beta * beta;
  const double ea = epsilon * alpha;
  Matrix M(4, 4);
  M << -4 * b2, 4 * b2, 0, 0,
       4 * b2, -4 * b2, -4 * ea, 0,
       0, 2 * ea, -2 * b2, -2 * ea,
       0, 0, 4 * ea, 0;
  return has_complex_pair(eigenvalues(M));
}

CriticalEpsilons critical_epsilons(double alpha, double beta) {
  if (!std::isfinite(alpha) || alpha == 0.0 || !std::isfinite(beta) || !(beta > 0.0)) {
    throw DomainError("critical_epsilons: need alpha != 0 and beta > 0");
  }
  CriticalEpsilons c;
  c.eps_det = beta * beta / (2 * std::abs(alpha));

  double lo = 1e-9, hi = 1.0;
  while (!covariance_spectrum_complex(alpha, beta, hi) && hi < 1e6) {
    lo = hi;
    hi *= 2;
  }
  if (!covariance_spectrum_complex(alpha, beta, hi)) {
    c.eps_cov = std::numeric_limits<double>::infinity();
  } else {
    while (hi - lo > 1e-6) {
      const double mid = 0.5 * (lo + hi);
      (covariance_spectrum_complex(alpha, beta, mid) ? hi : lo) = mid;
    }
    c.eps_cov = 0.5 * (lo + hi);
  }
  c.eps_usable = std::min(c.eps_det, c.eps_cov);

  const double target = std::min(c.eps_cov, 1.0);
  const Continuation cont = continue_branch(alpha, beta, target);
  c.eps_continuation = cont.last_good;
  return c;
}

EigenCheck im_eigen_check(const Matrix& P, const Vector& v) {
  require_square(P, "im_eigen_check");
  if (v.size() != P.rows()) throw DimensionError("im_eigen_check: closure length must equal the dimension");
  if (v(v.size() - 1) != 1.0) throw DomainError("im_eigen_check: closure vector must end in 1");
  const Vector Pv = P * v;
  EigenCheck out;
  out.xi = Pv(v.size() - 1);
  out.residual = (Pv - out.xi * v).norm();
  return out;
}

}  // namespace gbmred
