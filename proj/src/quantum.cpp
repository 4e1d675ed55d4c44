#include "gbmred/quantum.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace gbmred {

GbmModel quantum_gbm(double alpha, double beta) {
  if (!std::isfinite(alpha) || !std::isfinite(beta) || beta < 0.0) {
    throw DomainError("quantum_gbm: need finite alpha and beta >= 0");
  }
  const double b2 = beta * beta;
  Matrix A(3, 3), B(3, 3);
  A << -2 * b2, 0, 0,
       0, -2 * b2, -2 * alpha,
       0, 2 * alpha, 0;
  B << 0, -2 * beta, 0,
       2 * beta, 0, 0,
       0, 0, 0;
  return GbmModel(A, B, Matrix::Zero(3, 3));
}

AnalyticMeanParams AnalyticMeanParams::from(double alpha, double beta) {
  AnalyticMeanParams p;
  p.alpha = alpha;
  p.beta = beta;
  const double b4 = beta * beta * beta * beta;
  const double disc = 4 * alpha * alpha - b4;
  if (disc == 0.0) {
    throw DomainError("analytic_mean: beta^2 = 2|alpha| is degenerate (omega = 0); integrate the mean ODE instead");
  }
  p.omega = std::sqrt(std::abs(disc));
  p.regime = disc > 0 ? MeanRegime::oscillatory : MeanRegime::overdamped;
  return p;
}

double AnalyticMeanParams::c1(const Vector& x0) const {
  return -(beta * beta * x0(1) + 2 * alpha * x0(2)) / omega;
}

double AnalyticMeanParams::c2(const Vector& x0) const {
  return (beta * beta * x0(2) + 2 * alpha * x0(1)) / omega;
}

Vector analytic_mean(const AnalyticMeanParams& params, const Vector& x0, double t) {
  if (x0.size() != 3) throw DimensionError("analytic_mean: x0 must have length 3");
  if (!(params.omega > 0.0)) throw DomainError("analytic_mean: omega must be positive");
  const double b2 = params.beta * params.beta;
  const double wt = params.omega * t;
  const bool osc = params.regime == MeanRegime::oscillatory;
  const double c = osc ? std::cos(wt) : std::cosh(wt);
  const double s = osc ? std::sin(wt) : std::sinh(wt);
  const double damp = std::exp(-b2 * t);
  Vector m(3);
  m(0) = std::exp(-2 * b2 * t) * x0(0);
  m(1) = damp * (x0(1) * c + params.c1(x0) * s);
  m(2) = damp * (x0(2) * c + params.c2(x0) * s);
  return m;
}

Matrix mean_subsystem_matrix(double alpha, double beta, double epsilon) {
  const double ea = epsilon * alpha;
  Matrix Q(2, 2);
  Q << -2 * beta * beta, -2 * ea,
       2 * ea, 0;
  return Q;
}

Matrix covariance_system_matrix(double alpha, double beta, double epsilon) {
  const double b2 = beta * beta;
  const double ea = epsilon * alpha;
  Matrix M(4, 4);
  M << -4 * b2, 4 * b2, 0, 0,
       4 * b2, -4 * b2, -4 * ea, 0,
       0, 2 * ea, -2 * b2, -2 * ea,
       0, 0, 4 * ea, 0;
  return M;
}

Matrix cross_covariance_matrix(double alpha, double beta) {
  const double b2 = beta * beta;
  Matrix C(2, 2);
  C << -8 * b2, -2 * alpha,
       2 * alpha, -2 * b2;
  return C;
}

std::vector<std::pair<int, int>> covariance_entries() { return {{0, 0}, {1, 1}, {1, 2}, {2, 2}}; }

std::vector<std::pair<int, int>> cross_covariance_entries() { return {{0, 1}, {0, 2}}; }

ClosedOde pzz_exact_third_order(double alpha, double beta) {
  const double a2 = alpha * alpha, b2 = beta * beta;
  Polynomial p({96 * a2 * b2, 16 * (a2 + b2 * b2), 10 * b2, 1.0});
  return ClosedOde(std::move(p), 32 * a2 * b2, 1.0 / 3.0);
}

Vector from_spherical(double theta, double phi) {
  Vector x(3);
  x << std::cos(theta) * std::cos(phi), std::cos(theta) * std::sin(phi), std::sin(theta);
  return x;
}

namespace {

PathEnsemble make_ensemble(const SimulationOptions& opts, std::vector<long long>& rec) {
  if (opts.n_paths < 1) throw DomainError("simulation: n_paths must be >= 1");
  const long long n_steps = step_count(opts.dt, opts.t_max);
  rec = recorded_steps(n_steps, opts.record_every);
  PathEnsemble ens;
  ens.n_paths = opts.n_paths;
  ens.dim = 3;
  ens.dt = opts.dt;
  ens.seed = opts.seed;
  ens.times = recorded_times(opts.dt, n_steps, opts.record_every);
  ens.states.resize(static_cast<std::size_t>(opts.n_paths) * rec.size() * 3);
  return ens;
}

}  // namespace

PathEnsemble simulate_spherical(double alpha, double beta, double theta0, double phi0,
                                const SimulationOptions& opts) {
  constexpr double pole = std::numbers::pi / 2 - 1e-6;
  constexpr double two_pi = 2 * std::numbers::pi;
  if (!std::isfinite(theta0) || !std::isfinite(phi0)) throw DomainError("simulate_spherical: non-finite angles");
  if (std::abs(theta0) > pole) {
    throw DomainError("simulate_spherical: theta0 lies within 1e-6 of a pole, where tan(theta) is singular");
  }
  std::vector<long long> rec;
  PathEnsemble ens = make_ensemble(opts, rec);
  const double dt = opts.dt, sdt = std::sqrt(dt);

  parallel_for_paths(opts.n_paths, [&](int path) {
    PathRng rng(opts.seed, opts.first_path + static_cast<std::uint64_t>(path));
    double theta = theta0;
    double phi = std::fmod(phi0, two_pi);
    if (phi < 0) phi += two_pi;
    double* out = ens.states.data() + static_cast<std::size_t>(path) * rec.size() * 3;
    std::size_t r = 0;
    for (long long k = 0;; ++k) {
      if (k == rec[r]) {
        const double ct = std::cos(theta);
        out[3 * r] = ct * std::cos(phi);
        out[3 * r + 1] = ct * std::sin(phi);
        out[3 * r + 2] = std::sin(theta);
        if (++r == rec.size()) break;
      }
      const double dw = sdt * rng.normal();
      const double next_theta = theta + 2 * alpha * std::sin(phi) * dt;
      phi += 2 * beta * dw - 2 * alpha * std::tan(theta) * std::cos(phi) * dt;
      theta = next_theta;
      if (phi < 0 || phi >= two_pi) {
        phi = std::fmod(phi, two_pi);
        if (phi < 0) phi += two_pi;
      }
      if (std::abs(theta) > pole) {
        std::ostringstream os;
        os << "simulate_spherical: path " << path << " reached |theta| = " << std::abs(theta) << " at t = "
           << static_cast<double>(k + 1) * dt << ", within 1e-6 of a pole";
        throw DomainError(os.str());
      }
    }
  });
  return ens;
}

PathEnsemble simulate_spin_conserving(double alpha, double beta, double y0, double z0,
                                      const SimulationOptions& opts) {
  if (!std::isfinite(y0) || !std::isfinite(z0) || y0 * y0 + z0 * z0 > 1.0 + 1e-6) {
    throw DomainError("simulate_spin_conserving: need y0^2 + z0^2 <= 1");
  }
  std::vector<long long> rec;
  PathEnsemble ens = make_ensemble(opts, rec);
  const double dt = opts.dt, sdt = std::sqrt(dt), b2 = beta * beta;

  parallel_for_paths(opts.n_paths, [&](int path) {
    PathRng rng(opts.seed, opts.first_path + static_cast<std::uint64_t>(path));
    double y = y0, z = z0;
    double* out = ens.states.data() + static_cast<std::size_t>(path) * rec.size() * 3;
    std::size_t r = 0;
    for (long long k = 0;; ++k) {
      const double rad = std::max(0.0, 1.0 - y * y - z * z);
      const double x = std::sqrt(rad);
      if (k == rec[r]) {
        out[3 * r] = x;
        out[3 * r + 1] = y;
        out[3 * r + 2] = z;
        if (++r == rec.size()) break;
      }
      const double dw = sdt * rng.normal();
      const double next_y = y + (-2 * b2 * y - 2 * alpha * z) * dt + 2 * beta * x * dw;
      z += 2 * alpha * y * dt;
      y = next_y;
      if (!(y * y + z * z <= 1.5)) {
        std::ostringstream os;
        os << "simulate_spin_conserving: path " << path << " left the unit disk (y^2 + z^2 = " << y * y + z * z
           << ") at t = " << static_cast<double>(k + 1) * dt << "; dt is too large for the scheme";
        throw DomainError(os.str());
      }
    }
  });
  return ens;
}

const std::vector<QuantumPreset>& quantum_presets() {
  static const std::vector<QuantumPreset> presets = {
      {"fig1-left", 0.5, std::sqrt(2.0), std::nullopt, 20.0},
      {"fig1-right", 0.5, 10.0, std::nullopt, 2000.0},
      {"fig3-left", 0.5, 1.0, 0.5, 20.0},
      {"fig3-right", 0.5, 1.0, 0.01, 2000.0},
  };
  return presets;
}

QuantumPreset find_preset(const std::string& name) {
  for (const auto& p : quantum_presets()) {
    if (p.name == name) return p;
  }
  throw DomainError("unknown preset '" + name + "' (known: fig1-left, fig1-right, fig3-left, fig3-right)");
}

}  // namespace gbmred
