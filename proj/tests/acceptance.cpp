// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/random/normal_distribution.hpp>

#include "gbmred/cli.hpp"
#include "gbmred/gbm.hpp"
#include "gbmred/linalg.hpp"
#include "gbmred/metrics.hpp"
#include "gbmred/quantum.hpp"
#include "gbmred/reduce_im.hpp"
#include "gbmred/reduce_ode.hpp"
#include "gbmred/reduce_sde.hpp"

using namespace gbmred;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Sup over a grid of |p_zz(full) - p_zz(reduced)| with zero initial data (X0 = e_x).
double pzz_sup_gap(double alpha, double beta, double reduced_rate, double t_max, int points) {
  const auto grid = uniform_grid(t_max, points);
  Vector p0(4);
  p0 << 1, 0, 0, 0;
  const Trajectory full = integrate_linear_ode(covariance_system_matrix(alpha, beta), Vector::Zero(4), p0, grid);
  const ScalarTrajectory red = solve_reduced({reduced_rate, 1.0 / 3.0}, 0.0, grid);
  double sup = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) sup = std::max(sup, std::abs(full.values[k](3) - red.values[k]));
  return sup;
}

Outcome criterion1() {
  const GbmModel m = quantum_gbm(0.5, 1.0);
  const CovarianceState P = stationary_covariance(m, Normalization::trace(3, 1.0));
  const double dev = (P.matrix() - Matrix::Identity(3, 3) / 3.0).cwiseAbs().maxCoeff();
  const double res = covariance_rhs(m, P).norm();
  return {dev <= 1e-9 && res <= 1e-9, "max|P - I/3| = " + fmt("%.2e", dev) + ", residual = " + fmt("%.2e", res)};
}

Outcome criterion2() {
  std::mt19937_64 g(2);
  std::uniform_real_distribution<double> ua(0.05, 3.0), ub(0.1, 4.0);
  double worst = 0.0;
  const auto rel = [](double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); };
  for (int k = 0; k < 20; ++k) {
    const double a = ua(g), b = ub(g);
    const Polynomial q = char_poly(mean_subsystem_matrix(a, b));
    worst = std::max({worst, rel(q[0], 4 * a * a), rel(q[1], 2 * b * b), rel(q[2], 1.0)});
    const Polynomial m = char_poly(covariance_system_matrix(a, b));
    worst = std::max({worst, rel(m[1], 96 * a * a * b * b), rel(m[2], 16 * (std::pow(b, 4) + a * a)),
                      rel(m[3], 10 * b * b), rel(m[4], 1.0)});
    worst = std::max(worst, std::abs(m[0]) / (96 * a * a * b * b));
  }
  return {worst <= 1e-9, "worst relative coefficient error " + fmt("%.2e", worst)};
}

Outcome criterion3() {
  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> dim(1, 4);
  const auto grid = uniform_grid(10.0, 500);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = dim(g);
    Matrix F(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) F(i, j) = 2.0 * u(g);
    const double top = eigenvalues(F).front().real();
    F -= (top + 0.1 + 0.5 * (u(g) + 1.0)) * Matrix::Identity(n, n);
    Vector u0(n);
    for (int i = 0; i < n; ++i) u0(i) = u(g);
    const Trajectory sys = integrate_linear_ode(F, Vector::Zero(n), u0, grid);
    const ClosedOde ode = closed_ode_from_system(F);
    for (int i = 0; i < n; ++i) {
      const auto d0 = initial_derivatives_from_system(F, Vector::Zero(n), u0, i, n);
      const ScalarTrajectory s = solve_closed_ode(ode, d0, grid);
      for (std::size_t k = 0; k < grid.size(); ++k) worst = std::max(worst, std::abs(s.values[k] - sys.values[k](i)));
    }
  }
  return {worst <= 1e-6, "worst sup-norm mismatch " + fmt("%.2e", worst)};
}

Outcome criterion4() {
  const double a = 0.5;
  const double b_right = 10.0, b_left = std::sqrt(2.0);
  const double right = pzz_sup_gap(a, b_right, -6 * a * a / (b_right * b_right), 2000.0, 200000);
  const double left = pzz_sup_gap(a, b_left, -6 * a * a / (b_left * b_left), 2000.0, 200000);
  return {right <= 0.02 && left >= 0.05,
          "beta^2=100: sup gap " + fmt("%.6f", right) + " (<= 0.02); beta^2=2: sup gap " + fmt("%.6f", left) +
              " (>= 0.05)"};
}

Outcome criterion5() {
  const double alpha = 0.5, beta = 1.0;
  const CriticalEpsilons c = critical_epsilons(alpha, beta);
  double worst = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double eps = c.eps_cov * k / 101.0;
    const QuantumParams p{alpha, beta, eps};
    const InvarianceSolution s = solve_ie_covariance(p);
    const double xi = 4 * eps * alpha * s.closure[2];
    double best = INFINITY;
    for (const Complex& z : eigenvalues(covariance_system_matrix(alpha, beta, eps))) {
      best = std::min(best, std::abs(z - Complex(xi, 0.0)));
    }
    worst = std::max(worst, best);
  }
  const bool ok = std::abs(c.eps_cov - 0.59185) <= 1e-3 && worst <= 1e-6;
  return {ok, "eps_c'' = " + fmt("%.8f", c.eps_cov) + ", worst eigenvalue distance " + fmt("%.2e", worst)};
}

Outcome criterion6() {
  const double alpha = 0.5, beta = 1.0;
  const auto gaps = [&](double eps, double t_max, int points, double& im_rate, double& ad_rate) {
    const QuantumParams p{alpha, beta, eps};
    im_rate = reduced_variance_dynamics_slow(p).rate;
    ad_rate = -6 * alpha * alpha * eps / (beta * beta);
    const double bs = beta / std::sqrt(eps);
    return std::pair{pzz_sup_gap(alpha, bs, im_rate, t_max, points), pzz_sup_gap(alpha, bs, ad_rate, t_max, points)};
  };
  double im5, ad5, im01, ad01;
  const auto [g_im5, g_ad5] = gaps(0.5, 20.0, 20000, im5, ad5);
  const auto [g_im01, g_ad01] = gaps(0.01, 2000.0, 200000, im01, ad01);
  const double rate_ratio = im01 / ad01;
  const bool ok = g_im5 < g_ad5 && g_im01 <= 0.01 && g_ad01 <= 0.01 && std::abs(rate_ratio - 1.0) <= 0.05;
  return {ok, "eps=0.5: IM gap " + fmt("%.6f", g_im5) + " vs adiabatic " + fmt("%.6f", g_ad5) +
                  "; eps=0.01: gaps " + fmt("%.6f", g_im01) + ", " + fmt("%.6f", g_ad01) + ", rate ratio " +
                  fmt("%.6f", rate_ratio)};
}

Outcome criterion7() {
  bool ok = true;
  std::ostringstream d;
  double worst_model = 0.0, worst_fdt = 0.0;
  for (double beta : {std::sqrt(2.0), 3.0, 10.0}) {
    const double A = -2 * 0.25 / (beta * beta);
    for (GapNorm norm : {GapNorm::sup, GapNorm::l2}) {
      const ReducedModel m = build_reduced_model(A, 3 * A, 1.0 / 3.0, norm);
      ok = ok && m.B_bar == 0.0;
      worst_model = std::max(worst_model, std::abs(m.D_bar - std::sqrt(-2 * A / 3)));
      worst_fdt = std::max(worst_fdt, std::abs(m.fdt_residual()));
    }
  }
  ok = ok && worst_model <= 1e-15 && worst_fdt <= 1e-12;

  std::mt19937_64 g(7);
  std::uniform_real_distribution<double> u(0.05, 5.0);
  double worst_sup = 0.0;
  for (int k = 0; k < 100; ++k) {
    double a = -u(g), b = -u(g);
    if (std::abs(a - b) < 1e-6) b -= 0.1;
    const double window = 12.0 / std::min(std::abs(a), std::abs(b));
    double grid_max = 0.0;
    const int n = 200000;
    for (int j = 0; j <= n; ++j) {
      const double t = window * j / n;
      grid_max = std::max(grid_max, std::abs(std::exp(a * t) - std::exp(b * t)));
    }
    worst_sup = std::max(worst_sup, std::abs(sup_gap(GapFunction(a, std::max(a, b), GapNorm::sup), b) - grid_max));
  }
  boost::math::quadrature::exp_sinh<double> integrator;
  double worst_l2 = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double a = -u(g), b = -u(g);
    const double q = integrator.integrate([&](double t) {
      const double e = std::exp(a * t) - std::exp(b * t);
      return e * e;
    });
    worst_l2 = std::max(worst_l2, std::abs(l2_gap(GapFunction(a, std::max(a, b), GapNorm::l2), b) - q));
  }
  ok = ok && worst_sup <= 1e-3 && worst_l2 <= 1e-8;
  d << "B_bar = 0, |D_bar - sqrt(-2A/3)| <= " << fmt("%.1e", worst_model) << ", FDT residual <= "
    << fmt("%.1e", worst_fdt) << ", sup-gap vs grid " << fmt("%.1e", worst_sup) << ", L2 vs quadrature "
    << fmt("%.1e", worst_l2);
  return {ok, d.str()};
}

EmpiricalMoments run_ensemble(const std::function<PathEnsemble(const SimulationOptions&)>& sim, double dt, int paths,
                              std::uint64_t seed) {
  MomentAccumulator acc;
  const int batch = 10000;
  for (int first = 0; first < paths; first += batch) {
    SimulationOptions o;
    o.dt = dt;
    o.t_max = 1.0;
    o.n_paths = std::min(batch, paths - first);
    o.seed = seed;
    o.record_every = static_cast<int>(std::lround(1.0 / dt));
    o.first_path = static_cast<std::uint64_t>(first);
    acc.add(sim(o));
  }
  return acc.result();
}

Outcome criterion8() {
  std::ostringstream d;
  bool ok = true;
  {
    const double alpha = 0.5, beta = 10.0;
    const GbmModel m = quantum_gbm(alpha, beta);
    const Vector x0 = Vector::Unit(3, 2);
    const EmpiricalMoments em =
        run_ensemble([&](const SimulationOptions& o) { return simulate_paths(m, x0, o); }, 1e-4, 100000, 1);
    const double z = em.mean.values.back()(2), z_se = em.mean_std_error.back()(2);
    const double z_ref = std::exp(-2 * alpha * alpha / (beta * beta));
    const double p = em.second_moment.back().matrix()(2, 2), p_se = em.second_moment_std_error.back()(2, 2);
    const double p_ref = covariance_trajectory(m, CovarianceState(x0 * x0.transpose()), {0.0, 1.0}).back().matrix()(2, 2);
    const double zs = std::abs(z - z_ref) / z_se, ps = std::abs(p - p_ref) / p_se;
    ok = ok && zs <= 3 && ps <= 3;
    d << "beta^2=100: E[z] off by " << fmt("%.2f", zs) << " SE, p_zz off by " << fmt("%.2f", ps) << " SE";
  }
  {
    const double alpha = 0.5, beta = 1.0, theta0 = 0.3, phi0 = 1.0;
    const Vector x0 = from_spherical(theta0, phi0);
    const GbmModel m = quantum_gbm(alpha, beta);
    const int N = 100000;
    const double dt = 1e-3;
    const EmpiricalMoments cart =
        run_ensemble([&](const SimulationOptions& o) { return simulate_paths(m, x0, o); }, dt, N, 11);
    const EmpiricalMoments sph = run_ensemble(
        [&](const SimulationOptions& o) { return simulate_spherical(alpha, beta, theta0, phi0, o); }, dt, N, 12);
    const EmpiricalMoments spin = run_ensemble(
        [&](const SimulationOptions& o) { return simulate_spin_conserving(alpha, beta, x0(1), x0(2), o); }, dt, N, 13);
    const std::vector<const EmpiricalMoments*> all{&cart, &sph, &spin};
    double worst = 0.0;
    for (std::size_t i = 0; i < all.size(); ++i)
      for (std::size_t j = i + 1; j < all.size(); ++j) {
        const auto& a = *all[i];
        const auto& b = *all[j];
        // The spin-conserving chart carries (y, z) only; its x is the nonnegative root.
        const int first = (all[j] == &spin) ? 1 : 0;
        for (int c = first; c < 3; ++c) {
          const double se = std::hypot(a.mean_std_error.back()(c), b.mean_std_error.back()(c));
          worst = std::max(worst, std::abs(a.mean.values.back()(c) - b.mean.values.back()(c)) / se);
          for (int e = first; e < 3; ++e) {
            const double se2 = std::hypot(a.second_moment_std_error.back()(c, e), b.second_moment_std_error.back()(c, e));
            if (se2 == 0.0) continue;
            worst = std::max(worst, std::abs(a.second_moment.back().matrix()(c, e) - b.second_moment.back().matrix()(c, e)) / se2);
          }
        }
      }
    ok = ok && worst <= 3;
    d << "; simulators at T=1 (theta0=0.3): worst pairwise moment gap " << fmt("%.2f", worst) << " SE";
  }
  return {ok, d.str()};
}

Outcome criterion9() {
  std::mt19937_64 g(9);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double m = u(g) - 1.5, mp = u(g) - 1.5, s = u(g), sp = u(g);
    const W2Bounds b = w2_bounds({Vector::Constant(1, m), Matrix::Constant(1, 1, s)},
                                 {Vector::Constant(1, mp), Matrix::Constant(1, 1, sp)});
    const double dm = (m - mp) * (m - mp);
    worst = std::max({worst, std::abs(b.lower - (dm + std::pow(std::sqrt(s) - std::sqrt(sp), 2))),
                      std::abs(b.upper - (dm + std::pow(std::sqrt(s) + std::sqrt(sp), 2)))});
  }
  const double m1 = 0.4, s1 = 1.5, m2 = -0.3, s2 = 0.6;
  std::mt19937_64 e(10);
  boost::random::normal_distribution<double> n1(m1, s1), n2(m2, s2);
  const int N = 1000000;
  std::vector<double> x(N), y(N);
  for (int i = 0; i < N; ++i) {
    x[i] = n1(e);
    y[i] = n2(e);
  }
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  double w2 = 0.0;
  for (int i = 0; i < N; ++i) w2 += (x[i] - y[i]) * (x[i] - y[i]);
  w2 /= N;
  const double lower = w2_bounds({Vector::Constant(1, m1), Matrix::Constant(1, 1, s1 * s1)},
                                 {Vector::Constant(1, m2), Matrix::Constant(1, 1, s2 * s2)})
                           .lower;
  const double rel = std::abs(w2 / lower - 1.0);
  return {worst <= 1e-12 && rel <= 0.01,
          "1-D closed form error " + fmt("%.1e", worst) + "; Gaussian lower bound vs sorted coupling " +
              fmt("%.3f", 100 * rel) + "%"};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

Outcome criterion10() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "gbmred_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::vector<std::vector<std::string>> cmds{
      {"moments", "--preset", "fig1-right"},
      {"reduce", "--preset", "fig3-left", "--method", "im"},
      {"compare", "--preset", "fig3-right", "--method", "adiabatic"},
      {"simulate", "--preset", "fig1-left", "--tmax", "1", "--paths", "2000", "--seed", "42", "--dump-paths"},
      {"simulate", "--preset", "fig3-left", "--tmax", "1", "--paths", "2000", "--simulator", "spin"}};
  int files = 0;
  bool ok = true;
  std::ostringstream sink;
  for (const auto& c : cmds) {
    for (const char* tag : {"a", "b"}) {
      auto args = c;
      args.insert(args.end(), {"--out", (dir / tag).string()});
      if (cli::run(args, sink, sink) != 0) ok = false;
    }
    for (const auto& entry : fs::directory_iterator(dir)) {
      const std::string name = entry.path().filename().string();
      if (name.rfind("a_", 0) != 0) continue;
      ++files;
      if (slurp(entry.path()) != slurp(dir / ("b_" + name.substr(2)))) ok = false;
    }
    for (const auto& entry : fs::directory_iterator(dir)) fs::remove(entry.path());
  }
  fs::remove_all(dir);
  return {ok && files > 0, std::to_string(files) + " output files compared across repeated runs"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    Outcome (*run)();
  };
  const std::vector<Criterion> criteria{
      {1, "stationary covariance", 1, criterion1},     {2, "characteristic polynomials", 1, criterion2},
      {3, "Cayley-Hamilton closure", 30, criterion3},  {4, "adiabatic variance gap", 10, criterion4},
      {5, "critical epsilon", 30, criterion5},      {6, "invariant manifold vs adiabatic", 10, criterion6},
      {7, "reduced SDE", 30, criterion7},              {8, "Monte Carlo consistency", 300, criterion8},
      {9, "Wasserstein bounds", 60, criterion9},       {10, "determinism", 600, criterion10}};
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = s <= c.budget_s;
    const bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    std::printf("%s criterion %d (%s): %s [%.2f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), s,
                in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
