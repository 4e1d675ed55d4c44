#include <gtest/gtest.h>

#include <cmath>

#include "gbmred/quantum.hpp"

using namespace gbmred;

TEST(QuantumGbm, CoefficientMatrices) {
  const GbmModel m = quantum_gbm(0.5, 2.0);
  Matrix A(3, 3), B(3, 3);
  A << -8, 0, 0, 0, -8, -1, 0, 1, 0;
  B << 0, -4, 0, 4, 0, 0, 0, 0, 0;
  EXPECT_EQ(m.A(), A);
  EXPECT_EQ(m.B(), B);
  EXPECT_TRUE(m.D().isZero());
}

TEST(QuantumGbm, SubsystemsAreBlocksOfTheVectorizedDrift) {
  const double a = 0.7, b = 1.3;
  const Matrix H = build_vectorized_drift(quantum_gbm(a, b));
  EXPECT_LE((symmetric_block(H, 3, covariance_entries()) - covariance_system_matrix(a, b)).norm(), 1e-12);
  EXPECT_LE((symmetric_block(H, 3, cross_covariance_entries()) - cross_covariance_matrix(a, b)).norm(), 1e-12);
  EXPECT_LE((quantum_gbm(a, b).A().bottomRightCorner(2, 2) - mean_subsystem_matrix(a, b)).norm(), 1e-15);
}

TEST(QuantumGbm, TraceIsConserved) {
  const Matrix M = covariance_system_matrix(0.5, 1.0);
  Eigen::RowVector4d w(1, 1, 0, 1);
  EXPECT_LE((w * M).norm(), 1e-15);
}

TEST(QuantumGbm, CharacteristicPolynomials) {
  const double a = 0.5, b = 1.4;
  const Polynomial q = char_poly(mean_subsystem_matrix(a, b));
  EXPECT_NEAR(q[0], 4 * a * a, 1e-12);
  EXPECT_NEAR(q[1], 2 * b * b, 1e-12);
  const Polynomial m = char_poly(covariance_system_matrix(a, b));
  EXPECT_NEAR(m[0], 0.0, 1e-12);
  EXPECT_NEAR(m[1], 96 * a * a * b * b, 1e-10);
  EXPECT_NEAR(m[2], 16 * (std::pow(b, 4) + a * a), 1e-10);
  EXPECT_NEAR(m[3], 10 * b * b, 1e-12);
}

class AnalyticMean : public ::testing::TestWithParam<std::pair<double, double>> {};

TEST_P(AnalyticMean, MatchesIntegratedMean) {
  const auto [a, b] = GetParam();
  const auto params = AnalyticMeanParams::from(a, b);
  Vector x0(3);
  x0 << 0.6, 0.0, 0.8;
  const auto grid = uniform_grid(6.0, 60);
  const auto traj = mean_trajectory(quantum_gbm(a, b), x0, grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    EXPECT_LE((analytic_mean(params, x0, grid[k]) - traj.values[k]).cwiseAbs().maxCoeff(), 1e-8);
  }
}

INSTANTIATE_TEST_SUITE_P(BothRegimes, AnalyticMean,
                         ::testing::Values(std::pair{2.0, 1.0}, std::pair{0.5, 1.5 * std::sqrt(2.0)},
                                           std::pair{0.5, std::sqrt(2.0)}, std::pair{0.5, 3.0}));

TEST(AnalyticMean, RegimeBoundaryThrows) { EXPECT_THROW(AnalyticMeanParams::from(0.5, 1.0), DomainError); }

TEST(AnalyticMean, LargeBetaDecayRate) {
  // y, z relax at rate 2 a^2 / b^2 to leading order when b^2 >> 2|a|.
  const double a = 0.5, b = 10.0;
  const auto p = AnalyticMeanParams::from(a, b);
  const double exact = b * b - p.omega;
  EXPECT_NEAR(exact, 2 * a * a / (b * b), 1e-4 * 2 * a * a / (b * b) + 1e-7);
}

TEST(Spherical, FromSphericalIsUnit) {
  const Vector v = from_spherical(0.3, 1.0);
  EXPECT_NEAR(v.norm(), 1.0, 1e-15);
  EXPECT_NEAR(v(2), std::sin(0.3), 1e-15);
}

TEST(Simulators, StayOnTheSphere) {
  SimulationOptions o;
  o.dt = 1e-3;
  o.t_max = 0.5;
  o.n_paths = 50;
  const PathEnsemble s = simulate_spherical(0.5, 1.0, 0.3, 1.0, o);
  for (int p = 0; p < s.n_paths; ++p) {
    const Vector v(Eigen::Vector3d(s.at(p, s.n_times() - 1, 0), s.at(p, s.n_times() - 1, 1),
                                   s.at(p, s.n_times() - 1, 2)));
    EXPECT_NEAR(v.norm(), 1.0, 1e-12);
  }
}

TEST(Simulators, CartesianStaysNearTheSphere) {
  SimulationOptions o;
  o.dt = 1e-3;
  o.t_max = 1.0;
  o.n_paths = 20000;
  o.record_every = 50;
  const double b = 1.0;
  const PathEnsemble e = simulate_paths(quantum_gbm(0.5, b), Vector::Unit(3, 0), o);
  for (std::size_t k = 0; k < e.n_times(); ++k) {
    double mean_r2 = 0.0;
    for (int p = 0; p < e.n_paths; ++p) {
      double r2 = 0.0;
      for (int i = 0; i < 3; ++i) r2 += e.at(p, k, i) * e.at(p, k, i);
      mean_r2 += r2 / e.n_paths;
    }
    EXPECT_GE(mean_r2, 1 - 5 * o.dt * b * b) << e.times[k];
    EXPECT_LE(mean_r2, 1 + 5 * o.dt * b * b) << e.times[k];
  }
}

TEST(Simulators, InvalidStartsThrow) {
  SimulationOptions o;
  o.t_max = 0.01;
  o.n_paths = 2;
  EXPECT_THROW(simulate_spherical(0.5, 1.0, M_PI / 2, 0.0, o), DomainError);
  EXPECT_THROW(simulate_spin_conserving(0.5, 1.0, 0.9, 0.9, o), DomainError);
}

TEST(Presets, KnownNames) {
  EXPECT_EQ(quantum_presets().size(), 4u);
  const QuantumPreset p = find_preset("fig1-right");
  EXPECT_DOUBLE_EQ(p.beta, 10.0);
  EXPECT_DOUBLE_EQ(*find_preset("fig3-right").epsilon, 0.01);
  EXPECT_THROW(find_preset("fig9"), DomainError);
}
