#include <gtest/gtest.h>

#include <random>

#include "gbmred/quantum.hpp"
#include "gbmred/reduce_ode.hpp"

using namespace gbmred;

TEST(ClosedOde, ForcingMustMatchEquilibrium) {
  EXPECT_NO_THROW(ClosedOde(Polynomial({2.0, 1.0}), 1.0, 0.5));
  EXPECT_THROW(ClosedOde(Polynomial({2.0, 1.0}), 1.0, 0.6), DomainError);
  EXPECT_THROW(ClosedOde(Polynomial({2.0})), DomainError);
}

TEST(ClosedOde, CayleyHamiltonClosureReproducesEveryComponent) {
  std::mt19937_64 g(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto grid = uniform_grid(10.0, 100);
  for (int n = 2; n <= 4; ++n) {
    Matrix F(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) F(i, j) = u(g);
    F -= 2.0 * Matrix::Identity(n, n);
    const Vector u0 = Vector::LinSpaced(n, 1.0, 2.0);
    const Trajectory sys = integrate_linear_ode(F, Vector::Zero(n), u0, grid);
    const ClosedOde ode = closed_ode_from_system(F);
    for (int i = 0; i < n; ++i) {
      const auto d0 = initial_derivatives_from_system(F, Vector::Zero(n), u0, i, n);
      const ScalarTrajectory s = solve_closed_ode(ode, d0, grid);
      for (std::size_t k = 0; k < grid.size(); ++k) EXPECT_NEAR(s.values[k], sys.values[k](i), 1e-6);
    }
  }
}

TEST(ClosedOde, QuantumVarianceClosureIsTheThirdOrderEquation) {
  const double a = 0.5, b = 1.3;
  const Matrix M = covariance_system_matrix(a, b);
  const ClosedOde four = closed_ode_from_system(M);
  const ClosedOde three = factor_zero_root(four, 1.0 / 3.0);
  const ClosedOde ref = pzz_exact_third_order(a, b);
  ASSERT_EQ(three.order(), 3);
  for (int i = 0; i <= 3; ++i) {
    EXPECT_NEAR(three.coefficients()[i], ref.coefficients()[i], 1e-9 * std::abs(ref.coefficients()[i]) + 1e-12);
  }
  EXPECT_NEAR(three.forcing(), ref.forcing(), 1e-9 * ref.forcing());
}

TEST(ClosedOde, ThirdOrderSolutionMatchesSystem) {
  const double a = 0.5, b = 1.0;
  const Matrix M = covariance_system_matrix(a, b);
  const auto grid = uniform_grid(20.0, 200);
  Vector p0(4);
  p0 << 1, 0, 0, 0;
  const Trajectory sys = integrate_linear_ode(M, Vector::Zero(4), p0, grid);
  const ScalarTrajectory s = solve_closed_ode(pzz_exact_third_order(a, b), {0.0, 0.0, 0.0}, grid);
  for (std::size_t k = 0; k < grid.size(); ++k) EXPECT_NEAR(s.values[k], sys.values[k](3), 1e-9);
}

TEST(Adiabatic, TruncationKeepsTwoLowestOrders) {
  const ClosedOde ode(Polynomial({6.0, 5.0, 1.0}), 3.0, 0.5);
  const ReducedScalarOde r = adiabatic_truncate(ode);
  EXPECT_DOUBLE_EQ(r.rate, -6.0 / 5.0);
  EXPECT_DOUBLE_EQ(r.equilibrium, 0.5);
  EXPECT_THROW(adiabatic_truncate(ClosedOde(Polynomial({1.0, 1.0}))), DomainError);
}

TEST(LargeBetaChain, StagesAndFinalRate) {
  const double a = 0.5, b = 10.0;
  const auto chain = large_beta_chain(pzz_exact_third_order(a, b), a, b);
  const std::vector<std::string> names{"drop_third_derivative", "halve",
                                       "drop_alpha_damping",    "divide_by_beta_squared",
                                       "drop_second_derivative", "divide_by_eight"};
  ASSERT_EQ(chain.size(), names.size());
  for (std::size_t i = 0; i < names.size(); ++i) EXPECT_EQ(chain[i].name, names[i]);
  const auto& c2 = chain[2].ode.coefficients();
  EXPECT_NEAR(c2[1], 8 * std::pow(b, 4), 1e-9);
  const auto& last = chain.back().ode;
  ASSERT_EQ(last.order(), 1);
  EXPECT_NEAR(last.coefficients()[1], b * b, 1e-12);
  EXPECT_NEAR(last.coefficients()[0], 6 * a * a, 1e-12);
  EXPECT_NEAR(*last.equilibrium(), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(-last.coefficients()[0] / last.coefficients()[1], -6 * a * a / (b * b), 1e-15);
}

TEST(SolveReduced, ExponentialRelaxation) {
  const auto s = solve_reduced({-2.0, 1.0}, 3.0, {0.0, 1.0});
  EXPECT_DOUBLE_EQ(s.values[0], 3.0);
  EXPECT_NEAR(s.values[1], 1.0 + 2.0 * std::exp(-2.0), 1e-15);
}

TEST(SolveClosedOde, LargeBetaStaysAccurate) {
  const double a = 0.5, b = 10.0;
  const Matrix M = covariance_system_matrix(a, b);
  const auto grid = uniform_grid(50.0, 50);
  Vector p0(4);
  p0 << 1, 0, 0, 0;
  const Trajectory sys = integrate_linear_ode(M, Vector::Zero(4), p0, grid);
  const ScalarTrajectory s = solve_closed_ode(pzz_exact_third_order(a, b), {0.0, 0.0, 0.0}, grid);
  for (std::size_t k = 0; k < grid.size(); ++k) EXPECT_NEAR(s.values[k], sys.values[k](3), 1e-7);
}
