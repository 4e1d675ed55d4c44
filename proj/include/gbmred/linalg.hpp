#pragma once

///
/// \file linalg.hpp
///
/// Dense linear algebra for the small matrices that appear in moment
/// dynamics: Kronecker products, characteristic and minimal polynomials,
/// spectra, linear solves and symmetric square roots.
///

#include <complex>
#include <vector>

#include <Eigen/Core>

#include "gbmred/errors.hpp"

namespace gbmred {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Complex = std::complex<double>;

/// Eigenvalues sorted by real part (descending), ties broken by imaginary
/// part (descending).
using Spectrum = std::vector<Complex>;

///
/// Real polynomial a_0 + a_1 x + ... + a_n x^n stored with ascending degree.
///
/// The leading coefficient is nonzero unless the polynomial is identically
/// zero, in which case the coefficient vector holds a single 0.
///
class Polynomial {
 public:
  Polynomial() : coeffs_{0.0} {}
  explicit Polynomial(std::vector<double> ascending);

  const std::vector<double>& coefficients() const noexcept { return coeffs_; }
  double operator[](std::size_t i) const { return i < coeffs_.size() ? coeffs_[i] : 0.0; }

  /// Degree; the zero polynomial reports 0.
  int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const noexcept { return coeffs_.size() == 1 && coeffs_[0] == 0.0; }

  double operator()(double x) const;
  Complex operator()(Complex x) const;

  /// p(F) = sum_i a_i F^i via Horner's scheme.
  Matrix operator()(const Matrix& F) const;

 private:
  std::vector<double> coeffs_;
};

/// Block (i,j) of the result is u_ij * V.
Matrix kron(const Matrix& U, const Matrix& V);

/// Monic det(lambda*I - F) by the Faddeev-LeVerrier recursion.
Polynomial char_poly(const Matrix& F);

/// Monic polynomial of least degree annihilating F. Found from the first
/// linear dependency among vec(I), vec(F), vec(F^2), ...; `rel_tol` scales
/// the residual that declares a dependency.
Polynomial minimal_poly(const Matrix& F, double rel_tol = 1e-10);

/// All eigenvalues of a square real matrix (n <= 16). Each eigenvalue is
/// checked to make F - lambda*I numerically singular; a failed check throws
/// NumericalError.
Spectrum eigenvalues(const Matrix& F);

/// True if the spectrum has an eigenvalue with |imag| > tol.
bool has_complex_pair(const Spectrum& spectrum, double tol = 1e-10);

/// Solve Ax = b with partial-pivot Gaussian elimination. A rank-deficient
/// A throws SingularSystemError carrying the numerical rank.
Vector solve_linear(const Matrix& A, const Vector& b);

/// Minimum-norm least-squares solution of Ax = b (A may be rectangular).
Vector solve_least_squares(const Matrix& A, const Vector& b);

/// Numerical rank from the singular values, relative threshold `rel_tol`.
int numerical_rank(const Matrix& A, double rel_tol = 1e-10);

/// Symmetric PSD square root through an eigendecomposition. Eigenvalues in
/// [-1e-10, 0) are clipped to zero; asymmetric or indefinite inputs beyond
/// that tolerance throw DomainError.
Matrix sym_matrix_sqrt(const Matrix& S);

/// Throws DimensionError unless F is square.
void require_square(const Matrix& F, const char* what);

/// Throws DomainError if any entry is NaN or infinite.
void require_finite(const Matrix& F, const char* what);

}  // namespace gbmred
