#include "gbmred/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

namespace gbmred {

namespace {

double max_abs(const Matrix& A) { return A.size() == 0 ? 0.0 : A.cwiseAbs().maxCoeff(); }

}  // namespace

void require_square(const Matrix& F, const char* what) {
  if (F.rows() < 1 || F.rows() != F.cols()) {
    std::ostringstream os;
    os << what << ": expected a nonempty square matrix, got " << F.rows() << "x" << F.cols();
    throw DimensionError(os.str());
  }
}

void require_finite(const Matrix& F, const char* what) {
  if (!F.allFinite()) throw DomainError(std::string(what) + ": matrix has non-finite entries");
}

// ---------------------------------------------------------------------------
// Polynomial

Polynomial::Polynomial(std::vector<double> ascending) : coeffs_(std::move(ascending)) {
  while (coeffs_.size() > 1 && coeffs_.back() == 0.0) coeffs_.pop_back();
  if (coeffs_.empty()) coeffs_.push_back(0.0);
  for (double c : coeffs_) {
    if (!std::isfinite(c)) throw DomainError("Polynomial: non-finite coefficient");
  }
}

double Polynomial::operator()(double x) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Complex Polynomial::operator()(Complex x) const {
  Complex acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Matrix Polynomial::operator()(const Matrix& F) const {
  require_square(F, "Polynomial(Matrix)");
  const auto n = F.rows();
  Matrix acc = Matrix::Zero(n, n);
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
    acc = acc * F;
    acc.diagonal().array() += *it;
  }
  return acc;
}

// ---------------------------------------------------------------------------

Matrix kron(const Matrix& U, const Matrix& V) {
  Matrix K(U.rows() * V.rows(), U.cols() * V.cols());
  for (Eigen::Index i = 0; i < U.rows(); ++i) {
    for (Eigen::Index j = 0; j < U.cols(); ++j) {
      K.block(i * V.rows(), j * V.cols(), V.rows(), V.cols()) = U(i, j) * V;
    }
  }
  return K;
}

Polynomial char_poly(const Matrix& F) {
  require_square(F, "char_poly");
  require_finite(F, "char_poly");
  const auto n = F.rows();
  std::vector<double> c(static_cast<std::size_t>(n) + 1, 0.0);
  c[n] = 1.0;
  Matrix Mk = Matrix::Zero(n, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    Mk = F * Mk;
    Mk.diagonal().array() += c[n - k + 1];
    c[n - k] = -(F * Mk).trace() / static_cast<double>(k);
  }
  return Polynomial(std::move(c));
}

Polynomial minimal_poly(const Matrix& F, double rel_tol) {
  require_square(F, "minimal_poly");
  require_finite(F, "minimal_poly");
  const auto n = F.rows();
  // Work with G = s*F so that powers stay O(1); roots scale by s.
  const double s = 1.0 / std::max(1.0, F.norm());
  const Matrix G = s * F;

  Matrix krylov(n * n, n + 1);
  Matrix power = Matrix::Identity(n, n);
  for (Eigen::Index k = 0; k <= n; ++k) {
    krylov.col(k) = Eigen::Map<const Vector>(power.data(), n * n);
    if (k >= 1) {
      const Matrix basis = krylov.leftCols(k);
      const Vector target = krylov.col(k);
      const Vector coef = basis.completeOrthogonalDecomposition().solve(target);
      const double resid = (basis * coef - target).norm();
      if (resid <= rel_tol * std::max(1.0, target.norm())) {
        // G^k = sum_i coef_i G^i  =>  q(mu) = mu^k - sum_i coef_i mu^i, p(lambda) = q(s*lambda)/s^k.
        std::vector<double> a(static_cast<std::size_t>(k) + 1, 0.0);
        a[k] = 1.0;
        for (Eigen::Index i = 0; i < k; ++i) a[i] = -coef(i) * std::pow(s, static_cast<double>(i - k));
        return Polynomial(std::move(a));
      }
    }
    power = power * G;
  }
  // Cayley-Hamilton guarantees termination at k = n in exact arithmetic.
  return char_poly(F);
}

Spectrum eigenvalues(const Matrix& F) {
  require_square(F, "eigenvalues");
  require_finite(F, "eigenvalues");
  if (F.rows() > 16) throw DimensionError("eigenvalues: dimension above 16 is not supported");

  Eigen::EigenSolver<Matrix> solver(F, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigenvalues: QR iteration did not converge for " +
                         std::to_string(F.rows()) + "x" + std::to_string(F.cols()) + " input");
  }
  Spectrum spec(solver.eigenvalues().data(), solver.eigenvalues().data() + F.rows());

  const double scale = std::max(1.0, F.norm());
  const Eigen::MatrixXcd Fc = F.cast<Complex>();
  for (const Complex& lambda : spec) {
    Eigen::MatrixXcd shifted = Fc;
    shifted.diagonal().array() -= lambda;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(shifted);
    const double smin = svd.singularValues()(F.rows() - 1);
    if (smin > 1e-8 * scale) {
      std::ostringstream os;
      os << "eigenvalues: residual check failed for lambda=" << lambda << " (sigma_min=" << smin << ")";
      throw NumericalError(os.str());
    }
  }

  std::sort(spec.begin(), spec.end(), [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
  return spec;
}

bool has_complex_pair(const Spectrum& spectrum, double tol) {
  return std::any_of(spectrum.begin(), spectrum.end(), [tol](const Complex& z) {
    return std::abs(z.imag()) > tol * std::max(1.0, std::abs(z));
  });
}

int numerical_rank(const Matrix& A, double rel_tol) {
  if (A.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(A);
  const auto& sv = svd.singularValues();
  const double cutoff = rel_tol * std::max(1.0, sv(0));
  return static_cast<int>((sv.array() > cutoff).count());
}

Vector solve_linear(const Matrix& A, const Vector& b) {
  require_square(A, "solve_linear");
  require_finite(A, "solve_linear");
  const auto n = A.rows();
  if (b.size() != n) throw DimensionError("solve_linear: right-hand side has wrong length");

  Matrix lu = A;
  Vector x = b;
  const double tiny = 1e-13 * std::max(1.0, max_abs(A));
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index piv = k;
    lu.col(k).tail(n - k).cwiseAbs().maxCoeff(&piv);
    piv += k;
    if (std::abs(lu(piv, k)) <= tiny) {
      const int rank = numerical_rank(A);
      throw SingularSystemError("solve_linear: singular matrix (numerical rank " +
                                    std::to_string(rank) + " of " + std::to_string(n) + ")",
                                rank, static_cast<int>(n));
    }
    if (piv != k) {
      lu.row(k).swap(lu.row(piv));
      std::swap(x(k), x(piv));
    }
    for (Eigen::Index i = k + 1; i < n; ++i) {
      const double f = lu(i, k) / lu(k, k);
      lu.row(i).tail(n - k) -= f * lu.row(k).tail(n - k);
      x(i) -= f * x(k);
    }
  }
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    x(i) = (x(i) - lu.row(i).tail(n - i - 1).dot(x.tail(n - i - 1))) / lu(i, i);
  }

  const double resid = (A * x - b).norm();
  if (!(resid <= 1e-10 * (1.0 + b.norm()) * std::max(1.0, max_abs(A)))) {
    throw NumericalError("solve_linear: residual " + std::to_string(resid) +
                         " above tolerance (ill-conditioned system)");
  }
  return x;
}

Vector solve_least_squares(const Matrix& A, const Vector& b) {
  if (A.rows() != b.size()) throw DimensionError("solve_least_squares: right-hand side has wrong length");
  require_finite(A, "solve_least_squares");
  return A.completeOrthogonalDecomposition().solve(b);
}

Matrix sym_matrix_sqrt(const Matrix& S) {
  require_square(S, "sym_matrix_sqrt");
  require_finite(S, "sym_matrix_sqrt");
  const double scale = std::max(1.0, max_abs(S));
  if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw DomainError("sym_matrix_sqrt: matrix is not symmetric");
  }
  const Matrix sym = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  Vector ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -1e-10 * scale) {
      throw DomainError("sym_matrix_sqrt: matrix is indefinite (eigenvalue " + std::to_string(ev(i)) + ")");
    }
    ev(i) = std::sqrt(std::max(0.0, ev(i)));
  }
  const Matrix& V = es.eigenvectors();
  Matrix R = V * ev.asDiagonal() * V.transpose();
  return 0.5 * (R + R.transpose());
}

}  // namespace gbmred
