#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "lindexp/errors.hpp"
#include "lindexp/linalg.hpp"

namespace lindexp {

namespace {

constexpr double kSingularityFactor = 1e-14;

}  // namespace

LyapunovSolver::LyapunovSolver(const ComplexMatrix& a, double residual_tol)
    : a_(a), residual_tol_(residual_tol) {
  if (a.rows() != a.cols()) {
    throw DimensionError("solve_lyapunov: coefficient is not square");
  }
  if (!(residual_tol > 0.0)) {
    throw ParameterError("solve_lyapunov: residual tolerance must be positive");
  }
  require_finite(a, "solve_lyapunov coefficient");

  const Index n = a.rows();
  if (n == 0) {
    return;
  }
  Eigen::ComplexSchur<ComplexMatrix> schur(a);
  if (schur.info() != Eigen::Success) {
    throw SingularityError("solve_lyapunov: Schur decomposition failed", -1,
                           -1);
  }
  schur_t_ = schur.matrixT();
  schur_u_ = schur.matrixU();

  // A W + W A^H is singular iff lambda_i + conj(lambda_j) = 0 for some pair.
  const double threshold = kSingularityFactor * a.norm();
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const Complex sum = schur_t_(i, i) + std::conj(schur_t_(j, j));
      if (std::abs(sum) < threshold || std::abs(sum) == 0.0) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "solve_lyapunov: near-singular operator, eigenvalues "
            << schur_t_(i, i) << " and " << schur_t_(j, j)
            << " give lambda_i + conj(lambda_j) = " << sum;
        throw SingularityError(msg.str(), static_cast<int>(i),
                               static_cast<int>(j));
      }
    }
  }
}

ComplexMatrix LyapunovSolver::solve(const ComplexMatrix& c) const {
  const Index n = dim();
  if (c.rows() != n || c.cols() != n) {
    throw DimensionError("solve_lyapunov: right-hand side is " +
                         std::to_string(c.rows()) + "x" +
                         std::to_string(c.cols()) + ", expected " +
                         std::to_string(n) + "x" + std::to_string(n));
  }
  require_finite(c, "solve_lyapunov right-hand side");
  if (!is_hermitian(c)) {
    throw ParameterError("solve_lyapunov: right-hand side is not Hermitian");
  }
  if (n == 0) {
    return c;
  }

  // With A = U T U^H the equation becomes T Y + Y T^H = U^H C U, Y = U^H W U.
  // Column j of Y solves (T + conj(t_jj) I) y_j = c_j - sum_{l>j} conj(t_jl) y_l,
  // an upper-triangular system, so columns are resolved right to left.
  const ComplexMatrix rhs = schur_u_.adjoint() * hermitize(c) * schur_u_;
  ComplexMatrix y = ComplexMatrix::Zero(n, n);
  ComplexVector col(n);
  for (Index j = n - 1; j >= 0; --j) {
    col = rhs.col(j);
    for (Index l = j + 1; l < n; ++l) {
      col -= std::conj(schur_t_(j, l)) * y.col(l);
    }
    const Complex shift = std::conj(schur_t_(j, j));
    for (Index i = n - 1; i >= 0; --i) {
      Complex acc = col(i);
      for (Index k = i + 1; k < n; ++k) {
        acc -= schur_t_(i, k) * y(k, j);
      }
      y(i, j) = acc / (schur_t_(i, i) + shift);
    }
  }

  ComplexMatrix w = hermitize(schur_u_ * y * schur_u_.adjoint());

  const double c_norm = c.norm();
  const double residual = (a_ * w + w * a_.adjoint() - c).norm();
  if (residual > residual_tol_ * c_norm) {
    std::ostringstream msg;
    msg << "solve_lyapunov: relative residual " << residual / c_norm
        << " exceeds " << residual_tol_;
    throw SingularityError(msg.str(), -1, -1);
  }
  return w;
}

ComplexMatrix solve_lyapunov(const ComplexMatrix& a, const ComplexMatrix& c,
                             double residual_tol) {
  return LyapunovSolver(a, residual_tol).solve(c);
}

}  // namespace lindexp
