#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "lindexp/errors.hpp"
#include "lindexp/linalg.hpp"

namespace lindexp {

void ToleranceSet::validate() const {
  if (!(expm_tol > 0.0)) {
    throw ParameterError("tolerances: expm_tol must be positive");
  }
  if (!(compress_tol > 0.0)) {
    throw ParameterError("tolerances: compress_tol must be positive");
  }
  if (!(lyapunov_residual_tol > 0.0)) {
    throw ParameterError("tolerances: lyapunov_residual_tol must be positive");
  }
}

void require_finite(const ComplexMatrix& m, const char* what) {
  if (!m.allFinite()) {
    throw ParameterError(std::string(what) + " contains non-finite entries");
  }
}

bool is_hermitian(const ComplexMatrix& m, double tol) {
  if (m.rows() != m.cols()) {
    return false;
  }
  return (m - m.adjoint()).norm() <= tol * std::max(1.0, m.norm());
}

ComplexMatrix hermitize(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) {
    throw DimensionError("hermitize: matrix is not square");
  }
  return 0.5 * (m + m.adjoint());
}

ComplexMatrix truncated_svd(const ComplexMatrix& z, double tol2) {
  if (!(tol2 > 0.0)) {
    throw ParameterError("truncated_svd: tolerance must be positive");
  }
  require_finite(z, "truncated_svd input");
  if (z.size() == 0 || z.cwiseAbs().maxCoeff() == 0.0) {
    throw DegenerateInputError("truncated_svd: input factor is zero");
  }

  Eigen::BDCSVD<ComplexMatrix> svd(z, Eigen::ComputeThinU);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const Index q = sigma.size();

  // Smallest r >= 1 with sum_{j>r} sigma_j^2 <= tol2; accumulate from the tail.
  Index rank = q;
  double tail = 0.0;
  while (rank > 1) {
    const double next = tail + sigma(rank - 1) * sigma(rank - 1);
    if (next > tol2) {
      break;
    }
    tail = next;
    --rank;
  }
  return svd.matrixU().leftCols(rank) *
         sigma.head(rank).cast<Complex>().asDiagonal();
}

double trace_norm(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) {
    throw DimensionError("trace_norm: matrix is not square");
  }
  require_finite(m, "trace_norm input");
  if (m.size() == 0) {
    return 0.0;
  }
  Eigen::BDCSVD<ComplexMatrix> svd(m);
  return svd.singularValues().sum();
}

ComplexMatrix hermitian_abs(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) {
    throw DimensionError("hermitian_abs: matrix is not square");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(hermitize(m));
  const auto& q = eig.eigenvectors();
  return hermitize(q * eig.eigenvalues().cwiseAbs().cast<Complex>().asDiagonal() *
                   q.adjoint());
}

double min_eigenvalue(const ComplexMatrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw DimensionError("min_eigenvalue: matrix is not square");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(hermitize(m),
                                                   Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

}  // namespace lindexp
