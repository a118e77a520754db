#pragma once

#include <complex>
#include <functional>

#include <Eigen/Dense>

namespace lindexp {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Index = Eigen::Index;

inline constexpr double kUnitRoundoff = 0x1p-53;

/// Tolerances shared by the integrators.
///
/// `expm_tol` controls the matrix exponential (and its action on a block of
/// columns), `compress_tol` is the squared-singular-value budget discarded by
/// column compression, and `lyapunov_residual_tol` bounds the relative
/// residual accepted from the Lyapunov solver.
struct ToleranceSet {
  double expm_tol = kUnitRoundoff;
  double compress_tol = 1e-12;
  double lyapunov_residual_tol = 1e-10;

  void validate() const;
};

// Throws ParameterError if any entry is NaN/Inf.
void require_finite(const ComplexMatrix& m, const char* what);

// Relative Hermiticity test: ||M - M^H||_F <= tol * max(1, ||M||_F).
bool is_hermitian(const ComplexMatrix& m, double tol = 1e-12);

/// Matrix exponential by scaling and squaring with a diagonal Pade
/// approximant. The degree (3, 5, 7, 9 or 13) and the number of squarings are
/// selected from the 1-norm of `a` so that the backward error stays below
/// `tol` (values below the unit roundoff are treated as the unit roundoff).
ComplexMatrix expm(const ComplexMatrix& a, double tol = kUnitRoundoff);

struct ExpmActionOptions {
  // Up to this dimension the action is formed as expm(A) * Z.
  Index dense_threshold = 1024;
};

/// Approximates exp(A) * Z. Dense for small A, truncated Taylor otherwise.
ComplexMatrix expm_action(const ComplexMatrix& a, const ComplexMatrix& z,
                          double tol, const ExpmActionOptions& options = {});

using LinearMap = std::function<ComplexMatrix(const ComplexMatrix&)>;

/// Truncated-Taylor evaluation of exp(Op) X for a linear operator given only
/// through its action. `norm_bound` must bound the operator norm induced by the
/// Frobenius norm. `shift` is a scalar folded back in as exp(shift) (the
/// operator applied is assumed to already exclude it).
ComplexMatrix taylor_action(const LinearMap& apply, double norm_bound,
                            const ComplexMatrix& x, double tol,
                            Complex shift = 0.0);

/// Solves A W + W A^H = C with one complex Schur factorization of A.
///
/// The factorization is kept so that repeated solves with the same drift (the
/// usual case inside a time-stepping loop) cost only the back-substitution.
class LyapunovSolver {
 public:
  explicit LyapunovSolver(const ComplexMatrix& a,
                          double residual_tol = 1e-10);

  // C must be Hermitian; the result is Hermitian.
  ComplexMatrix solve(const ComplexMatrix& c) const;

  Index dim() const { return schur_t_.rows(); }

 private:
  ComplexMatrix a_;
  ComplexMatrix schur_t_;
  ComplexMatrix schur_u_;
  double residual_tol_;
};

ComplexMatrix solve_lyapunov(const ComplexMatrix& a, const ComplexMatrix& c,
                             double residual_tol = 1e-10);

/// Column compression: returns U_r * diag(sigma_1..sigma_r) where r >= 1 is the
/// smallest rank whose discarded tail satisfies sum_{j>r} sigma_j^2 <= tol2.
ComplexMatrix truncated_svd(const ComplexMatrix& z, double tol2);

// Schatten-1 norm (sum of singular values).
double trace_norm(const ComplexMatrix& m);

// |M| = Q |D| Q^H for Hermitian M = Q D Q^H.
ComplexMatrix hermitian_abs(const ComplexMatrix& m);

// (M + M^H) / 2
ComplexMatrix hermitize(const ComplexMatrix& m);

double min_eigenvalue(const ComplexMatrix& m);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

}  // namespace lindexp
