#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "lindexp/errors.hpp"
#include "lindexp/linalg.hpp"

namespace lindexp {

namespace {

// Largest 1-norms for which the degree-m diagonal Pade approximant has a
// backward error below the unit roundoff (Higham, 2005).
struct PadeDegree {
  int degree;
  double theta;
};
constexpr std::array<PadeDegree, 5> kPadeDegrees{{{3, 1.495585217958292e-2},
                                                  {5, 2.539398330063230e-1},
                                                  {7, 9.504178996162932e-1},
                                                  {9, 2.097847961257068e0},
                                                  {13, 5.371920351148152e0}}};

// The leading backward-error term of the degree-m approximant scales like
// theta^(2m), so a looser tolerance admits a proportionally larger norm.
double scaled_theta(const PadeDegree& p, double tol) {
  const double ratio = std::max(tol, kUnitRoundoff) / kUnitRoundoff;
  return p.theta * std::pow(ratio, 1.0 / (2.0 * p.degree));
}

double norm1(const ComplexMatrix& a) {
  return a.cwiseAbs().colwise().sum().maxCoeff();
}

double norm_inf(const ComplexMatrix& a) {
  return a.cwiseAbs().rowwise().sum().maxCoeff();
}

ComplexMatrix pade_solve(const ComplexMatrix& u, const ComplexMatrix& v) {
  // r_m(A) = (V - U)^{-1} (V + U)
  return (v - u).partialPivLu().solve(v + u);
}

ComplexMatrix pade_low(const ComplexMatrix& a, int degree) {
  static const double b3[] = {120.0, 60.0, 12.0, 1.0};
  static const double b5[] = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
  static const double b7[] = {17297280.0, 8648640.0, 1995840.0, 277200.0,
                              25200.0,    1512.0,    56.0,      1.0};
  static const double b9[] = {17643225600.0, 8821612800.0, 2075673600.0,
                              302702400.0,   30270240.0,   2162160.0,
                              110880.0,      3960.0,       90.0,
                              1.0};
  const double* b = degree == 3 ? b3 : degree == 5 ? b5 : degree == 7 ? b7 : b9;

  const Index n = a.rows();
  const ComplexMatrix ident = ComplexMatrix::Identity(n, n);
  const ComplexMatrix a2 = a * a;
  ComplexMatrix power = ident;
  ComplexMatrix odd = b[1] * ident;
  ComplexMatrix even = b[0] * ident;
  for (int k = 2; k <= degree; k += 2) {
    power = power * a2;
    odd += b[k + 1] * power;
    even += b[k] * power;
  }
  return pade_solve(a * odd, even);
}

ComplexMatrix pade13(const ComplexMatrix& a) {
  static const double b[] = {64764752532480000.0,
                             32382376266240000.0,
                             7771770303897600.0,
                             1187353796428800.0,
                             129060195264000.0,
                             10559470521600.0,
                             670442572800.0,
                             33522128640.0,
                             1323241920.0,
                             40840800.0,
                             960960.0,
                             16380.0,
                             182.0,
                             1.0};
  const Index n = a.rows();
  const ComplexMatrix ident = ComplexMatrix::Identity(n, n);
  const ComplexMatrix a2 = a * a;
  const ComplexMatrix a4 = a2 * a2;
  const ComplexMatrix a6 = a4 * a2;
  const ComplexMatrix inner_u = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2);
  const ComplexMatrix u =
      a * (inner_u + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident);
  const ComplexMatrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) +
                          b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident;
  return pade_solve(u, v);
}

// Smallest theta with theta^(m+1)/(m+1)! * e^theta >= tol, i.e. the largest
// scaled norm for which m Taylor terms leave a remainder below tol.
double taylor_theta(int m, double tol) {
  const double log_tol = std::log(tol);
  auto log_bound = [m](double theta) {
    return (m + 1) * std::log(theta) - std::lgamma(m + 2.0) + theta;
  };
  double lo = 0.0;
  double hi = 64.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (log_bound(mid) > log_tol) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return lo;
}

}  // namespace

ComplexMatrix expm(const ComplexMatrix& a, double tol) {
  if (a.rows() != a.cols()) {
    throw DimensionError("expm: matrix is " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + ", expected square");
  }
  if (!(tol > 0.0)) {
    throw ParameterError("expm: tolerance must be positive");
  }
  require_finite(a, "expm input");
  const Index n = a.rows();
  if (n == 0) {
    return a;
  }

  const double norm = norm1(a);
  for (std::size_t i = 0; i + 1 < kPadeDegrees.size(); ++i) {
    if (norm <= scaled_theta(kPadeDegrees[i], tol)) {
      return pade_low(a, kPadeDegrees[i].degree);
    }
  }

  const double theta13 = scaled_theta(kPadeDegrees.back(), tol);
  int squarings = 0;
  if (norm > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
  }
  ComplexMatrix result = pade13(a / std::ldexp(1.0, squarings));
  for (int i = 0; i < squarings; ++i) {
    result = (result * result).eval();
    if (!result.allFinite()) {
      throw NumericOverflowError("expm: overflow after " +
                                 std::to_string(i + 1) + " of " +
                                 std::to_string(squarings) + " squarings");
    }
  }
  if (!result.allFinite()) {
    throw NumericOverflowError("expm: non-finite result");
  }
  return result;
}

ComplexMatrix taylor_action(const LinearMap& apply, double norm_bound,
                            const ComplexMatrix& x, double tol,
                            Complex shift) {
  if (!(tol > 0.0)) {
    throw ParameterError("taylor_action: tolerance must be positive");
  }
  if (norm_bound == 0.0 || x.size() == 0) {
    return std::exp(shift) * x;
  }

  constexpr int kMaxTerms = 55;
  const double eff_tol = std::max(tol, kUnitRoundoff);
  int best_terms = 1;
  long best_steps = 0;
  long best_cost = -1;
  for (int m = 1; m <= kMaxTerms; ++m) {
    const double theta = taylor_theta(m, eff_tol);
    const long steps =
        std::max(1L, static_cast<long>(std::ceil(norm_bound / theta)));
    const long cost = steps * m;
    if (best_cost < 0 || cost < best_cost) {
      best_cost = cost;
      best_terms = m;
      best_steps = steps;
    }
  }

  const Complex eta = std::exp(shift / static_cast<double>(best_steps));
  ComplexMatrix f = x;
  ComplexMatrix term = x;
  for (long s = 0; s < best_steps; ++s) {
    double previous = term.norm();
    for (int j = 1; j <= best_terms; ++j) {
      term = apply(term) / static_cast<double>(best_steps * j);
      const double current = term.norm();
      f += term;
      if (previous + current <= eff_tol * f.norm()) {
        break;
      }
      previous = current;
    }
    f *= eta;
    term = f;
  }
  if (!f.allFinite()) {
    throw NumericOverflowError("taylor_action: non-finite result");
  }
  return f;
}

ComplexMatrix expm_action(const ComplexMatrix& a, const ComplexMatrix& z,
                          double tol, const ExpmActionOptions& options) {
  if (a.rows() != a.cols()) {
    throw DimensionError("expm_action: operator is not square");
  }
  if (z.rows() != a.rows()) {
    throw DimensionError("expm_action: operator is " +
                         std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " but block has " +
                         std::to_string(z.rows()) + " rows");
  }
  if (!(tol > 0.0)) {
    throw ParameterError("expm_action: tolerance must be positive");
  }
  require_finite(a, "expm_action operator");
  require_finite(z, "expm_action block");

  const Index n = a.rows();
  if (n <= options.dense_threshold) {
    return expm(a, tol) * z;
  }

  const Complex mu = a.trace() / static_cast<double>(n);
  const ComplexMatrix shifted = a - mu * ComplexMatrix::Identity(n, n);
  const double bound = std::sqrt(norm1(shifted) * norm_inf(shifted));
  return taylor_action(
      [&shifted](const ComplexMatrix& v) -> ComplexMatrix {
        return shifted * v;
      },
      bound, z, tol, mu);
}

}  // namespace lindexp
