#include <cmath>
#include <sstream>
#include <string>

#include "lindexp/diagnostics.hpp"
#include "lindexp/errors.hpp"

namespace lindexp {

double trace_deviation(const ComplexMatrix& rho) {
  if (rho.rows() != rho.cols()) {
    throw DimensionError("trace_deviation: matrix is not square");
  }
  return rho.trace().real() - 1.0;
}

double relative_error(const ComplexMatrix& rho_num,
                      const ComplexMatrix& rho_ref) {
  if (rho_num.rows() != rho_ref.rows() || rho_num.cols() != rho_ref.cols()) {
    throw DimensionError("relative_error: dimension mismatch");
  }
  const double ref = trace_norm(rho_ref);
  if (ref == 0.0) {
    throw ParameterError("relative_error: reference has zero trace norm");
  }
  return trace_norm(rho_num - rho_ref) / ref;
}

double convergence_order(std::span<const double> step_sizes,
                         std::span<const double> errors) {
  if (step_sizes.size() != errors.size()) {
    throw DimensionError("convergence_order: length mismatch");
  }
  const std::size_t n = step_sizes.size();
  if (n < 3) {
    throw ParameterError("convergence_order: need at least three points");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(step_sizes[i] > 0.0) || !(errors[i] > 0.0)) {
      throw ParameterError(
          "convergence_order: step sizes and errors must be positive");
    }
    if (i > 0 && !(step_sizes[i] < step_sizes[i - 1])) {
      throw ParameterError(
          "convergence_order: step sizes must be strictly decreasing");
    }
  }
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_x += std::log(step_sizes[i]);
    mean_y += std::log(errors[i]);
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(step_sizes[i]) - mean_x;
    sxy += dx * (std::log(errors[i]) - mean_y);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

double population(const ComplexMatrix& rho, Index i) {
  if (i < 1 || i > rho.rows() || rho.rows() != rho.cols()) {
    throw ParameterError("population: index " + std::to_string(i) +
                         " outside 1.." + std::to_string(rho.rows()));
  }
  const Complex value = rho(i - 1, i - 1);
  if (std::abs(value.imag()) > 1e-12) {
    std::ostringstream msg;
    msg << "population: diagonal entry " << i << " has imaginary part "
        << value.imag();
    throw ParameterError(msg.str());
  }
  return value.real();
}

StepDiagnostics measure_step(long step, double t, const State& state,
                             std::span<const Index> population_indices) {
  StepDiagnostics row;
  row.step = step;
  row.time = t;
  const ComplexMatrix rho = state_density(state);
  row.trace_deviation = trace_deviation(rho);
  row.min_eig = min_eigenvalue(rho);
  if (const auto* factor = std::get_if<LowRankFactor>(&state)) {
    row.rank = factor->rank();
  }
  for (Index i : population_indices) {
    row.populations.emplace_back(i, population(rho, i));
  }
  return row;
}

ComplexMatrix random_density(Index m, std::uint64_t seed,
                             std::uint64_t stream) {
  const ComplexMatrix g = random_dense_operator(m, seed, stream);
  const ComplexMatrix gg = hermitize(g * g.adjoint());
  return gg / gg.trace().real();
}

std::vector<CeProbeRow> expm_constant_probe(const LindbladModel& model,
                                            std::span<const double> taus,
                                            std::span<const double> tol1s,
                                            std::uint64_t seed,
                                            const CeProbeOptions& options) {
  const Index m = model.dim();
  const ComplexMatrix sigma = random_density(m, seed, 0xce);
  ExpmActionOptions action;
  action.dense_threshold = options.dense_threshold;

  std::vector<CeProbeRow> rows;
  for (double tol1 : tol1s) {
    if (!(tol1 > 0.0)) {
      throw ParameterError("expm_constant_probe: tolerances must be positive");
    }
    for (double tau : taus) {
      if (!(tau >= 0.0)) {
        throw ParameterError("expm_constant_probe: tau must be >= 0");
      }
      const double t = static_cast<double>(options.step_index) * tau;
      const ComplexMatrix scaled = tau * effective_drift(model, t).matrix;
      const ComplexMatrix e = expm(scaled);
      const ComplexMatrix exact = e * sigma * e.adjoint();
      // e~ (e~ sigma)^H = e~ sigma e~^H since sigma is Hermitian.
      const ComplexMatrix left = expm_action(scaled, sigma, tol1, action);
      const ComplexMatrix approx =
          expm_action(scaled, ComplexMatrix(left.adjoint()), tol1, action);
      CeProbeRow row;
      row.tau = tau;
      row.tol1 = tol1;
      row.numerator = trace_norm(exact - approx);
      row.ce = row.numerator / tol1;
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace lindexp
