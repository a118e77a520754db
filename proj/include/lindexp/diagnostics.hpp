#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "lindexp/integrators.hpp"
#include "lindexp/linalg.hpp"
#include "lindexp/model.hpp"

namespace lindexp {

struct StepDiagnostics {
  long step = 0;
  double time = 0.0;
  double trace_deviation = 0.0;
  double min_eig = 0.0;
  Index rank = 0;  // factor rank for LREE, 0 for full-rank schemes
  std::vector<std::pair<Index, double>> populations;  // 1-based index, value
};

// Re(Tr rho) - 1
double trace_deviation(const ComplexMatrix& rho);

// ||rho_num - rho_ref||_1 / ||rho_ref||_1
double relative_error(const ComplexMatrix& rho_num,
                      const ComplexMatrix& rho_ref);

/// Least-squares slope of log(error) against log(tau), all points weighted
/// equally. Needs at least three points with strictly decreasing tau.
double convergence_order(std::span<const double> step_sizes,
                         std::span<const double> errors);

// Re(rho_ii), i 1-based; throws if |Im(rho_ii)| > 1e-12.
double population(const ComplexMatrix& rho, Index i);

StepDiagnostics measure_step(long step, double t, const State& state,
                             std::span<const Index> population_indices);

struct CeProbeRow {
  double tau = 0.0;
  double tol1 = 0.0;
  // || e^{tau A} s e^{tau A^H} - e~ s e~^H ||_1 with e~ the action at tol1
  double numerator = 0.0;
  double ce = 0.0;  // numerator / tol1
};

struct CeProbeOptions {
  // A_n is evaluated at t = step_index * tau.
  long step_index = 0;
  // The approximate action goes through the Taylor path when the dimension
  // exceeds this (0 forces it).
  Index dense_threshold = 0;
};

/// Measures C_e over the grid taus x tol1s for a seeded random positive
/// definite sigma with unit trace norm. Rows are ordered tol1-major.
std::vector<CeProbeRow> expm_constant_probe(const LindbladModel& model,
                                            std::span<const double> taus,
                                            std::span<const double> tol1s,
                                            std::uint64_t seed,
                                            const CeProbeOptions& options = {});

// Random positive definite matrix with unit trace, G G^H / Tr(G G^H).
ComplexMatrix random_density(Index m, std::uint64_t seed,
                             std::uint64_t stream = 0);

}  // namespace lindexp
