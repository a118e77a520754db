#pragma once

#include <functional>

#include "lindexp/linalg.hpp"
#include "lindexp/model.hpp"

namespace lindexp {

// Dense m^2 x m^2 objects are only assembled up to this state dimension.
inline constexpr Index kOracleMaxDim = 64;

// Column-stacking vectorization and its inverse.
ComplexVector vec(const ComplexMatrix& m);
ComplexMatrix unvec(const ComplexVector& v, Index m);

/// Lindblad generator in vectorized form (column stacking):
/// L = -i I(x)H + i H^T(x)I + sum_k gamma_k (L_k^* (x) L_k
///     - 1/2 I (x) L_k^H L_k - 1/2 (L_k^T L_k^*) (x) I).
ComplexMatrix superoperator(const LindbladModel& model, double t,
                            Index max_dim = kOracleMaxDim);

/// Right-hand side A rho + rho A^H + sum_k gamma_k L_k rho L_k^H evaluated in
/// matrix form, i.e. the generator applied without assembling it.
ComplexMatrix lindblad_rhs(const LindbladModel& model, double t,
                           const ComplexMatrix& rho);

// Bound on the generator norm induced by the Frobenius norm at time t.
double generator_norm_bound(const LindbladModel& model, double t);

/// unvec(expm(T L) vec(rho0)) for a time-independent Hamiltonian.
ComplexMatrix reference_solution(const LindbladModel& model,
                                 const ComplexMatrix& rho0, double horizon,
                                 Index max_dim = kOracleMaxDim);

struct SubstepOracleOptions {
  long substeps = 4096;
  // Trace-norm change allowed when the substep count is doubled.
  double self_check_tol = 1e-8;
  bool self_check = true;
  Index max_dim = kOracleMaxDim;
};

struct SubstepOracleResult {
  ComplexMatrix rho;
  // Trace-norm distance between the runs with `substeps` and 2 * `substeps`
  // (0 when the self-check is disabled).
  double self_check_drift = 0.0;
};

/// Propagates from t0 to t0 + horizon by composing exp(h L(t_mid)) over
/// uniform substeps with the generator frozen at each substep midpoint; the
/// exponential is applied to the state through a truncated Taylor action at
/// machine precision. Second-order accurate in h.
SubstepOracleResult substep_propagate(const LindbladModel& model,
                                      const ComplexMatrix& rho0, double t0,
                                      double horizon, long substeps,
                                      Index max_dim = kOracleMaxDim);

/// Substepped reference solution with the doubling self-check; throws when the
/// drift exceeds `self_check_tol`. Returns the finer of the two runs.
SubstepOracleResult reference_solution_timedep(
    const LindbladModel& model, const ComplexMatrix& rho0, double horizon,
    const SubstepOracleOptions& options = {});

/// Closed form for a qubit with H = 0 and the single jump L = Jz: populations
/// are constant and coherences decay as exp(-gamma t / 2).
ComplexMatrix dephasing_closed_form(double gamma, const ComplexMatrix& rho0,
                                    double t);

using SuperopApplier = std::function<ComplexVector(const ComplexVector&)>;

/// One classical fourth-order Runge-Kutta step of d|rho>/dt = L |rho>.
ComplexVector rk4_vectorized_step(const SuperopApplier& apply,
                                  const ComplexVector& rho_vec, double tau);

}  // namespace lindexp
