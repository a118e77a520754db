#pragma once

#include <functional>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "lindexp/linalg.hpp"
#include "lindexp/model.hpp"

namespace lindexp {

enum class Scheme {
  Free,  // full-rank exponential Euler (trace and positivity preserving)
  Std,   // "standard" exponential Euler comparator (positivity only)
  Lree,  // low-rank exponential Euler on factors Z with rho = Z Z^H
};

Scheme parse_scheme(std::string_view name);
std::string_view scheme_name(Scheme scheme);

struct StepPlan {
  double horizon = 0.0;
  long steps = 0;
  double tau = 0.0;

  // tau is computed once as T / N.
  static StepPlan uniform(double horizon, long steps);
  double time(long n) const { return static_cast<double>(n) * tau; }
};

struct LreeOptions {
  ExpmActionOptions action;
  // Abort when the compressed rank exceeds this; 0 means the state dimension.
  Index max_rank = 0;
};

// tol_1 = tau / 10 and tol_2 = tau^2 / 10.
ToleranceSet lree_default_tolerances(double tau);

// A full-rank state (any square matrix; the step maps are linear) or a factor.
using State = std::variant<ComplexMatrix, LowRankFactor>;

// Density matrix represented by a state.
ComplexMatrix state_density(const State& state);

/// One FREE step: A_n = A(t_n), E = exp(tau A_n), M = E rho E^H,
/// A_n W + W A_n^H = M - rho, rho_{n+1} = M + sum_k gamma_k L_k W L_k^H.
ComplexMatrix free_step(const LindbladModel& model, const ComplexMatrix& rho,
                        double t_n, double tau, const ToleranceSet& tol);

/// One standard exponential Euler step: rho_{n+1} = E rho E^H + X with
/// A_n X + X A_n^H = E G E^H - G, G = sum_k gamma_k L_k rho L_k^H.
ComplexMatrix std_expeuler_step(const LindbladModel& model,
                                const ComplexMatrix& rho, double t_n,
                                double tau, const ToleranceSet& tol);

/// One LREE step on the factor: V = e^{tau A_n} Z (to tol_1), stack
/// [V, sqrt(gamma_k tau) L_k V], compress to tol_2, normalize in Frobenius norm.
LowRankFactor lree_step(const LindbladModel& model, const LowRankFactor& z,
                        double t_n, double tau, const ToleranceSet& tol,
                        const LreeOptions& options = {});

/// Stepper that reuses the propagator and Schur factor while the drift is
/// unchanged (every step for a time-independent Hamiltonian).
class ExpEulerStepper {
 public:
  ExpEulerStepper(const LindbladModel& model, double tau, ToleranceSet tol,
                  LreeOptions lree = {});

  ComplexMatrix free(const ComplexMatrix& rho, double t_n);
  ComplexMatrix standard(const ComplexMatrix& rho, double t_n);
  LowRankFactor low_rank(const LowRankFactor& z, double t_n);

 private:
  struct Cache {
    double t = 0.0;
    ComplexMatrix drift;
    ComplexMatrix propagator;
    std::optional<LyapunovSolver> lyapunov;
  };
  const Cache& prepare(double t_n, bool need_lyapunov, bool need_propagator);

  const LindbladModel& model_;
  double tau_;
  ToleranceSet tol_;
  LreeOptions lree_;
  std::optional<Cache> cache_;
};

using Observer = std::function<void(long step, double t, const State& state)>;

struct IntegrateOptions {
  // Keep every k-th state in the trajectory (0 keeps only the first and last).
  long snapshot_every = 0;
  // Invoked with step 0 for the initial state and after every step.
  std::vector<Observer> observers;
  LreeOptions lree;
};

struct Trajectory {
  std::vector<long> steps;
  std::vector<double> times;
  std::vector<State> states;

  const State& final_state() const { return states.back(); }
};

/// Applies plan.steps steps of `scheme`, freezing A_n at the left endpoint
/// t_n. Failures are rethrown as StepError carrying the step index.
Trajectory integrate(Scheme scheme, const LindbladModel& model,
                     const State& initial, const StepPlan& plan,
                     const ToleranceSet& tol,
                     const IntegrateOptions& options = {});

}  // namespace lindexp
