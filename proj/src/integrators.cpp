#include <cmath>
#include <sstream>
#include <string>

#include "lindexp/errors.hpp"
#include "lindexp/integrators.hpp"

namespace lindexp {

Scheme parse_scheme(std::string_view name) {
  if (name == "FREE") {
    return Scheme::Free;
  }
  if (name == "STD") {
    return Scheme::Std;
  }
  if (name == "LREE") {
    return Scheme::Lree;
  }
  throw ParameterError("unknown integration scheme '" + std::string(name) +
                       "'");
}

std::string_view scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::Free:
      return "FREE";
    case Scheme::Std:
      return "STD";
    case Scheme::Lree:
      return "LREE";
  }
  return "unknown";
}

StepPlan StepPlan::uniform(double horizon, long steps) {
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) {
    throw ParameterError("step plan: horizon must be finite and >= 0");
  }
  if (steps < 0) {
    throw ParameterError("step plan: step count must be >= 0");
  }
  StepPlan plan;
  plan.horizon = horizon;
  plan.steps = steps;
  plan.tau = steps == 0 ? 0.0 : horizon / static_cast<double>(steps);
  return plan;
}

ToleranceSet lree_default_tolerances(double tau) {
  ToleranceSet tol;
  tol.expm_tol = tau / 10.0;
  tol.compress_tol = tau * tau / 10.0;
  return tol;
}

ComplexMatrix state_density(const State& state) {
  if (const auto* rho = std::get_if<ComplexMatrix>(&state)) {
    return *rho;
  }
  return std::get<LowRankFactor>(state).density();
}

ExpEulerStepper::ExpEulerStepper(const LindbladModel& model, double tau,
                                 ToleranceSet tol, LreeOptions lree)
    : model_(model), tau_(tau), tol_(tol), lree_(lree) {
  if (!(tau >= 0.0) || !std::isfinite(tau)) {
    throw ParameterError("step size must be finite and >= 0");
  }
  tol_.validate();
}

const ExpEulerStepper::Cache& ExpEulerStepper::prepare(double t_n,
                                                       bool need_lyapunov,
                                                       bool need_propagator) {
  const bool reusable =
      cache_ && (model_.hamiltonian().is_constant() || cache_->t == t_n);
  if (!reusable) {
    cache_.emplace();
    cache_->t = t_n;
    cache_->drift = effective_drift(model_, t_n).matrix;
  }
  if (need_propagator && cache_->propagator.size() == 0) {
    cache_->propagator = expm(tau_ * cache_->drift, tol_.expm_tol);
  }
  if (need_lyapunov && !cache_->lyapunov) {
    cache_->lyapunov.emplace(cache_->drift, tol_.lyapunov_residual_tol);
  }
  return *cache_;
}

ComplexMatrix ExpEulerStepper::free(const ComplexMatrix& rho, double t_n) {
  const Index m = model_.dim();
  if (rho.rows() != m || rho.cols() != m) {
    throw DimensionError("free_step: state is " + std::to_string(rho.rows()) +
                         "x" + std::to_string(rho.cols()) + ", model is " +
                         std::to_string(m));
  }
  const bool dissipative = model_.has_dissipation();
  const Cache& c = prepare(t_n, dissipative, true);
  const ComplexMatrix sandwich =
      hermitize(c.propagator * rho * c.propagator.adjoint());
  if (!dissipative) {
    return sandwich;
  }
  // W = int_0^tau e^{sA} rho e^{sA^H} ds
  const ComplexMatrix w = c.lyapunov->solve(hermitize(sandwich - rho));
  ComplexMatrix next = sandwich;
  for (const auto& ch : model_.channels()) {
    if (ch.gamma > 0.0) {
      next += ch.gamma * ch.jump * w * ch.jump.adjoint();
    }
  }
  return hermitize(next);
}

ComplexMatrix ExpEulerStepper::standard(const ComplexMatrix& rho, double t_n) {
  const Index m = model_.dim();
  if (rho.rows() != m || rho.cols() != m) {
    throw DimensionError("std_expeuler_step: state does not match model");
  }
  const bool dissipative = model_.has_dissipation();
  const Cache& c = prepare(t_n, dissipative, true);
  const ComplexMatrix& e = c.propagator;
  const ComplexMatrix sandwich = hermitize(e * rho * e.adjoint());
  if (!dissipative) {
    return sandwich;
  }
  ComplexMatrix jumped = ComplexMatrix::Zero(m, m);
  for (const auto& ch : model_.channels()) {
    if (ch.gamma > 0.0) {
      jumped += ch.gamma * ch.jump * rho * ch.jump.adjoint();
    }
  }
  jumped = hermitize(jumped);
  // X = int_0^tau e^{sA} G e^{sA^H} ds
  const ComplexMatrix x =
      c.lyapunov->solve(hermitize(e * jumped * e.adjoint() - jumped));
  return hermitize(sandwich + x);
}

LowRankFactor ExpEulerStepper::low_rank(const LowRankFactor& factor,
                                        double t_n) {
  const Index m = model_.dim();
  const ComplexMatrix& z = factor.matrix();
  if (z.rows() != m) {
    throw DimensionError("lree_step: factor has " + std::to_string(z.rows()) +
                         " rows, model is " + std::to_string(m));
  }
  const double z_norm = z.norm();
  if (std::abs(z_norm - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "lree_step: factor Frobenius norm is " << z_norm << ", expected 1";
    throw ParameterError(msg.str());
  }

  const bool dense = m <= lree_.action.dense_threshold;
  const Cache& c = prepare(t_n, false, dense);
  const ComplexMatrix v =
      dense ? ComplexMatrix(c.propagator * z)
            : expm_action(tau_ * c.drift, z, tol_.expm_tol, lree_.action);

  Index active = 0;
  for (const auto& ch : model_.channels()) {
    if (ch.gamma > 0.0) {
      ++active;
    }
  }
  const Index r = v.cols();
  ComplexMatrix stacked(m, r * (active + 1));
  stacked.leftCols(r) = v;
  Index block = 1;
  for (const auto& ch : model_.channels()) {
    if (ch.gamma > 0.0) {
      stacked.middleCols(block * r, r) =
          std::sqrt(ch.gamma * tau_) * (ch.jump * v);
      ++block;
    }
  }

  ComplexMatrix compressed = truncated_svd(stacked, tol_.compress_tol);
  const Index cap = lree_.max_rank > 0 ? lree_.max_rank : m;
  if (compressed.cols() > cap) {
    throw SizeGuardError("lree_step: compressed rank " +
                         std::to_string(compressed.cols()) +
                         " exceeds the cap " + std::to_string(cap));
  }
  const double norm = compressed.norm();
  if (!(norm > 1e-150)) {
    throw DegenerateInputError("lree_step: compressed factor is numerically zero");
  }
  compressed /= norm;
  return LowRankFactor(std::move(compressed));
}

ComplexMatrix free_step(const LindbladModel& model, const ComplexMatrix& rho,
                        double t_n, double tau, const ToleranceSet& tol) {
  return ExpEulerStepper(model, tau, tol).free(rho, t_n);
}

ComplexMatrix std_expeuler_step(const LindbladModel& model,
                                const ComplexMatrix& rho, double t_n,
                                double tau, const ToleranceSet& tol) {
  return ExpEulerStepper(model, tau, tol).standard(rho, t_n);
}

LowRankFactor lree_step(const LindbladModel& model, const LowRankFactor& z,
                        double t_n, double tau, const ToleranceSet& tol,
                        const LreeOptions& options) {
  return ExpEulerStepper(model, tau, tol, options).low_rank(z, t_n);
}

Trajectory integrate(Scheme scheme, const LindbladModel& model,
                     const State& initial, const StepPlan& plan,
                     const ToleranceSet& tol,
                     const IntegrateOptions& options) {
  const bool factor_state = std::holds_alternative<LowRankFactor>(initial);
  if ((scheme == Scheme::Lree) != factor_state) {
    throw ParameterError(std::string("integrate: scheme ") +
                         std::string(scheme_name(scheme)) +
                         (factor_state ? " needs a full density matrix"
                                       : " needs a low-rank factor"));
  }
  if (plan.steps < 0) {
    throw ParameterError("integrate: negative step count");
  }

  ExpEulerStepper stepper(model, plan.tau, tol, options.lree);
  Trajectory traj;
  auto keep = [&](long n, const State& s) {
    traj.steps.push_back(n);
    traj.times.push_back(plan.time(n));
    traj.states.push_back(s);
  };
  auto notify = [&](long n, const State& s) {
    for (const auto& obs : options.observers) {
      obs(n, plan.time(n), s);
    }
  };

  State current = initial;
  keep(0, current);
  notify(0, current);
  for (long n = 0; n < plan.steps; ++n) {
    const double t_n = plan.time(n);
    try {
      switch (scheme) {
        case Scheme::Free:
          current = stepper.free(std::get<ComplexMatrix>(current), t_n);
          break;
        case Scheme::Std:
          current = stepper.standard(std::get<ComplexMatrix>(current), t_n);
          break;
        case Scheme::Lree:
          current = stepper.low_rank(std::get<LowRankFactor>(current), t_n);
          break;
      }
    } catch (const StepError&) {
      throw;
    } catch (const Error& e) {
      throw StepError(e, n + 1);
    }
    const long done = n + 1;
    notify(done, current);
    const bool last = done == plan.steps;
    if (last || (options.snapshot_every > 0 &&
                 done % options.snapshot_every == 0)) {
      keep(done, current);
    }
  }
  return traj;
}

}  // namespace lindexp
