#include <cmath>
#include <numbers>

#include <catch_amalgamated.hpp>

#include "lindexp/errors.hpp"
#include "lindexp/integrators.hpp"
#include "lindexp/oracle.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace lindexp;
using lindexp::testing::max_abs;
using lindexp::testing::random_model;
using lindexp::testing::random_state;

namespace {

LindbladModel dephasing_model(double gamma = 1.0) {
  return LindbladModel(Hamiltonian(ComplexMatrix::Zero(2, 2)),
                       {{gamma, qudit_jz(2)}});
}

ComplexMatrix plus_state() { return ComplexMatrix::Constant(2, 2, 0.5); }

// Spin-1 with H = Jx and dephasing Jz: L^H L is not a multiple of I.
LindbladModel spin_one_model() {
  return LindbladModel(Hamiltonian(qudit_jx(3)), {{1.0, qudit_jz(3)}});
}

double trace_dev(const ComplexMatrix& rho) {
  return std::abs(rho.trace().real() - 1.0);
}

}  // namespace

TEST_CASE("FREE: identity channel leaves the state unchanged") {
  CounterRng rng(3);
  const Index m = 4;
  LindbladModel model(Hamiltonian(ComplexMatrix::Zero(m, m)),
                      {{1.0, ComplexMatrix::Identity(m, m)}});
  const ComplexMatrix rho = random_state(m, rng);
  for (double tau : {0.01, 0.5, 3.0}) {
    CHECK(max_abs(free_step(model, rho, 0.0, tau, {}) - rho) < 1e-13);
  }
}

TEST_CASE("FREE: closed system rotates by the Hamiltonian") {
  LindbladModel model(Hamiltonian(qudit_jz(2)), {});
  const ComplexMatrix out =
      free_step(model, plus_state(), 0.0, std::numbers::pi, {});
  ComplexMatrix expected(2, 2);
  expected << 0.5, -0.5, -0.5, 0.5;
  CHECK(max_abs(out - expected) < 1e-14);
}

TEST_CASE("FREE: dephasing coherence is first order accurate") {
  const auto model = dephasing_model();
  const double tau = 0.1;
  const ComplexMatrix out = free_step(model, plus_state(), 0.0, tau, {});
  CHECK(std::abs(out(0, 1) - 0.5 * std::exp(-tau / 2)) <= tau * tau);
  CHECK(std::abs(out(0, 0) - 0.5) < 1e-15);
  CHECK(trace_dev(out) < 1e-15);
  // the one-step map has the closed form 2 e^{-x} - 1, x = gamma tau / 4
  CHECK(std::abs(out(0, 1).real() - 0.5 * (2 * std::exp(-tau / 4) - 1)) < 1e-15);
}

TEST_CASE("FREE matches the quadrature form of the step") {
  CounterRng rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const Index m = 3 + trial;
    const auto model = random_model(m, 2, rng);
    const ComplexMatrix rho = random_state(m, rng);
    for (double tau : {0.05, 0.4}) {
      const ComplexMatrix ours = free_step(model, rho, 0.0, tau, {});
      const ComplexMatrix ref =
          testing::free_step_by_quadrature(model, rho, 0.0, tau);
      CHECK(testing::svd_trace_norm(ours - ref) < 1e-11);
    }
  }
}

TEST_CASE("FREE freezes the generator at the left endpoint") {
  QuditChainSpec spec;
  spec.d = 2;
  spec.qudits = 2;
  spec.schedule = CouplingSchedule::Sin2Pi;
  const auto model = qudit_chain_model(spec, JumpKind::Jz, 0.3);
  const double t_n = 0.37;
  LindbladModel frozen(Hamiltonian(model.hamiltonian().at(t_n)),
                       model.channels());
  const ComplexMatrix rho = ghz_state(2, 2).first.matrix();
  const ComplexMatrix a = free_step(model, rho, t_n, 0.1, {});
  const ComplexMatrix b = free_step(frozen, rho, 0.0, 0.1, {});
  CHECK(max_abs(a - b) < 1e-14);
}

TEST_CASE("FREE rejects mismatched states and bad step sizes") {
  const auto model = dephasing_model();
  CHECK_THROWS_AS(free_step(model, ComplexMatrix::Identity(3, 3), 0.0, 0.1, {}),
                  DimensionError);
  CHECK_THROWS_AS(free_step(model, plus_state(), 0.0, -0.1, {}), ParameterError);
  CHECK_THROWS_AS(free_step(model, plus_state(), 0.0, std::nan(""), {}),
                  ParameterError);
}

TEST_CASE("STD: no jumps reduces to FREE") {
  CounterRng rng(5);
  LindbladModel model(Hamiltonian(testing::random_hermitian(4, rng)), {});
  const ComplexMatrix rho = random_state(4, rng);
  const ComplexMatrix a = std_expeuler_step(model, rho, 0.0, 0.2, {});
  const ComplexMatrix b = free_step(model, rho, 0.0, 0.2, {});
  CHECK(max_abs(a - b) < 1e-14);
}

TEST_CASE("STD: identity channel is a fixed point") {
  CounterRng rng(6);
  const Index m = 3;
  LindbladModel model(Hamiltonian(ComplexMatrix::Zero(m, m)),
                      {{1.0, ComplexMatrix::Identity(m, m)}});
  const ComplexMatrix rho = random_state(m, rng);
  CHECK(max_abs(std_expeuler_step(model, rho, 0.0, 0.3, {}) - rho) < 1e-13);
}

TEST_CASE("STD trace defect") {
  // With L = Jz on a qubit L^H L = I/4 and both schemes keep the trace.
  const ComplexMatrix qubit =
      std_expeuler_step(dephasing_model(), plus_state(), 0.0, 0.1, {});
  CHECK(trace_dev(qubit) < 1e-14);

  const auto model = spin_one_model();
  const ComplexMatrix rho0 = ghz_state(3, 1).first.matrix();
  const ComplexMatrix std_out = std_expeuler_step(model, rho0, 0.0, 0.1, {});
  const ComplexMatrix free_out = free_step(model, rho0, 0.0, 0.1, {});
  CHECK(trace_dev(std_out) > 1e-6);
  CHECK(trace_dev(free_out) < 1e-14);
  CHECK(min_eigenvalue(std_out) > -1e-14);
}

TEST_CASE("LREE: no jumps applies the unitary to the factor") {
  CounterRng rng(7);
  const ComplexMatrix h = testing::random_hermitian(5, rng);
  LindbladModel model(Hamiltonian(h), {});
  ComplexMatrix z0 = testing::random_matrix(5, 2, rng);
  z0 /= z0.norm();
  const double tau = 0.3;
  ToleranceSet tol;
  tol.compress_tol = 1e-14;
  const LowRankFactor z1 = lree_step(model, LowRankFactor(z0), 0.0, tau, tol);
  const ComplexMatrix u = (Complex(0, -tau) * h).exp();
  CHECK(z1.rank() == 2);
  CHECK(max_abs(z1.density() - u * z0 * z0.adjoint() * u.adjoint()) < 1e-13);
}

TEST_CASE("LREE: identity channel keeps the density") {
  const Index m = 4;
  LindbladModel model(Hamiltonian(ComplexMatrix::Zero(m, m)),
                      {{1.0, ComplexMatrix::Identity(m, m)}});
  CounterRng rng(8);
  ComplexMatrix z0 = testing::random_matrix(m, 2, rng);
  z0 /= z0.norm();
  const LowRankFactor z1 = lree_step(model, LowRankFactor(z0), 0.0, 0.2, {});
  CHECK(max_abs(z1.density() - z0 * z0.adjoint()) < 1e-13);
}

TEST_CASE("LREE is a second order local perturbation of FREE") {
  const auto model = dephasing_model();
  ComplexMatrix z0(2, 1);
  z0 << std::sqrt(0.5), std::sqrt(0.5);
  ToleranceSet tol;
  tol.compress_tol = 1e-14;
  std::vector<double> diffs;
  for (double tau : {0.05, 0.025}) {
    const ComplexMatrix lree =
        lree_step(model, LowRankFactor(z0), 0.0, tau, tol).density();
    const ComplexMatrix free = free_step(model, plus_state(), 0.0, tau, tol);
    diffs.push_back(testing::svd_trace_norm(lree - free));
    CHECK(diffs.back() <= tau * tau);
  }
  const double ratio = diffs[0] / diffs[1];
  CHECK(ratio > 3.0);
  CHECK(ratio < 5.0);
}

TEST_CASE("LREE matches the density form of the step") {
  CounterRng rng(12);
  for (int trial = 0; trial < 6; ++trial) {
    const Index m = 4 + trial;
    const auto model = random_model(m, 1 + trial % 2, rng);
    ComplexMatrix z0 = testing::random_matrix(m, 2, rng);
    z0 /= z0.norm();
    const double tau = 0.1;
    ToleranceSet tol;
    tol.compress_tol = trial % 2 == 0 ? 1e-12 : 1e-3;
    const LowRankFactor z1 = lree_step(model, LowRankFactor(z0), 0.0, tau, tol);
    const ComplexMatrix ref = testing::lree_density_step(
        model, z0 * z0.adjoint(), 0.0, tau, tol.compress_tol);
    CHECK(max_abs(z1.density() - ref) < 1e-10);
    CHECK(std::abs(z1.matrix().norm() - 1.0) < 1e-13);
  }
}

TEST_CASE("LREE dense and Taylor actions agree") {
  CounterRng rng(13);
  const auto model = random_model(6, 2, rng);
  ComplexMatrix z0 = testing::random_matrix(6, 2, rng);
  z0 /= z0.norm();
  ToleranceSet tol;
  tol.expm_tol = 1e-12;
  LreeOptions taylor;
  taylor.action.dense_threshold = 0;
  const ComplexMatrix a =
      lree_step(model, LowRankFactor(z0), 0.0, 0.1, tol).density();
  const ComplexMatrix b =
      lree_step(model, LowRankFactor(z0), 0.0, 0.1, tol, taylor).density();
  CHECK(max_abs(a - b) < 1e-10);
}

TEST_CASE("LREE preconditions and rank cap") {
  CounterRng rng(14);
  const auto model = random_model(4, 2, rng);
  ComplexMatrix z0 = testing::random_matrix(4, 1, rng);
  CHECK_THROWS_AS(lree_step(model, LowRankFactor(2.0 * z0 / z0.norm()), 0.0,
                            0.1, {}),
                  ParameterError);
  CHECK_THROWS_AS(lree_step(model, LowRankFactor(ComplexMatrix::Ones(3, 1) / 3.0),
                            0.0, 0.1, {}),
                  DimensionError);
  z0 /= z0.norm();
  LreeOptions capped;
  capped.max_rank = 1;
  CHECK_THROWS_AS(lree_step(model, LowRankFactor(z0), 0.0, 0.1, {}, capped),
                  SizeGuardError);
}

TEST_CASE("step plan") {
  const StepPlan plan = StepPlan::uniform(1.0, 3);
  CHECK(plan.tau == 1.0 / 3.0);
  CHECK(plan.time(3) == 3 * (1.0 / 3.0));
  CHECK(StepPlan::uniform(2.0, 0).tau == 0.0);
  CHECK_THROWS_AS(StepPlan::uniform(-1.0, 2), ParameterError);
  CHECK_THROWS_AS(StepPlan::uniform(1.0, -2), ParameterError);
  CHECK(parse_scheme("FREE") == Scheme::Free);
  CHECK(scheme_name(Scheme::Lree) == "LREE");
  CHECK_THROWS_AS(parse_scheme("EULER"), ParameterError);
}

TEST_CASE("integrate with zero steps returns the initial state") {
  const auto model = dephasing_model();
  const Trajectory traj = integrate(Scheme::Free, model, plus_state(),
                                    StepPlan::uniform(1.0, 0), {});
  REQUIRE(traj.states.size() == 1);
  CHECK(max_abs(state_density(traj.final_state()) - plus_state()) == 0.0);
}

TEST_CASE("integrate: FREE on dephasing keeps the trace and converges") {
  const auto model = dephasing_model();
  const ComplexMatrix exact = dephasing_closed_form(1.0, plus_state(), 1.0);
  std::vector<double> errors;
  for (long n : {10, 20, 40}) {
    long observed = 0;
    IntegrateOptions opts;
    opts.observers.push_back([&](long, double, const State& s) {
      ++observed;
      CHECK(trace_dev(state_density(s)) <= 1e-12);
    });
    const Trajectory traj = integrate(Scheme::Free, model, plus_state(),
                                      StepPlan::uniform(1.0, n), {}, opts);
    CHECK(observed == n + 1);
    CHECK(traj.times.back() == Catch::Approx(1.0));
    const ComplexMatrix rho = state_density(traj.final_state());
    errors.push_back(std::abs(rho(0, 1) - exact(0, 1)));
    CHECK(errors.back() <= 0.5 / n);
  }
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    const double ratio = errors[i] / errors[i + 1];
    CHECK(ratio > 1.7);
    CHECK(ratio < 2.3);
  }
}

TEST_CASE("integrate keeps snapshots on request") {
  const auto model = dephasing_model();
  IntegrateOptions opts;
  opts.snapshot_every = 2;
  const Trajectory traj = integrate(Scheme::Std, model, plus_state(),
                                    StepPlan::uniform(1.0, 5), {}, opts);
  CHECK(traj.steps == std::vector<long>{0, 2, 4, 5});
}

TEST_CASE("stepper reuse gives the same states as fresh steps") {
  QuditChainSpec spec;
  spec.d = 2;
  spec.qudits = 2;
  spec.schedule = CouplingSchedule::QuarterPower;
  const auto model = qudit_chain_model(spec, JumpKind::Jx, 0.2);
  const ComplexMatrix rho0 = ghz_state(2, 2).first.matrix();
  const StepPlan plan = StepPlan::uniform(1.0, 4);
  const Trajectory traj = integrate(Scheme::Free, model, rho0, plan, {});
  ComplexMatrix rho = rho0;
  for (long n = 0; n < plan.steps; ++n) {
    rho = free_step(model, rho, plan.time(n), plan.tau, {});
  }
  CHECK(max_abs(state_density(traj.final_state()) - rho) < 1e-15);
}

TEST_CASE("integrate reports the failing step") {
  CounterRng rng(21);
  const auto model = random_model(4, 1, rng);
  ComplexMatrix z0 = testing::random_matrix(4, 1, rng);
  z0 /= z0.norm();
  IntegrateOptions opts;
  opts.lree.max_rank = 2;
  ToleranceSet tol;
  tol.compress_tol = 1e-14;
  try {
    integrate(Scheme::Lree, model, LowRankFactor(z0), StepPlan::uniform(1.0, 10),
              tol, opts);
    FAIL("expected a step error");
  } catch (const StepError& e) {
    // rank 1 -> 2 -> 4 with one channel
    CHECK(e.step() == 2);
    CHECK(e.category() == ErrorCategory::SizeGuard);
  }
}

TEST_CASE("integrate checks scheme and state kinds") {
  const auto model = dephasing_model();
  ComplexMatrix z0(2, 1);
  z0 << 1.0, 0.0;
  CHECK_THROWS_AS(integrate(Scheme::Free, model, LowRankFactor(z0),
                            StepPlan::uniform(1.0, 1), {}),
                  ParameterError);
  CHECK_THROWS_AS(integrate(Scheme::Lree, model, plus_state(),
                            StepPlan::uniform(1.0, 1), {}),
                  ParameterError);
}
