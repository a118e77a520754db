#include <cmath>

#include <catch_amalgamated.hpp>

#include "lindexp/errors.hpp"
#include "lindexp/oracle.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace lindexp;
using lindexp::testing::max_abs;
using lindexp::testing::random_model;
using lindexp::testing::random_state;

namespace {

LindbladModel dephasing_model(double gamma) {
  return LindbladModel(Hamiltonian(ComplexMatrix::Zero(2, 2)),
                       {{gamma, qudit_jz(2)}});
}

}  // namespace

TEST_CASE("vec and unvec are inverse column stackings") {
  ComplexMatrix m(2, 2);
  m << 1, 2, 3, 4;
  const ComplexVector v = vec(m);
  CHECK(v(1) == Complex(3));
  CHECK(v(2) == Complex(2));
  CHECK(max_abs(unvec(v, 2) - m) == 0.0);
  CHECK_THROWS_AS(unvec(ComplexVector::Zero(6), 2), DimensionError);
}

TEST_CASE("superoperator of a trivial model") {
  LindbladModel model(Hamiltonian(ComplexMatrix::Zero(1, 1)), {});
  const ComplexMatrix s = superoperator(model, 0.0);
  REQUIRE(s.rows() == 1);
  CHECK(s(0, 0) == Complex(0));
}

TEST_CASE("superoperator of qubit dephasing") {
  const ComplexMatrix s = superoperator(dephasing_model(1.0), 0.0);
  Eigen::VectorXcd ev = s.eigenvalues();
  std::vector<double> re;
  for (Index i = 0; i < ev.size(); ++i) {
    CHECK(std::abs(ev(i).imag()) < 1e-14);
    re.push_back(ev(i).real());
  }
  std::sort(re.begin(), re.end());
  CHECK(std::abs(re[0] + 0.5) < 1e-14);
  CHECK(std::abs(re[1] + 0.5) < 1e-14);
  CHECK(std::abs(re[2]) < 1e-14);
  CHECK(std::abs(re[3]) < 1e-14);
}

TEST_CASE("superoperator applies the generator") {
  CounterRng rng(31);
  for (Index m : {2, 3, 5}) {
    const auto model = random_model(m, 2, rng);
    const ComplexMatrix s = superoperator(model, 0.0);
    const ComplexMatrix x = testing::random_matrix(m, m, rng);
    const ComplexMatrix lhs = unvec(s * vec(x), m);
    CHECK(max_abs(lhs - lindblad_rhs(model, 0.0, x)) < 1e-12);
    // trace preservation: vec(I)^H S = 0
    const ComplexVector id = vec(ComplexMatrix::Identity(m, m));
    CHECK((id.adjoint() * s).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(generator_norm_bound(model, 0.0) >= s.operatorNorm() - 1e-12);
  }
}

TEST_CASE("superoperator size guard") {
  LindbladModel big(Hamiltonian(ComplexMatrix::Zero(65, 65)), {});
  CHECK_THROWS_AS(superoperator(big, 0.0), SizeGuardError);
  CHECK_THROWS_AS(reference_solution(big, ComplexMatrix::Identity(65, 65) / 65.0, 1.0),
                  SizeGuardError);
  LindbladModel small(Hamiltonian(ComplexMatrix::Zero(4, 4)), {});
  CHECK_THROWS_AS(superoperator(small, 0.0, 3), SizeGuardError);
}

TEST_CASE("reference solution basics") {
  CounterRng rng(32);
  const auto model = random_model(4, 1, rng);
  const ComplexMatrix rho = random_state(4, rng);
  CHECK(max_abs(reference_solution(model, rho, 0.0) - rho) < 1e-15);

  LindbladModel still(Hamiltonian(ComplexMatrix::Zero(4, 4)), {});
  CHECK(max_abs(reference_solution(still, rho, 3.0) - rho) < 1e-15);

  CHECK(max_abs(reference_solution(model, rho, 0.7) -
                testing::vectorized_evolution(model, rho, 0.7)) < 1e-12);
}

TEST_CASE("reference solution on dephasing") {
  const auto model = dephasing_model(1.0);
  const ComplexMatrix rho0 = ComplexMatrix::Constant(2, 2, 0.5);
  const ComplexMatrix rho = reference_solution(model, rho0, 1.0);
  CHECK(std::abs(rho(0, 1) - 0.5 * std::exp(-0.5)) < 1e-10);
  CHECK(std::abs(rho(0, 0) - 0.5) < 1e-14);
}

TEST_CASE("reference solution rejects time-dependent Hamiltonians") {
  QuditChainSpec spec;
  spec.d = 2;
  spec.qudits = 2;
  spec.schedule = CouplingSchedule::ExpDecay;
  const auto model = qudit_chain_model(spec, JumpKind::Jz, 0.1);
  CHECK_THROWS_AS(reference_solution(model, ghz_state(2, 2).first.matrix(), 1.0),
                  ParameterError);
}

TEST_CASE("dephasing closed form") {
  const ComplexMatrix rho0 = ComplexMatrix::Constant(2, 2, 0.5);
  const ComplexMatrix at_zero = dephasing_closed_form(1.0, rho0, 0.0);
  CHECK(max_abs(at_zero - rho0) == 0.0);
  const ComplexMatrix at_one = dephasing_closed_form(1.0, rho0, 1.0);
  CHECK(std::abs(at_one(0, 1) - 0.5 * std::exp(-0.5)) < 1e-15);
  CHECK(std::abs(at_one(1, 0) - 0.5 * std::exp(-0.5)) < 1e-15);

  CounterRng rng(33);
  const auto model = dephasing_model(0.8);
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexMatrix rho = random_state(2, rng);
    for (double t : {0.1, 1.0, 5.0}) {
      CHECK(max_abs(dephasing_closed_form(0.8, rho, t) -
                    testing::vectorized_evolution(model, rho, t)) < 1e-12);
    }
  }
  CHECK_THROWS_AS(dephasing_closed_form(-1.0, rho0, 1.0), ParameterError);
  CHECK_THROWS_AS(dephasing_closed_form(1.0, ComplexMatrix::Identity(3, 3), 1.0),
                  DimensionError);
}

TEST_CASE("substep oracle on a constant Hamiltonian") {
  CounterRng rng(34);
  const auto model = random_model(4, 2, rng);
  const ComplexMatrix rho = random_state(4, rng);
  const auto res = substep_propagate(model, rho, 0.0, 1.0, 64);
  CHECK(max_abs(res.rho - reference_solution(model, rho, 1.0)) < 1e-12);

  LindbladModel still(Hamiltonian(ComplexMatrix::Zero(4, 4)), {});
  CHECK(max_abs(substep_propagate(still, rho, 0.0, 2.0, 8).rho - rho) < 1e-15);
}

TEST_CASE("substep oracle is second order in the substep") {
  QuditChainSpec spec;
  spec.d = 2;
  spec.qudits = 2;
  spec.schedule = CouplingSchedule::Sin2Pi;
  spec.topology = CouplingTopology::NearestNeighbor;
  const auto model = qudit_chain_model(spec, JumpKind::Jz, 0.2);
  const ComplexMatrix rho0 = ghz_state(2, 2).first.matrix();
  const ComplexMatrix fine = substep_propagate(model, rho0, 0.0, 1.0, 16384).rho;
  const double e1 = trace_norm(substep_propagate(model, rho0, 0.0, 1.0, 32).rho - fine);
  const double e2 = trace_norm(substep_propagate(model, rho0, 0.0, 1.0, 64).rho - fine);
  CHECK(e1 / e2 > 3.5);
  CHECK(e1 / e2 < 4.5);

  SubstepOracleOptions opts;
  opts.substeps = 4096;
  const auto checked = reference_solution_timedep(model, rho0, 1.0, opts);
  CHECK(checked.self_check_drift < 1e-8);
  CHECK(trace_norm(checked.rho - fine) < 1e-8);

  opts.substeps = 4;
  CHECK_THROWS_AS(reference_solution_timedep(model, rho0, 1.0, opts),
                  ConvergenceError);
}

TEST_CASE("RK4 leaves a zero generator alone and has fifth order local error") {
  const ComplexVector v = ComplexVector::LinSpaced(4, 0.0, 1.0);
  const SuperopApplier zero = [](const ComplexVector& x) {
    return ComplexVector(ComplexVector::Zero(x.size()));
  };
  CHECK((rk4_vectorized_step(zero, v, 0.3) - v).norm() == 0.0);

  CounterRng rng(35);
  const auto model = random_model(3, 1, rng);
  const ComplexMatrix s = superoperator(model, 0.0);
  const SuperopApplier apply = [&](const ComplexVector& x) {
    return ComplexVector(s * x);
  };
  const ComplexVector rho = vec(random_state(3, rng));
  std::vector<double> taus = {0.2, 0.1, 0.05};
  std::vector<double> errs;
  for (double tau : taus) {
    const ComplexVector exact = (tau * s).exp() * rho;
    errs.push_back((rk4_vectorized_step(apply, rho, tau) - exact).norm());
  }
  const double slope = std::log(errs[0] / errs[2]) / std::log(taus[0] / taus[2]);
  CHECK(slope > 4.7);
  CHECK(slope < 5.3);
}
