#include <cmath>
#include <vector>

#include <catch_amalgamated.hpp>

#include "lindexp/integrators.hpp"
#include "lindexp/oracle.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace lindexp;
using lindexp::testing::random_hermitian;
using lindexp::testing::random_matrix;
using lindexp::testing::random_model;
using lindexp::testing::random_state;

namespace {

double hermiticity_defect(const ComplexMatrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("drift propagators contract the trace norm") {
  CounterRng rng(101);
  for (int trial = 0; trial < 50; ++trial) {
    const Index m = 2 + trial % 7;
    const auto model = random_model(m, 1 + trial % 3, rng);
    const ComplexMatrix a = effective_drift(model, 0.0).matrix;
    const ComplexMatrix rho = random_hermitian(m, rng);
    const double before = trace_norm(rho);
    for (double t : {0.1, 1.0, 5.0}) {
      const ComplexMatrix e = expm(t * a);
      CHECK(trace_norm(e * rho * e.adjoint()) <= before + 1e-10);
    }
  }
}

TEST_CASE("sandwich inequality with |rho|") {
  CounterRng rng(102);
  for (int trial = 0; trial < 50; ++trial) {
    const Index m = 2 + trial % 6;
    const ComplexMatrix b = random_matrix(m, m, rng);
    const ComplexMatrix rho = random_hermitian(m, rng);
    CHECK(trace_norm(b * rho * b.adjoint()) <=
          trace_norm(b * hermitian_abs(rho) * b.adjoint()) + 1e-10);
  }
}

TEST_CASE("one FREE step does not increase the trace norm") {
  CounterRng rng(103);
  for (int trial = 0; trial < 50; ++trial) {
    const Index m = 2 + trial % 7;
    const auto model = random_model(m, 1 + trial % 3, rng);
    const ComplexMatrix rho = random_hermitian(m, rng);
    for (double tau : {0.1, 1.0}) {
      CHECK(trace_norm(free_step(model, rho, 0.0, tau, {})) <=
            trace_norm(rho) + 1e-10);
    }
  }
}

TEST_CASE("trace identity through the Lyapunov form") {
  CounterRng rng(104);
  for (int trial = 0; trial < 50; ++trial) {
    const Index m = 2 + trial % 7;
    const auto model = random_model(m, 1 + trial % 3, rng);
    const ComplexMatrix a = effective_drift(model, 0.0).matrix;
    const ComplexMatrix rho = random_hermitian(m, rng);
    for (double t : {0.1, 1.0}) {
      const ComplexMatrix e = expm(t * a);
      const ComplexMatrix s = e * rho * e.adjoint();
      const ComplexMatrix w = solve_lyapunov(a, hermitize(s - rho));
      Complex total = s.trace();
      for (const auto& ch : model.channels()) {
        total += ch.gamma * (ch.jump * w * ch.jump.adjoint()).trace();
      }
      CHECK(std::abs(total - rho.trace()) <= 1e-10);
    }
  }
}

TEST_CASE("FREE keeps positivity and trace for any step size") {
  CounterRng rng(105);
  for (Index m : {2, 5, 9, 16}) {
    const auto model = random_model(m, 2, rng);
    const ComplexMatrix rho0 = random_state(m, rng, 1);
    for (double tau : {0.01, 0.1, 1.0, 10.0}) {
      double worst_eig = 1.0;
      double worst_trace = 0.0;
      double worst_herm = 0.0;
      IntegrateOptions opts;
      opts.observers.push_back([&](long, double, const State& s) {
        const ComplexMatrix& rho = std::get<ComplexMatrix>(s);
        worst_eig = std::min(worst_eig, min_eigenvalue(rho));
        worst_trace = std::max(worst_trace, std::abs(rho.trace().real() - 1.0));
        worst_herm = std::max(worst_herm, hermiticity_defect(rho));
      });
      integrate(Scheme::Free, model, rho0, StepPlan::uniform(500 * tau, 500), {},
                opts);
      INFO("m=" << m << " tau=" << tau);
      CHECK(worst_eig >= -1e-10);
      CHECK(worst_trace <= 1e-12);
      CHECK(worst_herm <= 1e-12);
    }
  }
}

TEST_CASE("STD keeps positivity but not the trace") {
  CounterRng rng(106);
  const auto model = random_model(6, 2, rng);
  const ComplexMatrix rho0 = random_state(6, rng);
  const Trajectory traj = integrate(Scheme::Std, model, rho0,
                                    StepPlan::uniform(5.0, 10), {});
  const ComplexMatrix rho = std::get<ComplexMatrix>(traj.final_state());
  CHECK(min_eigenvalue(rho) >= -1e-10);
  CHECK(std::abs(rho.trace().real() - 1.0) > 1e-8);
}

TEST_CASE("LREE factors stay normalized with bounded rank") {
  CounterRng rng(107);
  for (Index m : {3, 6, 10}) {
    const auto model = random_model(m, 2, rng);
    ComplexMatrix z0 = random_matrix(m, 1, rng);
    z0 /= z0.norm();
    for (double tau : {0.01, 0.1, 1.0}) {
      double worst_norm = 0.0;
      Index worst_rank = 0;
      IntegrateOptions opts;
      opts.observers.push_back([&](long n, double, const State& s) {
        const auto& z = std::get<LowRankFactor>(s);
        if (n > 0) {
          worst_norm = std::max(worst_norm, std::abs(z.matrix().norm() - 1.0));
        }
        worst_rank = std::max(worst_rank, z.rank());
      });
      integrate(Scheme::Lree, model, LowRankFactor(z0),
                StepPlan::uniform(100 * tau, 100), lree_default_tolerances(tau),
                opts);
      CHECK(worst_norm <= 1e-13);
      CHECK(worst_rank <= m);
    }
  }
}

TEST_CASE("FREE steps equal the quadrature form on random models") {
  CounterRng rng(108);
  for (int trial = 0; trial < 10; ++trial) {
    const Index m = 2 + trial % 7;
    const auto model = random_model(m, 1 + trial % 3, rng, 2.0, 1.0);
    const ComplexMatrix rho = random_state(m, rng);
    const double t_n = 0.0;
    for (double tau : {0.01, 0.3, 1.0}) {
      const ComplexMatrix ref =
          testing::free_step_by_quadrature(model, rho, t_n, tau, 32);
      CHECK(trace_norm(free_step(model, rho, t_n, tau, {}) - ref) <= 1e-8);
    }
  }
}

TEST_CASE("LREE factors equal the density-form sequence") {
  CounterRng rng(109);
  for (int trial = 0; trial < 8; ++trial) {
    const Index m = 2 + trial % 7;
    const auto model = random_model(m, 1 + trial % 2, rng);
    ComplexMatrix z0 = random_matrix(m, 1, rng);
    z0 /= z0.norm();
    const double tau = 0.05;
    ToleranceSet tol;
    tol.compress_tol = trial % 2 == 0 ? 1e-13 : 1e-4;
    LowRankFactor z(z0);
    ComplexMatrix rho = z0 * z0.adjoint();
    for (int n = 0; n < 10; ++n) {
      z = lree_step(model, z, n * tau, tau, tol);
      rho = testing::lree_density_step(model, rho, n * tau, tau, tol.compress_tol);
    }
    INFO("trial " << trial);
    CHECK(testing::max_abs(z.density() - rho) <= 1e-10);
  }
}

TEST_CASE("Lyapunov solutions of Hermitian data are Hermitian") {
  CounterRng rng(110);
  for (int trial = 0; trial < 20; ++trial) {
    const Index m = 2 + trial % 9;
    const auto model = random_model(m, 2, rng);
    const ComplexMatrix w =
        solve_lyapunov(effective_drift(model, 0.0).matrix, random_hermitian(m, rng));
    CHECK(hermiticity_defect(w) == 0.0);
  }
}

TEST_CASE("truncation bound holds across tolerances") {
  CounterRng rng(111);
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexMatrix z = random_matrix(8, 1 + trial % 6, rng, 0.3);
    for (double tol2 : {1e-12, 1e-6, 1e-3, 1e-1, 1.0}) {
      const ComplexMatrix zh = truncated_svd(z, tol2);
      CHECK(zh.cols() >= 1);
      CHECK(trace_norm(z * z.adjoint() - zh * zh.adjoint()) <= tol2 + 1e-12);
    }
  }
}
