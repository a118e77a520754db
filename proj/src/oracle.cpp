#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "lindexp/errors.hpp"
#include "lindexp/oracle.hpp"

namespace lindexp {

namespace {

constexpr Complex kI{0.0, 1.0};

void guard(const LindbladModel& model, Index max_dim) {
  if (model.dim() > max_dim) {
    throw SizeGuardError("oracle: state dimension " +
                         std::to_string(model.dim()) + " exceeds the guard " +
                         std::to_string(max_dim));
  }
}

double spectral_norm(const ComplexMatrix& m) {
  Eigen::BDCSVD<ComplexMatrix> svd(m);
  return svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
}

}  // namespace

ComplexVector vec(const ComplexMatrix& m) {
  return Eigen::Map<const ComplexVector>(m.data(), m.size());
}

ComplexMatrix unvec(const ComplexVector& v, Index m) {
  if (v.size() != m * m) {
    throw DimensionError("unvec: vector of length " + std::to_string(v.size()) +
                         " is not " + std::to_string(m) + "^2");
  }
  return Eigen::Map<const ComplexMatrix>(v.data(), m, m);
}

ComplexMatrix superoperator(const LindbladModel& model, double t,
                            Index max_dim) {
  guard(model, max_dim);
  const Index m = model.dim();
  const ComplexMatrix ident = ComplexMatrix::Identity(m, m);
  const ComplexMatrix h = model.hamiltonian().at(t);
  ComplexMatrix gen = -kI * kron(ident, h) + kI * kron(h.transpose(), ident);
  for (const auto& ch : model.channels()) {
    if (ch.gamma == 0.0) {
      continue;
    }
    const ComplexMatrix& l = ch.jump;
    gen += ch.gamma * (kron(l.conjugate(), l) -
                       0.5 * kron(ident, l.adjoint() * l) -
                       0.5 * kron(l.transpose() * l.conjugate(), ident));
  }
  return gen;
}

ComplexMatrix lindblad_rhs(const LindbladModel& model, double t,
                           const ComplexMatrix& rho) {
  const ComplexMatrix h = model.hamiltonian().at(t);
  const ComplexMatrix a = -kI * h - 0.5 * model.dissipation_generator();
  ComplexMatrix out = a * rho + rho * a.adjoint();
  for (const auto& ch : model.channels()) {
    if (ch.gamma != 0.0) {
      out += ch.gamma * ch.jump * rho * ch.jump.adjoint();
    }
  }
  return out;
}

namespace {

// ||L(t)|| <= 2 (||H_0|| + sum_j |g_j(t)| ||H_j||) + 2 sum_k gamma_k ||L_k||^2,
// with the spectral norms computed once.
class GeneratorNormBound {
 public:
  explicit GeneratorNormBound(const LindbladModel& model) : model_(model) {
    h0_ = spectral_norm(model.hamiltonian().constant_part());
    for (const auto& term : model.hamiltonian().terms()) {
      terms_.push_back(spectral_norm(term.op));
    }
    for (const auto& ch : model.channels()) {
      if (ch.gamma != 0.0) {
        const double l = spectral_norm(ch.jump);
        dissipative_ += 2.0 * ch.gamma * l * l;
      }
    }
  }

  double at(double t) const {
    double h = h0_;
    const auto& terms = model_.hamiltonian().terms();
    for (std::size_t j = 0; j < terms.size(); ++j) {
      h += std::abs(coupling_strength(terms[j].schedule, terms[j].g, t)) *
           terms_[j];
    }
    return 2.0 * h + dissipative_;
  }

 private:
  const LindbladModel& model_;
  double h0_ = 0.0;
  std::vector<double> terms_;
  double dissipative_ = 0.0;
};

}  // namespace

double generator_norm_bound(const LindbladModel& model, double t) {
  return GeneratorNormBound(model).at(t);
}

ComplexMatrix reference_solution(const LindbladModel& model,
                                 const ComplexMatrix& rho0, double horizon,
                                 Index max_dim) {
  guard(model, max_dim);
  if (!model.hamiltonian().is_constant()) {
    throw ParameterError(
        "reference_solution: Hamiltonian is time dependent, use the substep "
        "oracle");
  }
  const Index m = model.dim();
  if (rho0.rows() != m || rho0.cols() != m) {
    throw DimensionError("reference_solution: initial state does not match");
  }
  if (horizon == 0.0) {
    return hermitize(rho0);
  }
  const ComplexMatrix gen = superoperator(model, 0.0, max_dim);
  const ComplexVector out = expm(horizon * gen) * vec(rho0);
  return hermitize(unvec(out, m));
}

SubstepOracleResult substep_propagate(const LindbladModel& model,
                                      const ComplexMatrix& rho0, double t0,
                                      double horizon, long substeps,
                                      Index max_dim) {
  guard(model, max_dim);
  if (substeps < 1) {
    throw ParameterError("substep oracle: substeps must be >= 1");
  }
  const Index m = model.dim();
  if (rho0.rows() != m || rho0.cols() != m) {
    throw DimensionError("substep oracle: initial state does not match");
  }
  const double h = horizon / static_cast<double>(substeps);
  ComplexMatrix rho = rho0;
  if (h == 0.0) {
    return {hermitize(rho), 0.0};
  }
  const GeneratorNormBound norm_bound(model);
  for (long s = 0; s < substeps; ++s) {
    const double t_mid = t0 + (static_cast<double>(s) + 0.5) * h;
    const double bound = norm_bound.at(t_mid);
    const ComplexMatrix hmat = model.hamiltonian().at(t_mid);
    const ComplexMatrix a = -kI * hmat - 0.5 * model.dissipation_generator();
    const ComplexMatrix a_adj = a.adjoint();
    rho = taylor_action(
        [&](const ComplexMatrix& x) -> ComplexMatrix {
          ComplexMatrix y = a * x + x * a_adj;
          for (const auto& ch : model.channels()) {
            if (ch.gamma != 0.0) {
              y += ch.gamma * ch.jump * x * ch.jump.adjoint();
            }
          }
          return h * y;
        },
        h * bound, rho, kUnitRoundoff);
  }
  return {hermitize(rho), 0.0};
}

SubstepOracleResult reference_solution_timedep(
    const LindbladModel& model, const ComplexMatrix& rho0, double horizon,
    const SubstepOracleOptions& options) {
  SubstepOracleResult coarse = substep_propagate(
      model, rho0, 0.0, horizon, options.substeps, options.max_dim);
  if (!options.self_check) {
    return coarse;
  }
  SubstepOracleResult fine = substep_propagate(
      model, rho0, 0.0, horizon, 2 * options.substeps, options.max_dim);
  fine.self_check_drift = trace_norm(fine.rho - coarse.rho);
  if (!(fine.self_check_drift < options.self_check_tol)) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "substep oracle: doubling %ld substeps moved the solution by "
                  "%.3e in trace norm (limit %.1e)",
                  options.substeps, fine.self_check_drift,
                  options.self_check_tol);
    throw ConvergenceError(buf);
  }
  return fine;
}

ComplexMatrix dephasing_closed_form(double gamma, const ComplexMatrix& rho0,
                                    double t) {
  if (rho0.rows() != 2 || rho0.cols() != 2) {
    throw DimensionError("dephasing_closed_form: state must be 2x2");
  }
  if (!(gamma >= 0.0)) {
    throw ParameterError("dephasing_closed_form: rate must be >= 0");
  }
  const double decay = std::exp(-0.5 * gamma * t);
  ComplexMatrix out = rho0;
  out(0, 1) *= decay;
  out(1, 0) *= decay;
  return out;
}

ComplexVector rk4_vectorized_step(const SuperopApplier& apply,
                                  const ComplexVector& rho_vec, double tau) {
  const ComplexVector k1 = apply(rho_vec);
  const ComplexVector k2 = apply(rho_vec + 0.5 * tau * k1);
  const ComplexVector k3 = apply(rho_vec + 0.5 * tau * k2);
  const ComplexVector k4 = apply(rho_vec + tau * k3);
  return rho_vec + (tau / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace lindexp
