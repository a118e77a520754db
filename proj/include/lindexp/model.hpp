#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lindexp/linalg.hpp"

namespace lindexp {

// Closed set of coupling strengths g(t) used by the qudit-chain experiments.
enum class CouplingSchedule {
  Constant,      // g
  QuarterPower,  // (1 + t)^(1/4)
  ExpDecay,      // exp(-t)
  Sin2Pi,        // sin(2 pi t)
  TenSin10Pi,    // 10 sin(10 pi t)
};

enum class CouplingTopology {
  AllPairs,
  NearestNeighbor,
};

CouplingSchedule parse_schedule(std::string_view name);
std::string_view schedule_name(CouplingSchedule schedule);
CouplingTopology parse_topology(std::string_view name);
std::string_view topology_name(CouplingTopology topology);

// `g` only scales the Constant schedule.
double coupling_strength(CouplingSchedule schedule, double g, double t);

struct ScheduledTerm {
  CouplingSchedule schedule = CouplingSchedule::Constant;
  double g = 1.0;
  ComplexMatrix op;
};

/// H(t) = H_0 + sum_j g_j(t) H_j with Hermitian H_0, H_j.
class Hamiltonian {
 public:
  Hamiltonian() = default;
  explicit Hamiltonian(ComplexMatrix constant,
                       std::vector<ScheduledTerm> terms = {});

  ComplexMatrix at(double t) const;
  bool is_constant() const;
  Index dim() const { return constant_.rows(); }
  const ComplexMatrix& constant_part() const { return constant_; }
  const std::vector<ScheduledTerm>& terms() const { return terms_; }

 private:
  ComplexMatrix constant_;
  std::vector<ScheduledTerm> terms_;
};

struct Channel {
  double gamma = 0.0;
  ComplexMatrix jump;
};

/// Lindblad problem: Hamiltonian plus dissipation channels (gamma_k, L_k).
/// Immutable once built; the constructor checks rates, shapes and Hermiticity.
class LindbladModel {
 public:
  LindbladModel(Hamiltonian hamiltonian, std::vector<Channel> channels);

  Index dim() const { return hamiltonian_.dim(); }
  const Hamiltonian& hamiltonian() const { return hamiltonian_; }
  const std::vector<Channel>& channels() const { return channels_; }
  bool has_dissipation() const;

  // sum_k gamma_k L_k^H L_k
  const ComplexMatrix& dissipation_generator() const { return dissipation_; }

 private:
  Hamiltonian hamiltonian_;
  std::vector<Channel> channels_;
  ComplexMatrix dissipation_;
};

struct EffectiveDrift {
  ComplexMatrix matrix;
  double evaluated_at = 0.0;
};

// A(t) = -i H(t) - 1/2 sum_k gamma_k L_k^H L_k
EffectiveDrift effective_drift(const LindbladModel& model, double t);

/// Hermitian, unit-trace, positive semidefinite matrix.
class DensityMatrix {
 public:
  // Validates: Hermitian to 1e-12, |Tr - 1| <= 1e-12, min eigenvalue >= -1e-10.
  explicit DensityMatrix(ComplexMatrix rho);

  const ComplexMatrix& matrix() const { return rho_; }
  Index dim() const { return rho_.rows(); }

 private:
  ComplexMatrix rho_;
};

/// Factor Z of a low-rank state rho = Z Z^H, Z is m x r with r >= 1.
class LowRankFactor {
 public:
  explicit LowRankFactor(ComplexMatrix z);

  const ComplexMatrix& matrix() const { return z_; }
  Index dim() const { return z_.rows(); }
  Index rank() const { return z_.cols(); }
  ComplexMatrix density() const { return z_ * z_.adjoint(); }

 private:
  ComplexMatrix z_;
};

struct QuditChainSpec {
  int d = 2;
  int qudits = 1;
  double a = 1.0;
  double b = 0.0;
  CouplingSchedule schedule = CouplingSchedule::Constant;
  double g = 1.0;
  CouplingTopology topology = CouplingTopology::AllPairs;

  Index dim() const;
  void validate() const;
};

ComplexMatrix qudit_jx(int d);
ComplexMatrix qudit_jz(int d);

// I_d x ... x op x ... x I_d with `op` in slot `site` (1-based) of `qudits`.
ComplexMatrix lift_site_operator(const ComplexMatrix& op, int site, int qudits);

// sum_k (a Jz^(k) + b (Jz^(k))^2) + sum_{k<l} g_kl(t) Jx^(k) Jx^(l)
Hamiltonian ising_chain_hamiltonian(const QuditChainSpec& spec);

enum class JumpKind { Jz, Jx, Random };

JumpKind parse_jump_kind(std::string_view name);
std::string_view jump_kind_name(JumpKind kind);

/// One channel per qudit with rate `gamma`: L_k = Jz^(k), Jx^(k), or a dense
/// i.i.d. standard complex Gaussian matrix scaled by 1/sqrt(m).
std::vector<Channel> chain_channels(const QuditChainSpec& spec, JumpKind kind,
                                    double gamma, std::uint64_t seed = 0);

LindbladModel qudit_chain_model(const QuditChainSpec& spec, JumpKind kind,
                                double gamma, std::uint64_t seed = 0);

// Dense m x m matrix with i.i.d. standard complex Gaussian entries / sqrt(m).
ComplexMatrix random_dense_operator(Index m, std::uint64_t seed,
                                    std::uint64_t stream = 0);

std::pair<DensityMatrix, LowRankFactor> ghz_state(int d, int qudits);

/// rho_0 = (1 - delta/2) q1 q1^T + (delta/2) q2 q2^T with q1, q2 the left
/// singular vectors of a seeded random m x 2 real matrix, and Z_0 = q1.
std::pair<DensityMatrix, LowRankFactor> perturbed_lowrank_state(
    Index m, double delta, std::uint64_t seed = 0);

}  // namespace lindexp
