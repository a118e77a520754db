#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include <Eigen/SVD>

#include "lindexp/errors.hpp"
#include "lindexp/model.hpp"
#include "lindexp/rng.hpp"

namespace lindexp {

namespace {

constexpr Complex kI{0.0, 1.0};

struct ScheduleEntry {
  CouplingSchedule schedule;
  std::string_view name;
};
constexpr ScheduleEntry kSchedules[] = {
    {CouplingSchedule::Constant, "constant"},
    {CouplingSchedule::QuarterPower, "quarter_power"},
    {CouplingSchedule::ExpDecay, "exp_decay"},
    {CouplingSchedule::Sin2Pi, "sin_2pi"},
    {CouplingSchedule::TenSin10Pi, "ten_sin_10pi"},
};

}  // namespace

CouplingSchedule parse_schedule(std::string_view name) {
  for (const auto& entry : kSchedules) {
    if (entry.name == name) {
      return entry.schedule;
    }
  }
  throw ParameterError("unknown coupling schedule '" + std::string(name) + "'");
}

std::string_view schedule_name(CouplingSchedule schedule) {
  for (const auto& entry : kSchedules) {
    if (entry.schedule == schedule) {
      return entry.name;
    }
  }
  return "unknown";
}

CouplingTopology parse_topology(std::string_view name) {
  if (name == "all_pairs") {
    return CouplingTopology::AllPairs;
  }
  if (name == "nearest_neighbor") {
    return CouplingTopology::NearestNeighbor;
  }
  throw ParameterError("unknown coupling topology '" + std::string(name) + "'");
}

std::string_view topology_name(CouplingTopology topology) {
  return topology == CouplingTopology::AllPairs ? "all_pairs"
                                                : "nearest_neighbor";
}

double coupling_strength(CouplingSchedule schedule, double g, double t) {
  switch (schedule) {
    case CouplingSchedule::Constant:
      return g;
    case CouplingSchedule::QuarterPower:
      return std::pow(1.0 + t, 0.25);
    case CouplingSchedule::ExpDecay:
      return std::exp(-t);
    case CouplingSchedule::Sin2Pi:
      return std::sin(2.0 * std::numbers::pi * t);
    case CouplingSchedule::TenSin10Pi:
      return 10.0 * std::sin(10.0 * std::numbers::pi * t);
  }
  return 0.0;
}

Hamiltonian::Hamiltonian(ComplexMatrix constant,
                         std::vector<ScheduledTerm> terms)
    : constant_(std::move(constant)), terms_(std::move(terms)) {
  if (constant_.rows() != constant_.cols()) {
    throw DimensionError("hamiltonian: constant part is not square");
  }
  require_finite(constant_, "hamiltonian");
  if (!is_hermitian(constant_)) {
    throw ParameterError("hamiltonian: constant part is not Hermitian");
  }
  for (const auto& term : terms_) {
    if (term.op.rows() != dim() || term.op.cols() != dim()) {
      throw DimensionError("hamiltonian: scheduled term has wrong shape");
    }
    require_finite(term.op, "hamiltonian term");
    if (!is_hermitian(term.op)) {
      throw ParameterError("hamiltonian: scheduled term is not Hermitian");
    }
  }
}

ComplexMatrix Hamiltonian::at(double t) const {
  ComplexMatrix h = constant_;
  for (const auto& term : terms_) {
    h += coupling_strength(term.schedule, term.g, t) * term.op;
  }
  return h;
}

bool Hamiltonian::is_constant() const {
  for (const auto& term : terms_) {
    if (term.schedule != CouplingSchedule::Constant) {
      return false;
    }
  }
  return true;
}

LindbladModel::LindbladModel(Hamiltonian hamiltonian,
                             std::vector<Channel> channels)
    : hamiltonian_(std::move(hamiltonian)), channels_(std::move(channels)) {
  const Index m = dim();
  if (m < 1) {
    throw DimensionError("model: empty Hamiltonian");
  }
  dissipation_ = ComplexMatrix::Zero(m, m);
  for (std::size_t k = 0; k < channels_.size(); ++k) {
    const auto& ch = channels_[k];
    if (!(ch.gamma >= 0.0) || !std::isfinite(ch.gamma)) {
      throw ParameterError("model: channel " + std::to_string(k + 1) +
                           " has invalid rate");
    }
    if (ch.jump.rows() != m || ch.jump.cols() != m) {
      throw DimensionError("model: jump operator " + std::to_string(k + 1) +
                           " is not " + std::to_string(m) + "x" +
                           std::to_string(m));
    }
    require_finite(ch.jump, "jump operator");
    dissipation_ += ch.gamma * ch.jump.adjoint() * ch.jump;
  }
}

bool LindbladModel::has_dissipation() const {
  for (const auto& ch : channels_) {
    if (ch.gamma > 0.0) {
      return true;
    }
  }
  return false;
}

EffectiveDrift effective_drift(const LindbladModel& model, double t) {
  ComplexMatrix h = model.hamiltonian().at(t);
  if (!is_hermitian(h)) {
    throw ParameterError("effective_drift: H(t) is not Hermitian at t = " +
                         std::to_string(t));
  }
  return {-kI * h - 0.5 * model.dissipation_generator(), t};
}

DensityMatrix::DensityMatrix(ComplexMatrix rho) : rho_(std::move(rho)) {
  if (rho_.rows() != rho_.cols() || rho_.rows() == 0) {
    throw DimensionError("density matrix must be square and non-empty");
  }
  require_finite(rho_, "density matrix");
  if (!is_hermitian(rho_)) {
    throw ParameterError("density matrix is not Hermitian");
  }
  const double trace = rho_.trace().real();
  if (std::abs(trace - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg << "density matrix trace is " << trace;
    throw ParameterError(msg.str());
  }
  const double lambda = min_eigenvalue(rho_);
  if (lambda < -1e-10) {
    std::ostringstream msg;
    msg << "density matrix has eigenvalue " << lambda;
    throw ParameterError(msg.str());
  }
}

LowRankFactor::LowRankFactor(ComplexMatrix z) : z_(std::move(z)) {
  if (z_.rows() < 1 || z_.cols() < 1) {
    throw DimensionError("low-rank factor must have at least one column");
  }
  require_finite(z_, "low-rank factor");
}

Index QuditChainSpec::dim() const {
  Index m = 1;
  for (int k = 0; k < qudits; ++k) {
    m *= d;
  }
  return m;
}

void QuditChainSpec::validate() const {
  if (d < 2) {
    throw ParameterError("qudit chain: d must be >= 2");
  }
  if (qudits < 1) {
    throw ParameterError("qudit chain: K must be >= 1");
  }
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(g)) {
    throw ParameterError("qudit chain: a, b and g must be finite");
  }
}

ComplexMatrix qudit_jx(int d) {
  if (d < 2) {
    throw ParameterError("qudit_jx: d must be >= 2");
  }
  ComplexMatrix jx = ComplexMatrix::Zero(d, d);
  for (int j = 1; j < d; ++j) {
    const double v = 0.5 * std::sqrt(static_cast<double>(j) * (d - j));
    jx(j - 1, j) = v;
    jx(j, j - 1) = v;
  }
  return jx;
}

ComplexMatrix qudit_jz(int d) {
  if (d < 2) {
    throw ParameterError("qudit_jz: d must be >= 2");
  }
  ComplexMatrix jz = ComplexMatrix::Zero(d, d);
  for (int j = 0; j < d; ++j) {
    jz(j, j) = 0.5 * (d - 1 - 2 * j);
  }
  return jz;
}

ComplexMatrix lift_site_operator(const ComplexMatrix& op, int site,
                                 int qudits) {
  if (op.rows() != op.cols()) {
    throw DimensionError("lift_site_operator: operator is not square");
  }
  if (site < 1 || site > qudits) {
    throw ParameterError("lift_site_operator: site " + std::to_string(site) +
                         " outside 1.." + std::to_string(qudits));
  }
  const Index d = op.rows();
  Index left = 1;
  for (int k = 1; k < site; ++k) {
    left *= d;
  }
  Index right = 1;
  for (int k = site; k < qudits; ++k) {
    right *= d;
  }
  return kron(kron(ComplexMatrix::Identity(left, left), op),
              ComplexMatrix::Identity(right, right));
}

Hamiltonian ising_chain_hamiltonian(const QuditChainSpec& spec) {
  spec.validate();
  const Index m = spec.dim();
  const ComplexMatrix jz = qudit_jz(spec.d);
  const ComplexMatrix jx = qudit_jx(spec.d);
  const ComplexMatrix local = spec.a * jz + spec.b * jz * jz;

  ComplexMatrix drift = ComplexMatrix::Zero(m, m);
  std::vector<ComplexMatrix> jx_lifted;
  for (int k = 1; k <= spec.qudits; ++k) {
    drift += lift_site_operator(local, k, spec.qudits);
    jx_lifted.push_back(lift_site_operator(jx, k, spec.qudits));
  }

  ComplexMatrix interaction = ComplexMatrix::Zero(m, m);
  for (int k = 0; k < spec.qudits; ++k) {
    for (int l = k + 1; l < spec.qudits; ++l) {
      if (spec.topology == CouplingTopology::NearestNeighbor && l != k + 1) {
        continue;
      }
      interaction += jx_lifted[k] * jx_lifted[l];
    }
  }

  if (spec.schedule == CouplingSchedule::Constant) {
    return Hamiltonian(drift + spec.g * interaction);
  }
  return Hamiltonian(drift, {{spec.schedule, spec.g, interaction}});
}

JumpKind parse_jump_kind(std::string_view name) {
  if (name == "jz") {
    return JumpKind::Jz;
  }
  if (name == "jx") {
    return JumpKind::Jx;
  }
  if (name == "random") {
    return JumpKind::Random;
  }
  throw ParameterError("unknown jump operator kind '" + std::string(name) +
                       "'");
}

std::string_view jump_kind_name(JumpKind kind) {
  switch (kind) {
    case JumpKind::Jz:
      return "jz";
    case JumpKind::Jx:
      return "jx";
    case JumpKind::Random:
      return "random";
  }
  return "unknown";
}

ComplexMatrix random_dense_operator(Index m, std::uint64_t seed,
                                    std::uint64_t stream) {
  CounterRng rng(seed, stream);
  const double scale = std::sqrt(0.5 / static_cast<double>(m));
  ComplexMatrix out(m, m);
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < m; ++i) {
      const double re = rng.normal();
      const double im = rng.normal();
      out(i, j) = scale * Complex(re, im);
    }
  }
  return out;
}

std::vector<Channel> chain_channels(const QuditChainSpec& spec, JumpKind kind,
                                    double gamma, std::uint64_t seed) {
  spec.validate();
  std::vector<Channel> channels;
  for (int k = 1; k <= spec.qudits; ++k) {
    switch (kind) {
      case JumpKind::Jz:
        channels.push_back(
            {gamma, lift_site_operator(qudit_jz(spec.d), k, spec.qudits)});
        break;
      case JumpKind::Jx:
        channels.push_back(
            {gamma, lift_site_operator(qudit_jx(spec.d), k, spec.qudits)});
        break;
      case JumpKind::Random:
        channels.push_back(
            {gamma, random_dense_operator(spec.dim(), seed,
                                          static_cast<std::uint64_t>(k))});
        break;
    }
  }
  return channels;
}

LindbladModel qudit_chain_model(const QuditChainSpec& spec, JumpKind kind,
                                double gamma, std::uint64_t seed) {
  return LindbladModel(ising_chain_hamiltonian(spec),
                       chain_channels(spec, kind, gamma, seed));
}

std::pair<DensityMatrix, LowRankFactor> ghz_state(int d, int qudits) {
  QuditChainSpec shape;
  shape.d = d;
  shape.qudits = qudits;
  shape.validate();
  const Index m = shape.dim();
  ComplexMatrix z = ComplexMatrix::Zero(m, 1);
  z(0, 0) = 1.0 / std::sqrt(2.0);
  z(m - 1, 0) = 1.0 / std::sqrt(2.0);
  ComplexMatrix rho = ComplexMatrix::Zero(m, m);
  rho(0, 0) = 0.5;
  rho(0, m - 1) = 0.5;
  rho(m - 1, 0) = 0.5;
  rho(m - 1, m - 1) = 0.5;
  return {DensityMatrix(std::move(rho)), LowRankFactor(std::move(z))};
}

std::pair<DensityMatrix, LowRankFactor> perturbed_lowrank_state(
    Index m, double delta, std::uint64_t seed) {
  if (!(delta >= 0.0 && delta < 1.0)) {
    throw ParameterError("perturbed_lowrank_state: delta must lie in [0, 1)");
  }
  if (m < 2) {
    throw ParameterError("perturbed_lowrank_state: dimension must be >= 2");
  }
  CounterRng rng(seed, 0x5eedULL);
  Eigen::MatrixXd draw(m, 2);
  for (Index j = 0; j < 2; ++j) {
    for (Index i = 0; i < m; ++i) {
      draw(i, j) = rng.normal();
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(draw, Eigen::ComputeThinU);
  const ComplexMatrix q1 = svd.matrixU().col(0).cast<Complex>();
  const ComplexMatrix q2 = svd.matrixU().col(1).cast<Complex>();
  ComplexMatrix rho = (1.0 - 0.5 * delta) * q1 * q1.adjoint() +
                      (0.5 * delta) * q2 * q2.adjoint();
  return {DensityMatrix(hermitize(rho)), LowRankFactor(q1)};
}

}  // namespace lindexp
