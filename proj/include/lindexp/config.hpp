#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lindexp/integrators.hpp"
#include "lindexp/linalg.hpp"
#include "lindexp/model.hpp"

namespace lindexp {

enum class RunScheme { Free, Std, Lree, Oracle, Rk4 };
enum class ExperimentKind { Convergence, CeProbe };
enum class OracleKind { Auto, None, Vectorized, Substep, Dephasing };
enum class InitialKind { Ghz, Perturbed, Matrix };

RunScheme parse_run_scheme(std::string_view name);
std::string_view run_scheme_name(RunScheme scheme);
std::string_view oracle_kind_name(OracleKind kind);

/// Either an absolute tolerance or eps * tau^power.
struct ToleranceRule {
  bool proportional = false;
  double value = 0.0;  // absolute value, or eps when proportional
  int power = 1;

  static ToleranceRule fixed(double value);
  static ToleranceRule scaled(double eps, int power = 1);
  double resolve(double tau) const;
};

struct ModelConfig {
  bool explicit_matrices = false;
  // Qudit chain description.
  QuditChainSpec chain;
  JumpKind jumps = JumpKind::Jz;
  double gamma = 0.0;
  std::uint64_t jump_seed = 0;  // defaults to the global seed
  // Explicit description.
  ComplexMatrix hamiltonian;
  std::vector<Channel> channels;

  LindbladModel build() const;
};

struct InitialStateConfig {
  InitialKind kind = InitialKind::Ghz;
  double delta = 0.0;
  std::uint64_t seed = 0;  // defaults to the global seed
  ComplexMatrix rho;  // InitialKind::Matrix only
};

struct OracleConfig {
  OracleKind kind = OracleKind::Auto;
  long substeps = 4096;
  bool self_check = true;
};

struct ProbeConfig {
  std::vector<double> taus;
  std::vector<double> tol1s;
  long step_index = 0;
};

struct Variant {
  std::string label;
  nlohmann::json patch;
};

/// Declarative description of one experiment; see docs/config.md.
struct ExperimentConfig {
  std::string name = "experiment";
  std::string description;
  ExperimentKind kind = ExperimentKind::Convergence;
  ModelConfig model;
  InitialStateConfig initial;
  std::vector<RunScheme> schemes{RunScheme::Free};
  double horizon = 1.0;
  std::vector<long> steps{10};
  ToleranceRule tol1 = ToleranceRule::scaled(0.1, 1);
  ToleranceRule tol2 = ToleranceRule::scaled(0.1, 2);
  double expm_tol = kUnitRoundoff;
  double lyapunov_residual_tol = 1e-10;
  LreeOptions lree;
  OracleConfig oracle;
  std::vector<Index> populations;
  std::string output_dir;
  std::uint64_t seed = 0;
  int threads = 1;
  bool gate = true;
  ProbeConfig probe;
  std::vector<Variant> variants;

  // Source document (defaults not expanded); variants patch this.
  nlohmann::json document;

  // Tolerances for one run: LREE takes tol_1 as the exponential tolerance,
  // the full-rank schemes use expm_tol.
  ToleranceSet tolerances_for(RunScheme scheme, double tau) const;
  // Oracle actually used after resolving Auto.
  OracleKind resolved_oracle() const;
};

/// Parses and validates a JSON document. Schema errors raise ConfigError with
/// the JSON path of the offending field.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig config_from_json(const nlohmann::json& document);

/// Applies each variant patch to the base document; a config without variants
/// yields itself under an empty label.
std::vector<std::pair<std::string, ExperimentConfig>> expand_variants(
    const ExperimentConfig& config);

/// FNV-1a 64 of the canonical document with output location and thread count
/// removed, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

}  // namespace lindexp
