#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <string>

#include "lindexp/config.hpp"
#include "lindexp/errors.hpp"
#include "lindexp/oracle.hpp"

namespace lindexp {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string index_path(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

// Every object is checked against its allowed key set so typos do not pass
// silently.
void expect_object(const json& j, const std::string& path,
                   std::initializer_list<const char*> keys) {
  if (!j.is_object()) {
    throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  }
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* k : keys) {
      known = known || key == k;
    }
    if (!known) {
      throw ConfigError(join(path, key), "unknown field");
    }
  }
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) {
    throw ConfigError(path, "expected a number");
  }
  const double v = j.get<double>();
  if (!std::isfinite(v)) {
    throw ConfigError(path, "expected a finite number");
  }
  return v;
}

long as_integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) {
    throw ConfigError(path, "expected an integer");
  }
  return j.get<long>();
}

std::uint64_t as_seed(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) {
    return j.get<std::uint64_t>();
  }
  if (j.is_number_integer() && j.get<long long>() >= 0) {
    return static_cast<std::uint64_t>(j.get<long long>());
  }
  throw ConfigError(path, "expected a non-negative integer");
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) {
    throw ConfigError(path, "expected a string");
  }
  return j.get<std::string>();
}

bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) {
    throw ConfigError(path, "expected true or false");
  }
  return j.get<bool>();
}

const json* find(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

// Translates library errors raised while interpreting a field.
template <class F>
auto at_field(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
}

// Rows of numbers or [re, im] pairs.
ComplexMatrix as_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) {
    throw ConfigError(path, "expected a non-empty array of rows");
  }
  const Index rows = static_cast<Index>(j.size());
  Index cols = -1;
  ComplexMatrix out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& row = j[i];
    const std::string rp = index_path(path, i);
    if (!row.is_array()) {
      throw ConfigError(rp, "expected an array");
    }
    if (cols < 0) {
      cols = static_cast<Index>(row.size());
      out.resize(rows, cols);
    } else if (static_cast<Index>(row.size()) != cols) {
      throw ConfigError(rp, "ragged matrix row");
    }
    for (std::size_t k = 0; k < row.size(); ++k) {
      const auto& e = row[k];
      const std::string ep = index_path(rp, k);
      if (e.is_array()) {
        if (e.size() != 2) {
          throw ConfigError(ep, "complex entries are [re, im]");
        }
        out(static_cast<Index>(i), static_cast<Index>(k)) =
            Complex(as_number(e[0], ep), as_number(e[1], ep));
      } else {
        out(static_cast<Index>(i), static_cast<Index>(k)) =
            Complex(as_number(e, ep), 0.0);
      }
    }
  }
  return out;
}

ToleranceRule as_tolerance(const json& j, const std::string& path) {
  if (j.is_number()) {
    const double v = as_number(j, path);
    if (!(v > 0.0)) {
      throw ConfigError(path, "tolerance must be positive");
    }
    return ToleranceRule::fixed(v);
  }
  expect_object(j, path, {"eps", "eps1", "eps2", "power"});
  const json* eps = nullptr;
  std::string eps_path;
  for (const char* key : {"eps", "eps1", "eps2"}) {
    if (const json* e = find(j, key)) {
      if (eps != nullptr) {
        throw ConfigError(join(path, key), "give only one of eps, eps1, eps2");
      }
      eps = e;
      eps_path = join(path, key);
    }
  }
  if (eps == nullptr) {
    throw ConfigError(join(path, "eps"), "missing");
  }
  const double v = as_number(*eps, eps_path);
  if (!(v > 0.0)) {
    throw ConfigError(eps_path, "must be positive");
  }
  int power = 1;
  if (const json* p = find(j, "power")) {
    const long pw = as_integer(*p, join(path, "power"));
    if (pw < 0 || pw > 4) {
      throw ConfigError(join(path, "power"), "must be in 0..4");
    }
    power = static_cast<int>(pw);
  }
  return ToleranceRule::scaled(v, power);
}

void parse_model(const json& j, ModelConfig& model) {
  const std::string path = "model";
  expect_object(j, path,
                {"d", "K", "a", "b", "gamma", "coupling", "jumps", "jump_seed",
                 "hamiltonian", "channels"});
  model.explicit_matrices = j.contains("hamiltonian");
  if (model.explicit_matrices) {
    for (const char* key : {"d", "K", "a", "b", "gamma", "coupling", "jumps",
                            "jump_seed"}) {
      if (j.contains(key)) {
        throw ConfigError(join(path, key),
                          "not allowed together with model.hamiltonian");
      }
    }
    model.hamiltonian = as_matrix(j["hamiltonian"], "model.hamiltonian");
    if (const json* chs = find(j, "channels")) {
      if (!chs->is_array()) {
        throw ConfigError("model.channels", "expected an array");
      }
      for (std::size_t i = 0; i < chs->size(); ++i) {
        const std::string cp = index_path("model.channels", i);
        expect_object((*chs)[i], cp, {"gamma", "jump"});
        if (!(*chs)[i].contains("jump")) {
          throw ConfigError(join(cp, "jump"), "missing");
        }
        Channel ch;
        ch.gamma = (*chs)[i].contains("gamma")
                       ? as_number((*chs)[i]["gamma"], join(cp, "gamma"))
                       : 1.0;
        ch.jump = as_matrix((*chs)[i]["jump"], join(cp, "jump"));
        model.channels.push_back(std::move(ch));
      }
    }
    at_field(path, [&] { return model.build(); });
    return;
  }
  if (j.contains("channels")) {
    throw ConfigError("model.channels", "requires model.hamiltonian");
  }
  auto& spec = model.chain;
  if (const json* v = find(j, "d")) {
    spec.d = static_cast<int>(as_integer(*v, "model.d"));
  }
  if (const json* v = find(j, "K")) {
    spec.qudits = static_cast<int>(as_integer(*v, "model.K"));
  }
  if (const json* v = find(j, "a")) {
    spec.a = as_number(*v, "model.a");
  }
  if (const json* v = find(j, "b")) {
    spec.b = as_number(*v, "model.b");
  }
  if (const json* v = find(j, "gamma")) {
    model.gamma = as_number(*v, "model.gamma");
    if (!(model.gamma >= 0.0)) {
      throw ConfigError("model.gamma", "must be >= 0");
    }
  }
  if (const json* c = find(j, "coupling")) {
    expect_object(*c, "model.coupling", {"schedule", "g", "topology"});
    if (const json* v = find(*c, "schedule")) {
      const std::string s = as_string(*v, "model.coupling.schedule");
      spec.schedule =
          at_field("model.coupling.schedule", [&] { return parse_schedule(s); });
    }
    if (const json* v = find(*c, "g")) {
      spec.g = as_number(*v, "model.coupling.g");
    }
    if (const json* v = find(*c, "topology")) {
      const std::string s = as_string(*v, "model.coupling.topology");
      spec.topology =
          at_field("model.coupling.topology", [&] { return parse_topology(s); });
    }
  }
  if (const json* v = find(j, "jumps")) {
    const std::string s = as_string(*v, "model.jumps");
    model.jumps = at_field("model.jumps", [&] { return parse_jump_kind(s); });
  }
  if (const json* v = find(j, "jump_seed")) {
    model.jump_seed = as_seed(*v, "model.jump_seed");
  }
  at_field(path, [&] {
    spec.validate();
    return 0;
  });
  if (spec.dim() > 4096) {
    throw ConfigError("model", "state dimension d^K above 4096");
  }
}

void parse_initial(const json& j, InitialStateConfig& init) {
  const std::string path = "initial_state";
  expect_object(j, path, {"type", "delta", "seed", "rho"});
  const std::string type =
      j.contains("type") ? as_string(j["type"], "initial_state.type") : "ghz";
  if (type == "ghz") {
    init.kind = InitialKind::Ghz;
  } else if (type == "perturbed") {
    init.kind = InitialKind::Perturbed;
  } else if (type == "matrix") {
    init.kind = InitialKind::Matrix;
  } else {
    throw ConfigError("initial_state.type",
                      "expected ghz, perturbed or matrix, got '" + type + "'");
  }
  if (init.kind != InitialKind::Perturbed) {
    for (const char* key : {"delta", "seed"}) {
      if (j.contains(key)) {
        throw ConfigError(join(path, key), "only used by type perturbed");
      }
    }
  }
  if (init.kind != InitialKind::Matrix && j.contains("rho")) {
    throw ConfigError("initial_state.rho", "only used by type matrix");
  }
  if (init.kind == InitialKind::Perturbed) {
    if (const json* v = find(j, "delta")) {
      init.delta = as_number(*v, "initial_state.delta");
    }
    if (!(init.delta >= 0.0 && init.delta < 1.0)) {
      throw ConfigError("initial_state.delta", "must lie in [0, 1)");
    }
    if (const json* v = find(j, "seed")) {
      init.seed = as_seed(*v, "initial_state.seed");
    }
  }
  if (init.kind == InitialKind::Matrix) {
    if (!j.contains("rho")) {
      throw ConfigError("initial_state.rho", "missing");
    }
    init.rho = as_matrix(j["rho"], "initial_state.rho");
    at_field("initial_state.rho", [&] { return DensityMatrix(init.rho); });
  }
}

std::vector<RunScheme> parse_schemes(const json& j) {
  std::vector<RunScheme> out;
  auto one = [&](const json& e, const std::string& path) {
    const std::string s = as_string(e, path);
    const RunScheme scheme = at_field(path, [&] { return parse_run_scheme(s); });
    if (std::find(out.begin(), out.end(), scheme) != out.end()) {
      throw ConfigError(path, "duplicate scheme");
    }
    out.push_back(scheme);
  };
  if (j.is_array()) {
    if (j.empty()) {
      throw ConfigError("scheme", "empty list");
    }
    for (std::size_t i = 0; i < j.size(); ++i) {
      one(j[i], index_path("scheme", i));
    }
  } else {
    one(j, "scheme");
  }
  return out;
}

std::vector<double> positive_list(const json& j, const std::string& path,
                                  bool allow_zero = false) {
  std::vector<double> out;
  if (!j.is_array() || j.empty()) {
    throw ConfigError(path, "expected a non-empty array");
  }
  for (std::size_t i = 0; i < j.size(); ++i) {
    const double v = as_number(j[i], index_path(path, i));
    if (!(v > 0.0) && !(allow_zero && v == 0.0)) {
      throw ConfigError(index_path(path, i),
                        allow_zero ? "must be >= 0" : "must be positive");
    }
    out.push_back(v);
  }
  return out;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

}  // namespace

RunScheme parse_run_scheme(std::string_view name) {
  if (name == "FREE") return RunScheme::Free;
  if (name == "STD") return RunScheme::Std;
  if (name == "LREE") return RunScheme::Lree;
  if (name == "ORACLE") return RunScheme::Oracle;
  if (name == "RK4") return RunScheme::Rk4;
  throw ParameterError("unknown scheme '" + std::string(name) +
                       "' (FREE, STD, LREE, ORACLE, RK4)");
}

std::string_view run_scheme_name(RunScheme scheme) {
  switch (scheme) {
    case RunScheme::Free: return "FREE";
    case RunScheme::Std: return "STD";
    case RunScheme::Lree: return "LREE";
    case RunScheme::Oracle: return "ORACLE";
    case RunScheme::Rk4: return "RK4";
  }
  return "?";
}

std::string_view oracle_kind_name(OracleKind kind) {
  switch (kind) {
    case OracleKind::Auto: return "auto";
    case OracleKind::None: return "none";
    case OracleKind::Vectorized: return "vectorized";
    case OracleKind::Substep: return "substep";
    case OracleKind::Dephasing: return "dephasing";
  }
  return "?";
}

ToleranceRule ToleranceRule::fixed(double value) {
  ToleranceRule r;
  r.value = value;
  return r;
}

ToleranceRule ToleranceRule::scaled(double eps, int power) {
  ToleranceRule r;
  r.proportional = true;
  r.value = eps;
  r.power = power;
  return r;
}

double ToleranceRule::resolve(double tau) const {
  if (!proportional) {
    return value;
  }
  double out = value;
  for (int i = 0; i < power; ++i) {
    out *= tau;
  }
  return out;
}

LindbladModel ModelConfig::build() const {
  if (explicit_matrices) {
    return LindbladModel(Hamiltonian(hamiltonian), channels);
  }
  return qudit_chain_model(chain, jumps, gamma, jump_seed);
}

ToleranceSet ExperimentConfig::tolerances_for(RunScheme scheme,
                                              double tau) const {
  ToleranceSet tol;
  tol.expm_tol = scheme == RunScheme::Lree ? tol1.resolve(tau) : expm_tol;
  tol.lyapunov_residual_tol = lyapunov_residual_tol;
  tol.compress_tol = tol2.resolve(tau);
  // tau = 0 turns the proportional rules into 0; the steps are then the
  // identity and only exactly-zero columns should be dropped.
  if (!(tol.expm_tol > 0.0)) {
    tol.expm_tol = kUnitRoundoff;
  }
  if (!(tol.compress_tol > 0.0)) {
    tol.compress_tol = std::numeric_limits<double>::min();
  }
  return tol;
}

OracleKind ExperimentConfig::resolved_oracle() const {
  if (oracle.kind != OracleKind::Auto) {
    return oracle.kind;
  }
  const bool constant =
      model.explicit_matrices || model.chain.schedule == CouplingSchedule::Constant;
  return constant ? OracleKind::Vectorized : OracleKind::Substep;
}

ExperimentConfig config_from_json(const json& doc) {
  expect_object(doc, "",
                {"name", "description", "kind", "model", "initial_state",
                 "scheme", "plan", "tolerances", "lree", "oracle",
                 "observables", "output", "seed", "threads", "gate", "probe",
                 "variants"});
  ExperimentConfig cfg;
  cfg.document = doc;
  if (const json* v = find(doc, "seed")) {
    cfg.seed = as_seed(*v, "seed");
  }
  cfg.model.jump_seed = cfg.seed;
  cfg.initial.seed = cfg.seed;
  if (const json* v = find(doc, "name")) {
    cfg.name = as_string(*v, "name");
    if (cfg.name.empty() ||
        cfg.name.find_first_of("/\\") != std::string::npos) {
      throw ConfigError("name", "must be a non-empty plain file name");
    }
  }
  if (const json* v = find(doc, "description")) {
    cfg.description = as_string(*v, "description");
  }
  if (const json* v = find(doc, "kind")) {
    const std::string k = as_string(*v, "kind");
    if (k == "convergence") {
      cfg.kind = ExperimentKind::Convergence;
    } else if (k == "ce_probe") {
      cfg.kind = ExperimentKind::CeProbe;
    } else {
      throw ConfigError("kind", "expected convergence or ce_probe");
    }
  }
  if (!doc.contains("model")) {
    throw ConfigError("model", "missing");
  }
  parse_model(doc["model"], cfg.model);
  if (const json* v = find(doc, "initial_state")) {
    parse_initial(*v, cfg.initial);
  }
  if (const json* v = find(doc, "scheme")) {
    cfg.schemes = parse_schemes(*v);
  }

  if (const json* plan = find(doc, "plan")) {
    expect_object(*plan, "plan", {"T", "N"});
    if (const json* v = find(*plan, "T")) {
      cfg.horizon = as_number(*v, "plan.T");
    }
    if (const json* v = find(*plan, "N")) {
      cfg.steps.clear();
      if (v->is_array()) {
        if (v->empty()) {
          throw ConfigError("plan.N", "empty list");
        }
        for (std::size_t i = 0; i < v->size(); ++i) {
          cfg.steps.push_back(as_integer((*v)[i], index_path("plan.N", i)));
        }
      } else {
        cfg.steps.push_back(as_integer(*v, "plan.N"));
      }
    }
  }
  if (!(cfg.horizon >= 0.0)) {
    throw ConfigError("plan.T", "must be >= 0");
  }
  std::set<long> seen;
  for (std::size_t i = 0; i < cfg.steps.size(); ++i) {
    if (cfg.steps[i] < 1) {
      throw ConfigError(index_path("plan.N", i), "every N must be >= 1");
    }
    if (!seen.insert(cfg.steps[i]).second) {
      throw ConfigError(index_path("plan.N", i), "duplicate N");
    }
  }

  if (const json* t = find(doc, "tolerances")) {
    expect_object(*t, "tolerances", {"tol1", "tol2", "expm", "lyapunov_residual"});
    if (const json* v = find(*t, "tol1")) {
      cfg.tol1 = as_tolerance(*v, "tolerances.tol1");
    }
    if (const json* v = find(*t, "tol2")) {
      cfg.tol2 = as_tolerance(*v, "tolerances.tol2");
    }
    if (const json* v = find(*t, "expm")) {
      cfg.expm_tol = as_number(*v, "tolerances.expm");
      if (!(cfg.expm_tol > 0.0 && cfg.expm_tol < 1.0)) {
        throw ConfigError("tolerances.expm", "must lie in (0, 1)");
      }
    }
    if (const json* v = find(*t, "lyapunov_residual")) {
      cfg.lyapunov_residual_tol = as_number(*v, "tolerances.lyapunov_residual");
      if (!(cfg.lyapunov_residual_tol > 0.0)) {
        throw ConfigError("tolerances.lyapunov_residual", "must be positive");
      }
    }
  }

  if (const json* l = find(doc, "lree")) {
    expect_object(*l, "lree", {"max_rank", "dense_action_max"});
    if (const json* v = find(*l, "max_rank")) {
      cfg.lree.max_rank = as_integer(*v, "lree.max_rank");
      if (cfg.lree.max_rank < 0) {
        throw ConfigError("lree.max_rank", "must be >= 0");
      }
    }
    if (const json* v = find(*l, "dense_action_max")) {
      cfg.lree.action.dense_threshold = as_integer(*v, "lree.dense_action_max");
      if (cfg.lree.action.dense_threshold < 0) {
        throw ConfigError("lree.dense_action_max", "must be >= 0");
      }
    }
  }

  if (const json* o = find(doc, "oracle")) {
    const json obj = o->is_string() ? json{{"kind", *o}} : *o;
    expect_object(obj, "oracle", {"kind", "substeps", "self_check"});
    if (const json* v = find(obj, "kind")) {
      const std::string k = as_string(*v, "oracle.kind");
      if (k == "auto") cfg.oracle.kind = OracleKind::Auto;
      else if (k == "none") cfg.oracle.kind = OracleKind::None;
      else if (k == "vectorized") cfg.oracle.kind = OracleKind::Vectorized;
      else if (k == "substep") cfg.oracle.kind = OracleKind::Substep;
      else if (k == "dephasing") cfg.oracle.kind = OracleKind::Dephasing;
      else {
        throw ConfigError("oracle.kind",
                          "expected auto, none, vectorized, substep or "
                          "dephasing");
      }
    }
    if (const json* v = find(obj, "substeps")) {
      cfg.oracle.substeps = as_integer(*v, "oracle.substeps");
      if (cfg.oracle.substeps < 1) {
        throw ConfigError("oracle.substeps", "must be >= 1");
      }
    }
    if (const json* v = find(obj, "self_check")) {
      cfg.oracle.self_check = as_bool(*v, "oracle.self_check");
    }
  }

  if (const json* o = find(doc, "observables")) {
    expect_object(*o, "observables", {"populations"});
    if (const json* v = find(*o, "populations")) {
      if (!v->is_array()) {
        throw ConfigError("observables.populations", "expected an array");
      }
      for (std::size_t i = 0; i < v->size(); ++i) {
        const std::string p = index_path("observables.populations", i);
        const long idx = as_integer((*v)[i], p);
        cfg.populations.push_back(idx);
      }
    }
  }
  if (const json* o = find(doc, "output")) {
    expect_object(*o, "output", {"dir"});
    if (const json* v = find(*o, "dir")) {
      cfg.output_dir = as_string(*v, "output.dir");
    }
  }
  if (const json* v = find(doc, "threads")) {
    const long t = as_integer(*v, "threads");
    if (t < 1 || t > 256) {
      throw ConfigError("threads", "must be in 1..256");
    }
    cfg.threads = static_cast<int>(t);
  }
  if (const json* v = find(doc, "gate")) {
    cfg.gate = as_bool(*v, "gate");
  }
  if (const json* p = find(doc, "probe")) {
    expect_object(*p, "probe", {"taus", "tol1", "step_index"});
    if (const json* v = find(*p, "taus")) {
      cfg.probe.taus = positive_list(*v, "probe.taus", true);
    }
    if (const json* v = find(*p, "tol1")) {
      cfg.probe.tol1s = positive_list(*v, "probe.tol1");
    }
    if (const json* v = find(*p, "step_index")) {
      cfg.probe.step_index = as_integer(*v, "probe.step_index");
      if (cfg.probe.step_index < 0) {
        throw ConfigError("probe.step_index", "must be >= 0");
      }
    }
  }
  if (const json* v = find(doc, "variants")) {
    if (!v->is_array()) {
      throw ConfigError("variants", "expected an array");
    }
    std::set<std::string> labels;
    for (std::size_t i = 0; i < v->size(); ++i) {
      const std::string p = index_path("variants", i);
      expect_object((*v)[i], p, {"label", "patch"});
      Variant var;
      if (!(*v)[i].contains("label")) {
        throw ConfigError(join(p, "label"), "missing");
      }
      var.label = as_string((*v)[i]["label"], join(p, "label"));
      if (var.label.empty() ||
          var.label.find_first_not_of(
              "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789-.") !=
              std::string::npos) {
        throw ConfigError(join(p, "label"),
                          "use letters, digits, '-' and '.' only");
      }
      if (!labels.insert(var.label).second) {
        throw ConfigError(join(p, "label"), "duplicate label");
      }
      var.patch = (*v)[i].contains("patch") ? (*v)[i]["patch"] : json::object();
      if (!var.patch.is_object()) {
        throw ConfigError(join(p, "patch"), "expected an object");
      }
      for (const char* banned : {"variants", "output", "threads", "kind"}) {
        if (var.patch.contains(banned)) {
          throw ConfigError(join(join(p, "patch"), banned),
                            "cannot be changed by a variant");
        }
      }
      cfg.variants.push_back(std::move(var));
    }
  }

  // Cross-field checks.
  const Index m = cfg.model.build().dim();
  for (std::size_t i = 0; i < cfg.populations.size(); ++i) {
    if (cfg.populations[i] < 1 || cfg.populations[i] > m) {
      throw ConfigError(index_path("observables.populations", i),
                        "index outside 1.." + std::to_string(m));
    }
  }
  if (cfg.initial.kind == InitialKind::Matrix && cfg.initial.rho.rows() != m) {
    throw ConfigError("initial_state.rho", "dimension does not match the model");
  }
  if (cfg.initial.kind == InitialKind::Ghz && cfg.model.explicit_matrices) {
    throw ConfigError("initial_state.type",
                      "ghz needs a qudit-chain model; use matrix");
  }
  for (std::size_t i = 0; i < cfg.schemes.size(); ++i) {
    if (cfg.schemes[i] == RunScheme::Lree &&
        cfg.initial.kind == InitialKind::Matrix) {
      throw ConfigError(index_path("scheme", i),
                        "LREE needs a factor-representable initial state "
                        "(ghz or perturbed)");
    }
  }
  const OracleKind oracle = cfg.resolved_oracle();
  if (oracle == OracleKind::Vectorized && !cfg.model.explicit_matrices &&
      cfg.model.chain.schedule != CouplingSchedule::Constant) {
    throw ConfigError("oracle.kind",
                      "vectorized oracle needs a constant Hamiltonian");
  }
  if ((oracle == OracleKind::Vectorized || oracle == OracleKind::Substep) &&
      m > kOracleMaxDim) {
    throw ConfigError("oracle.kind", "state dimension " + std::to_string(m) +
                                         " exceeds the oracle guard " +
                                         std::to_string(kOracleMaxDim));
  }
  if (oracle == OracleKind::Dephasing) {
    const LindbladModel model = cfg.model.build();
    const bool ok = m == 2 && model.hamiltonian().is_constant() &&
                    model.hamiltonian().constant_part().norm() == 0.0 &&
                    model.channels().size() == 1 &&
                    (model.channels()[0].jump - qudit_jz(2)).norm() == 0.0;
    if (!ok) {
      throw ConfigError("oracle.kind",
                        "dephasing closed form needs d = 2, H = 0 and one "
                        "Jz channel");
    }
  }
  for (RunScheme s : cfg.schemes) {
    if ((s == RunScheme::Oracle || s == RunScheme::Rk4) && m > kOracleMaxDim) {
      throw ConfigError("scheme", std::string(run_scheme_name(s)) +
                                      " needs a state dimension <= " +
                                      std::to_string(kOracleMaxDim));
    }
  }
  if (cfg.kind == ExperimentKind::CeProbe) {
    if (!cfg.variants.empty()) {
      throw ConfigError("variants", "not supported for kind ce_probe");
    }
    if (cfg.probe.taus.empty()) {
      throw ConfigError("probe.taus", "missing");
    }
    if (cfg.probe.tol1s.empty()) {
      throw ConfigError("probe.tol1", "missing");
    }
  }
  return cfg;
}

ExperimentConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", std::string("malformed JSON: ") + e.what());
  }
  ExperimentConfig cfg = config_from_json(doc);
  // Variants are validated eagerly so a bad patch fails before any work.
  expand_variants(cfg);
  return cfg;
}

std::vector<std::pair<std::string, ExperimentConfig>> expand_variants(
    const ExperimentConfig& config) {
  std::vector<std::pair<std::string, ExperimentConfig>> out;
  if (config.variants.empty()) {
    out.emplace_back("", config);
    return out;
  }
  for (std::size_t i = 0; i < config.variants.size(); ++i) {
    const auto& var = config.variants[i];
    json doc = config.document;
    doc.erase("variants");
    doc.merge_patch(var.patch);
    try {
      out.emplace_back(var.label, config_from_json(doc));
    } catch (const ConfigError& e) {
      throw ConfigError(index_path("variants", i) + ".patch." + e.field(),
                        std::string(e.what()).substr(e.field().size() + 2));
    }
  }
  return out;
}

std::string config_hash(const ExperimentConfig& config) {
  json doc = config.document;
  doc.erase("output");
  doc.erase("threads");
  const std::string text = doc.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return hex64(h);
}

}  // namespace lindexp
