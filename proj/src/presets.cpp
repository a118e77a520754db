#include <string>
#include <vector>

#include "lindexp/errors.hpp"
#include "lindexp/harness.hpp"

namespace lindexp {

namespace {

struct PresetEntry {
  const char* name;
  const char* document;
};

// Desk-scale chains: every preset keeps the dense oracle within m <= 64. The
// description field gives the full-size chain each one stands in for.
const PresetEntry kPresets[] = {
    {"fig6_1", R"json({
  "name": "fig6_1",
  "description": "FREE convergence, constant coupling. d=4, K=2 (m=16) instead of K=4 (m=256).",
  "model": {"d": 4, "K": 2, "a": 1.5, "b": 0.5, "gamma": 0.01,
            "coupling": {"schedule": "constant", "g": 1.0, "topology": "all_pairs"},
            "jumps": "jz"},
  "initial_state": {"type": "ghz"},
  "scheme": "FREE",
  "plan": {"T": 1.0, "N": [10, 20, 40, 80]},
  "oracle": "vectorized",
  "observables": {"populations": [1, 3, 8, 16]}
})json"},
    {"fig6_2", R"json({
  "name": "fig6_2",
  "description": "FREE convergence, coupling (1+t)^(1/4) between neighbours. d=6, K=2 (m=36) instead of K=3 (m=216); substepped oracle.",
  "model": {"d": 6, "K": 2, "a": 1.0, "b": 1.0, "gamma": 0.05,
            "coupling": {"schedule": "quarter_power", "topology": "nearest_neighbor"},
            "jumps": "jz"},
  "initial_state": {"type": "ghz"},
  "scheme": "FREE",
  "plan": {"T": 1.0, "N": [10, 20, 40, 80]},
  "oracle": {"kind": "substep", "substeps": 4096},
  "observables": {"populations": [1, 4, 11, 36]}
})json"},
    {"fig6_3", R"json({
  "name": "fig6_3",
  "description": "LREE from a perturbed low-rank start, delta sweep, tol1 = tol2 = 1e-10. d=4, K=2 (m=16) instead of K=4.",
  "model": {"d": 4, "K": 2, "a": 1.5, "b": 0.5, "gamma": 0.01,
            "coupling": {"schedule": "constant", "g": 1.0}, "jumps": "jz"},
  "initial_state": {"type": "perturbed", "delta": 1e-3},
  "scheme": "LREE",
  "plan": {"T": 1.0, "N": [10, 20, 40, 80, 160, 320, 640]},
  "tolerances": {"tol1": 1e-10, "tol2": 1e-10},
  "oracle": "vectorized",
  "variants": [
    {"label": "delta1e-1", "patch": {"initial_state": {"delta": 1e-1}}},
    {"label": "delta1e-2", "patch": {"initial_state": {"delta": 1e-2}}},
    {"label": "delta1e-3", "patch": {"initial_state": {"delta": 1e-3}}},
    {"label": "delta1e-4", "patch": {"initial_state": {"delta": 1e-4}}}
  ]
})json"},
    {"fig6_4", R"json({
  "name": "fig6_4",
  "description": "LREE from the GHZ factor with tol2 = eps2 * tau, tol1 = 1e-10. d=4, K=2 (m=16) instead of K=4.",
  "model": {"d": 4, "K": 2, "a": 1.5, "b": 0.5, "gamma": 0.01,
            "coupling": {"schedule": "constant", "g": 1.0}, "jumps": "jz"},
  "initial_state": {"type": "ghz"},
  "scheme": "LREE",
  "plan": {"T": 1.0, "N": [10, 20, 40, 80, 160, 320, 640]},
  "tolerances": {"tol1": 1e-10, "tol2": {"eps2": 1e-2}},
  "oracle": "vectorized",
  "variants": [
    {"label": "eps2-1e-2", "patch": {"tolerances": {"tol2": {"eps2": 1e-2}}}},
    {"label": "eps2-1e-5", "patch": {"tolerances": {"tol2": {"eps2": 1e-5}}}},
    {"label": "eps2-1e-8", "patch": {"tolerances": {"tol2": {"eps2": 1e-8}}}}
  ]
})json"},
    {"fig6_5", R"json({
  "name": "fig6_5",
  "description": "LREE from the GHZ factor with tol1 = eps1 * tau, tol2 = 1e-10, exponential applied through the Taylor action. d=4, K=2 (m=16) instead of K=4.",
  "model": {"d": 4, "K": 2, "a": 1.5, "b": 0.5, "gamma": 0.01,
            "coupling": {"schedule": "constant", "g": 1.0}, "jumps": "jz"},
  "initial_state": {"type": "ghz"},
  "scheme": "LREE",
  "plan": {"T": 1.0, "N": [10, 20, 40, 80, 160, 320, 640]},
  "tolerances": {"tol1": {"eps1": 1e-2}, "tol2": 1e-10},
  "lree": {"dense_action_max": 0},
  "oracle": "vectorized",
  "variants": [
    {"label": "eps1-1", "patch": {"tolerances": {"tol1": {"eps1": 1.0}}}},
    {"label": "eps1-1e-2", "patch": {"tolerances": {"tol1": {"eps1": 1e-2}}}},
    {"label": "eps1-1e-4", "patch": {"tolerances": {"tol1": {"eps1": 1e-4}}}}
  ]
})json"},
    {"fig6_6", R"json({
  "name": "fig6_6",
  "description": "C_e probe for the constant-coupling chain. d=4, K=2 (m=16) instead of K=4.",
  "kind": "ce_probe",
  "model": {"d": 4, "K": 2, "a": 1.5, "b": 0.5, "gamma": 0.01,
            "coupling": {"schedule": "constant", "g": 1.0}, "jumps": "jz"},
  "probe": {"taus": [0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0],
            "tol1": [1e-4, 1e-8], "step_index": 0}
})json"},
    {"positivity_demo", R"json({
  "name": "positivity_demo",
  "description": "RK4 against FREE on the same grid, tau = 0.1, coupling sin(2 pi t) between neighbours, d=4, K=3 (m=64). RK4 leaves the PSD cone from the GHZ start; FREE does not.",
  "model": {"d": 4, "K": 3, "a": 1.0, "b": 1.0, "gamma": 0.05,
            "coupling": {"schedule": "sin_2pi", "topology": "nearest_neighbor"},
            "jumps": "jz"},
  "initial_state": {"type": "ghz"},
  "scheme": ["RK4", "FREE"],
  "plan": {"T": 2.0, "N": 20},
  "oracle": "none",
  "observables": {"populations": [38, 45, 46]}
})json"},
};

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& p : kPresets) {
    out.emplace_back(p.name);
  }
  return out;
}

std::string preset_document(std::string_view name) {
  for (const auto& p : kPresets) {
    if (name == p.name) {
      return p.document;
    }
  }
  std::string known;
  for (const auto& p : kPresets) {
    known += known.empty() ? "" : ", ";
    known += p.name;
  }
  throw ParameterError("unknown preset '" + std::string(name) +
                       "' (known: " + known + ")");
}

ExperimentConfig preset(std::string_view name) {
  return parse_config(preset_document(name));
}

}  // namespace lindexp
