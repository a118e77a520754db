#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include "lindexp/errors.hpp"
#include "lindexp/harness.hpp"
#include "lindexp/oracle.hpp"

namespace lindexp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

struct VariantContext {
  std::string label;
  ExperimentConfig config;
  std::optional<LindbladModel> model;
  ComplexMatrix rho0;
  std::optional<LowRankFactor> z0;
  std::optional<ComplexMatrix> reference;
};

struct Job {
  std::size_t variant = 0;
  RunScheme scheme = RunScheme::Free;
  long steps = 0;
};

struct JobResult {
  SummaryRow row;
  std::vector<StepDiagnostics> diagnostics;
};

void build_initial(VariantContext& ctx) {
  const auto& cfg = ctx.config;
  const Index m = ctx.model->dim();
  switch (cfg.initial.kind) {
    case InitialKind::Ghz: {
      auto [rho, z] = ghz_state(cfg.model.chain.d, cfg.model.chain.qudits);
      ctx.rho0 = rho.matrix();
      ctx.z0 = z;
      break;
    }
    case InitialKind::Perturbed: {
      auto [rho, z] =
          perturbed_lowrank_state(m, cfg.initial.delta, cfg.initial.seed);
      ctx.rho0 = rho.matrix();
      ctx.z0 = z;
      break;
    }
    case InitialKind::Matrix:
      ctx.rho0 = DensityMatrix(cfg.initial.rho).matrix();
      break;
  }
}

void build_reference(VariantContext& ctx) {
  const auto& cfg = ctx.config;
  const LindbladModel& model = *ctx.model;
  switch (cfg.resolved_oracle()) {
    case OracleKind::None:
    case OracleKind::Auto:
      return;
    case OracleKind::Vectorized:
      ctx.reference = reference_solution(model, ctx.rho0, cfg.horizon);
      return;
    case OracleKind::Substep: {
      SubstepOracleOptions opts;
      opts.substeps = cfg.oracle.substeps;
      opts.self_check = cfg.oracle.self_check;
      ctx.reference =
          reference_solution_timedep(model, ctx.rho0, cfg.horizon, opts).rho;
      return;
    }
    case OracleKind::Dephasing:
      ctx.reference = dephasing_closed_form(model.channels().front().gamma,
                                            ctx.rho0, cfg.horizon);
      return;
  }
}

// Full-rank propagation for the two comparison schemes.
class ComparisonStepper {
 public:
  ComparisonStepper(const LindbladModel& model, RunScheme scheme, double tau,
                    long steps, const OracleConfig& oracle)
      : model_(model), scheme_(scheme), tau_(tau) {
    const bool constant = model.hamiltonian().is_constant();
    if (constant) {
      generator_ = superoperator(model, 0.0);
      if (scheme == RunScheme::Oracle) {
        propagator_ = expm(tau * *generator_);
      }
    }
    substeps_ = std::max<long>(
        1, (oracle.substeps + steps - 1) / std::max<long>(steps, 1));
  }

  ComplexMatrix step(const ComplexMatrix& rho, double t) const {
    const Index m = rho.rows();
    if (scheme_ == RunScheme::Oracle) {
      if (propagator_) {
        return hermitize(unvec(*propagator_ * vec(rho), m));
      }
      return substep_propagate(model_, rho, t, tau_, substeps_).rho;
    }
    if (generator_) {
      const ComplexMatrix& g = *generator_;
      const ComplexVector out = rk4_vectorized_step(
          [&g](const ComplexVector& v) -> ComplexVector { return g * v; },
          vec(rho), tau_);
      return unvec(out, m);
    }
    // Time-dependent generator: classical RK4 with stage times.
    const double h = tau_;
    const ComplexMatrix k1 = lindblad_rhs(model_, t, rho);
    const ComplexMatrix k2 = lindblad_rhs(model_, t + 0.5 * h, rho + 0.5 * h * k1);
    const ComplexMatrix k3 = lindblad_rhs(model_, t + 0.5 * h, rho + 0.5 * h * k2);
    const ComplexMatrix k4 = lindblad_rhs(model_, t + h, rho + h * k3);
    return rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

 private:
  const LindbladModel& model_;
  RunScheme scheme_;
  double tau_;
  long substeps_ = 1;
  std::optional<ComplexMatrix> generator_;
  std::optional<ComplexMatrix> propagator_;
};

JobResult run_job(const VariantContext& ctx, const Job& job) {
  const auto start = std::chrono::steady_clock::now();
  const auto& cfg = ctx.config;
  const LindbladModel& model = *ctx.model;
  const StepPlan plan = StepPlan::uniform(cfg.horizon, job.steps);
  const std::vector<Index>& pops = cfg.populations;

  JobResult result;
  auto& diag = result.diagnostics;
  diag.reserve(static_cast<std::size_t>(job.steps) + 1);
  ComplexMatrix final_rho;

  if (job.scheme == RunScheme::Oracle || job.scheme == RunScheme::Rk4) {
    const ComparisonStepper stepper(model, job.scheme, plan.tau, job.steps,
                                    cfg.oracle);
    ComplexMatrix rho = ctx.rho0;
    diag.push_back(measure_step(0, 0.0, State(rho), pops));
    for (long n = 0; n < plan.steps; ++n) {
      try {
        rho = stepper.step(rho, plan.time(n));
        require_finite(rho, "state");
      } catch (const Error& e) {
        throw StepError(e, n + 1);
      }
      diag.push_back(measure_step(n + 1, plan.time(n + 1), State(rho), pops));
    }
    final_rho = rho;
  } else {
    const Scheme scheme = job.scheme == RunScheme::Free  ? Scheme::Free
                          : job.scheme == RunScheme::Std ? Scheme::Std
                                                         : Scheme::Lree;
    State initial = scheme == Scheme::Lree ? State(*ctx.z0) : State(ctx.rho0);
    IntegrateOptions opts;
    opts.lree = cfg.lree;
    opts.observers.push_back(
        [&](long step, double t, const State& state) {
          diag.push_back(measure_step(step, t, state, pops));
        });
    const ToleranceSet tol = cfg.tolerances_for(job.scheme, plan.tau);
    const Trajectory traj = integrate(scheme, model, initial, plan, tol, opts);
    final_rho = state_density(traj.final_state());
  }

  SummaryRow& row = result.row;
  row.variant = ctx.label;
  row.scheme = job.scheme;
  row.steps = job.steps;
  row.tau = plan.tau;
  row.error = ctx.reference ? relative_error(final_rho, *ctx.reference)
                            : std::nan("");
  row.max_abs_trace_deviation = 0.0;
  row.min_min_eig = diag.front().min_eig;
  for (const auto& d : diag) {
    row.max_abs_trace_deviation =
        std::max(row.max_abs_trace_deviation, std::abs(d.trace_deviation));
    row.min_min_eig = std::min(row.min_min_eig, d.min_eig);
    row.max_rank = std::max(row.max_rank, d.rank);
  }
  row.wall_time = seconds_since(start);
  return result;
}

// Post-run invariant gate for the structure-preserving schemes.
void check_gate(const JobResult& r) {
  if (r.row.scheme != RunScheme::Free && r.row.scheme != RunScheme::Lree) {
    return;
  }
  for (const auto& d : r.diagnostics) {
    if (!(d.min_eig >= -1e-10) || !(std::abs(d.trace_deviation) <= 1e-12)) {
      std::ostringstream msg;
      msg.precision(3);
      msg << run_scheme_name(r.row.scheme) << " N=" << r.row.steps;
      if (!r.row.variant.empty()) {
        msg << " (" << r.row.variant << ")";
      }
      msg << " step " << d.step << ": min_eig " << d.min_eig
          << ", trace deviation " << d.trace_deviation
          << " outside the positivity/trace gate";
      throw GateError(msg.str());
    }
  }
}

std::string tau_tag(double tau) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", tau);
  return buf;
}

std::string steps_file_name(const SummaryRow& row, bool with_variant,
                            bool with_scheme) {
  std::string name = "steps_";
  if (with_variant) {
    name += row.variant + "_";
  }
  if (with_scheme) {
    name += std::string(run_scheme_name(row.scheme)) + "_";
  }
  return name + tau_tag(row.tau) + ".csv";
}

// Runs jobs on up to `threads` workers; results keep job order and the first
// failure (in job order) is rethrown.
std::vector<JobResult> run_jobs(const std::vector<VariantContext>& contexts,
                                const std::vector<Job>& jobs, int threads) {
  std::vector<std::optional<JobResult>> results(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) {
        return;
      }
      try {
        results[i] = run_job(contexts[jobs[i].variant], jobs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(jobs.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) {
      pool.emplace_back(worker);
    }
    for (auto& th : pool) {
      th.join();
    }
  }
  for (auto& e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
  std::vector<JobResult> out;
  out.reserve(jobs.size());
  for (auto& r : results) {
    out.push_back(std::move(*r));
  }
  return out;
}

std::vector<SlopeRecord> fit_slopes(const std::vector<SummaryRow>& rows) {
  std::vector<SlopeRecord> out;
  std::vector<std::pair<std::string, RunScheme>> keys;
  for (const auto& r : rows) {
    const auto key = std::make_pair(r.variant, r.scheme);
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      keys.push_back(key);
    }
  }
  for (const auto& [variant, scheme] : keys) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : rows) {
      if (r.variant == variant && r.scheme == scheme && std::isfinite(r.error) &&
          r.error > 0.0 && r.tau > 0.0) {
        pts.emplace_back(r.tau, r.error);
      }
    }
    if (pts.size() < 3) {
      continue;
    }
    std::sort(pts.begin(), pts.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<double> taus;
    std::vector<double> errs;
    for (const auto& [t, e] : pts) {
      taus.push_back(t);
      errs.push_back(e);
    }
    SlopeRecord rec;
    rec.variant = variant;
    rec.scheme = scheme;
    rec.slope = convergence_order(taus, errs);
    rec.points = pts.size();
    out.push_back(rec);
  }
  return out;
}

class OutputWriter {
 public:
  explicit OutputWriter(std::string dir) : dir_(std::move(dir)) {}

  void prepare() {
    std::error_code ec;
    if (!fs::exists(dir_, ec)) {
      fs::create_directories(dir_, ec);
      if (ec) {
        throw IoError("cannot create output directory '" + dir_ +
                      "': " + ec.message());
      }
      created_dir_ = true;
    } else if (!fs::is_directory(dir_, ec)) {
      throw IoError("output path '" + dir_ + "' is not a directory");
    }
  }

  void write(const std::string& name, const std::string& body) {
    const fs::path path = fs::path(dir_) / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot open '" + path.string() + "' for writing");
    }
    written_.push_back(path);
    out << body;
    out.close();
    if (!out) {
      throw IoError("write to '" + path.string() + "' failed");
    }
    names_.push_back(name);
  }

  // Removes what this run wrote.
  void rollback() noexcept {
    std::error_code ec;
    for (const auto& p : written_) {
      fs::remove(p, ec);
    }
    if (created_dir_ && fs::is_empty(dir_, ec)) {
      fs::remove(dir_, ec);
    }
  }

  const std::vector<std::string>& names() const { return names_; }

 private:
  std::string dir_;
  bool created_dir_ = false;
  std::vector<fs::path> written_;
  std::vector<std::string> names_;
};

json number_or_null(double v) {
  return std::isfinite(v) ? json(v) : json(nullptr);
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) {
    return "nan";
  }
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out =
      "variant,scheme,N,tau,error,log10_tau,log10_error,"
      "max_abs_trace_deviation,min_min_eig,max_rank\n";
  for (const auto& r : rows) {
    out += r.variant + "," + std::string(run_scheme_name(r.scheme)) + "," +
           std::to_string(r.steps) + "," + format_number(r.tau) + "," +
           format_number(r.error) + "," + format_number(std::log10(r.tau)) +
           "," + format_number(std::log10(r.error)) + "," +
           format_number(r.max_abs_trace_deviation) + "," +
           format_number(r.min_min_eig) + "," + std::to_string(r.max_rank) +
           "\n";
  }
  return out;
}

std::string steps_csv(const std::vector<StepDiagnostics>& rows,
                      const std::vector<Index>& populations) {
  std::string out = "step,time,trace_deviation,min_eig,rank";
  for (Index i : populations) {
    out += ",pop_" + std::to_string(i);
  }
  out += "\n";
  for (const auto& r : rows) {
    out += std::to_string(r.step) + "," + format_number(r.time) + "," +
           format_number(r.trace_deviation) + "," + format_number(r.min_eig) +
           "," + std::to_string(r.rank);
    for (const auto& [i, p] : r.populations) {
      out += "," + format_number(p);
    }
    out += "\n";
  }
  return out;
}

std::string ce_probe_csv(const std::vector<CeProbeRow>& rows) {
  std::string out = "tau,tol1,numerator,ce\n";
  for (const auto& r : rows) {
    out += format_number(r.tau) + "," + format_number(r.tol1) + "," +
           format_number(r.numerator) + "," + format_number(r.ce) + "\n";
  }
  return out;
}

std::string run_record_json(const RunRecord& record) {
  json j;
  j["config_hash"] = record.config_hash;
  j["name"] = record.name;
  j["kind"] =
      record.kind == ExperimentKind::CeProbe ? "ce_probe" : "convergence";
  j["output_dir"] = record.output_dir;
  j["wall_time_s"] = record.wall_time;
  j["runs"] = json::array();
  for (const auto& r : record.rows) {
    j["runs"].push_back({{"variant", r.variant},
                         {"scheme", run_scheme_name(r.scheme)},
                         {"N", r.steps},
                         {"tau", r.tau},
                         {"error", number_or_null(r.error)},
                         {"max_abs_trace_deviation", r.max_abs_trace_deviation},
                         {"min_min_eig", r.min_min_eig},
                         {"max_rank", r.max_rank},
                         {"steps_file", r.steps_file},
                         {"wall_time_s", r.wall_time}});
  }
  j["slopes"] = json::array();
  for (const auto& s : record.slopes) {
    j["slopes"].push_back({{"variant", s.variant},
                           {"scheme", run_scheme_name(s.scheme)},
                           {"slope", s.slope},
                           {"points", s.points}});
  }
  j["files"] = record.files;
  return j.dump(2) + "\n";
}

std::string resolve_output_dir(const ExperimentConfig& config,
                               const RunOptions& options) {
  if (!options.output_dir.empty()) {
    return options.output_dir;
  }
  const char* env = std::getenv(kOutputRootEnv);
  const fs::path root = env != nullptr && *env != '\0' ? env : "results";
  if (!config.output_dir.empty()) {
    const fs::path p(config.output_dir);
    return p.is_absolute() ? p.string() : (root / p).string();
  }
  return (root / config.name).string();
}

RunRecord run_experiment(const ExperimentConfig& config,
                         const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  RunRecord record;
  record.config_hash = config_hash(config);
  record.name = config.name;
  record.kind = config.kind;
  record.output_dir = resolve_output_dir(config, options);
  const int threads = options.threads > 0 ? options.threads : config.threads;

  OutputWriter writer(record.output_dir);
  try {
    if (config.kind == ExperimentKind::CeProbe) {
      const LindbladModel model = config.model.build();
      CeProbeOptions probe;
      probe.step_index = config.probe.step_index;
      probe.dense_threshold = 0;
      record.probe_rows = expm_constant_probe(model, config.probe.taus,
                                              config.probe.tol1s, config.seed,
                                              probe);
      if (config.gate) {
        for (const auto& r : record.probe_rows) {
          if (!std::isfinite(r.ce) || !(r.ce > 0.0)) {
            throw GateError("C_e probe produced a non-positive or non-finite "
                            "value at tau " + format_number(r.tau));
          }
        }
      }
      if (options.write_files) {
        writer.prepare();
        writer.write("ce_probe.csv", ce_probe_csv(record.probe_rows));
      }
    } else {
      std::vector<VariantContext> contexts;
      for (auto& [label, cfg] : expand_variants(config)) {
        VariantContext ctx;
        ctx.label = label;
        ctx.config = std::move(cfg);
        ctx.model.emplace(ctx.config.model.build());
        build_initial(ctx);
        build_reference(ctx);
        contexts.push_back(std::move(ctx));
      }
      std::vector<Job> jobs;
      bool many_schemes = false;
      for (std::size_t v = 0; v < contexts.size(); ++v) {
        const auto& cfg = contexts[v].config;
        many_schemes = many_schemes || cfg.schemes.size() > 1;
        for (RunScheme s : cfg.schemes) {
          for (long n : cfg.steps) {
            jobs.push_back({v, s, n});
          }
        }
      }
      std::vector<JobResult> results = run_jobs(contexts, jobs, threads);
      const bool with_variant = !config.variants.empty();
      std::map<std::string, int> used;
      for (std::size_t i = 0; i < results.size(); ++i) {
        auto& r = results[i];
        if (contexts[jobs[i].variant].config.gate) {
          check_gate(r);
        }
        std::string name = steps_file_name(r.row, with_variant, many_schemes);
        if (used[name]++ > 0) {
          name = name.substr(0, name.size() - 4) + "_N" +
                 std::to_string(r.row.steps) + ".csv";
        }
        r.row.steps_file = name;
        record.rows.push_back(r.row);
      }
      record.slopes = fit_slopes(record.rows);
      if (options.write_files) {
        writer.prepare();
        for (std::size_t i = 0; i < results.size(); ++i) {
          writer.write(results[i].row.steps_file,
                       steps_csv(results[i].diagnostics,
                                 contexts[jobs[i].variant].config.populations));
        }
        writer.write("summary.csv", summary_csv(record.rows));
      }
    }
    record.wall_time = seconds_since(start);
    if (options.write_files) {
      record.files = writer.names();
      record.files.push_back("run.json");
      writer.write("run.json", run_record_json(record));
    }
  } catch (...) {
    writer.rollback();
    throw;
  }
  return record;
}

}  // namespace lindexp
