#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "lindexp/errors.hpp"
#include "lindexp/harness.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw lindexp::IoError("cannot read '" + path + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void report(const lindexp::RunRecord& rec) {
  std::cout << "config " << rec.config_hash << " -> " << rec.output_dir << "\n";
  for (const auto& row : rec.rows) {
    std::cout << "  ";
    if (!row.variant.empty()) {
      std::cout << row.variant << " ";
    }
    std::cout << lindexp::run_scheme_name(row.scheme) << " N=" << row.steps
              << " tau=" << row.tau << " error=" << row.error
              << " min_eig=" << row.min_min_eig << "\n";
  }
  for (const auto& s : rec.slopes) {
    std::cout << "  slope ";
    if (!s.variant.empty()) {
      std::cout << s.variant << " ";
    }
    std::cout << lindexp::run_scheme_name(s.scheme) << " " << s.slope << "\n";
  }
  if (!rec.probe_rows.empty()) {
    std::cout << "  " << rec.probe_rows.size() << " probe rows\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exponential Euler integrators for the Lindblad equation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int threads = 0;
  auto* run = app.add_subcommand("run", "Run an experiment config (JSON)");
  run->add_option("config", config_path, "Config file")->required();
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--threads", threads, "Worker threads")
      ->check(CLI::Range(1, 256));

  std::string preset_name;
  auto* preset = app.add_subcommand("preset", "Run a built-in preset");
  preset->add_option("name", preset_name, "Preset name")->required();
  preset->add_option("--out", out_dir, "Output directory");
  preset->add_option("--threads", threads, "Worker threads")
      ->check(CLI::Range(1, 256));

  auto* list = app.add_subcommand("list-presets", "List preset names");

  std::string show_name;
  auto* show = app.add_subcommand("show-preset", "Print a preset's config");
  show->add_option("name", show_name, "Preset name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    lindexp::RunOptions opts;
    opts.output_dir = out_dir;
    opts.threads = threads;
    if (*run) {
      const auto cfg = lindexp::parse_config(read_file(config_path));
      report(lindexp::run_experiment(cfg, opts));
    } else if (*preset) {
      report(lindexp::run_experiment(lindexp::preset(preset_name), opts));
    } else if (*list) {
      for (const auto& name : lindexp::preset_names()) {
        const auto cfg = lindexp::preset(name);
        std::cout << name << "\t" << cfg.description << "\n";
      }
    } else if (*show) {
      std::cout << lindexp::preset_document(show_name) << "\n";
    }
  } catch (const lindexp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
