// msnt: batch driver for the Maxwell-Stefan-Fourier finite-volume solver.
//
//   msnt --print-defaults [--scenario NAME]
//   msnt run CONFIG [--strict] [--seed S] [--out DIR]
//   msnt sweep CONFIG --param tau --values 1e-2 5e-3 [--strict] [--seed S] [--out DIR]

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "msnt/config.hpp"
#include "msnt/errors.hpp"
#include "msnt/runner.hpp"

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw msnt::Error("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int report_config_error(const std::string& message, const std::string& kind, int line,
                        const std::string& assumption) {
  nlohmann::json j;
  j["status"] = kind;
  j["exit_code"] = msnt::kExitConfig;
  j["message"] = message;
  if (line > 0) j["line"] = line;
  if (!assumption.empty()) j["assumption"] = assumption;
  std::cerr << j.dump(2) << "\n";
  return msnt::kExitConfig;
}

struct Common {
  std::string config_path;
  bool strict = false;
  std::optional<std::uint64_t> seed;
  std::string out;
};

msnt::RunConfig load(const Common& c) {
  msnt::RunConfig cfg = msnt::parse_config(read_text(c.config_path));
  if (c.seed) cfg.seed = *c.seed;
  if (!c.out.empty()) cfg.output.directory = c.out;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Implicit finite-volume solver for Maxwell-Stefan-Fourier mixtures"};
  app.require_subcommand(0, 1);

  bool print_defaults = false;
  std::string scenario = "custom";
  app.add_flag("--print-defaults", print_defaults, "Print the resolved default configuration and exit");
  app.add_option("--scenario", scenario, "Preset shown by --print-defaults")
      ->check(CLI::IsMember([] {
        auto names = msnt::scenario_names();
        names.insert(names.begin(), "custom");
        return names;
      }()));

  Common run_opts;
  CLI::App* run = app.add_subcommand("run", "Run one trajectory");
  run->add_option("config", run_opts.config_path, "Configuration file")->required();
  run->add_flag("--strict", run_opts.strict, "Audit conservation and entropy after every step (exit 3 on failure)");
  run->add_option("--seed", run_opts.seed, "Seed for the initial perturbation");
  run->add_option("--out", run_opts.out, "Output directory (overrides [output] directory)");

  Common sweep_opts;
  std::string param;
  std::vector<double> values;
  CLI::App* sweep = app.add_subcommand("sweep", "Run one trajectory per parameter value");
  sweep->add_option("config", sweep_opts.config_path, "Configuration file")->required();
  sweep->add_option("--param", param, "Parameter to vary")
      ->required()
      ->check(CLI::IsMember(msnt::sweep_parameters()));
  sweep->add_option("--values", values, "Values of the parameter")->required();
  sweep->add_flag("--strict", sweep_opts.strict, "Audit every run");
  sweep->add_option("--seed", sweep_opts.seed, "Seed for the initial perturbation");
  sweep->add_option("--out", sweep_opts.out, "Output directory (overrides [output] directory)");

  CLI11_PARSE(app, argc, argv);

  if (print_defaults) {
    std::cout << msnt::render_config(msnt::scenario_config(scenario));
    return 0;
  }

  try {
    if (*run) {
      const msnt::RunConfig cfg = load(run_opts);
      const msnt::RunOutcome out = msnt::run(cfg, {run_opts.strict, true});
      if (!out.error_json.empty()) std::cerr << out.error_json;
      return out.exit_code;
    }
    if (*sweep) {
      const msnt::RunConfig cfg = load(sweep_opts);
      const msnt::SweepOutcome out = msnt::sweep(cfg, param, values, {sweep_opts.strict, true});
      std::cout << msnt::summary_csv(param, out);
      return out.exit_code;
    }
  } catch (const msnt::ParseError& e) {
    return report_config_error(e.what(), "parse_error", e.line(), "");
  } catch (const msnt::ValidationError& e) {
    return report_config_error(e.what(), "invalid_config", 0, e.assumption());
  } catch (const msnt::Error& e) {
    return report_config_error(e.what(), "error", 0, "");
  }

  std::cout << app.help();
  return 0;
}
