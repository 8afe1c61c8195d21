#include "msnt/runner.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "msnt/errors.hpp"

namespace msnt {

namespace {

std::string num(double v) { return fmt::format("{:.17g}", v); }

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

std::string error_report(const std::string& status, int code, const std::string& message, double time, int step,
                         const nlohmann::json& extra = nlohmann::json::object()) {
  nlohmann::json j;
  j["status"] = status;
  j["exit_code"] = code;
  j["message"] = message;
  j["time"] = time;
  j["step"] = step;
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  return j.dump(2) + "\n";
}

double relative_drift(double now, double initial) {
  return std::abs(now - initial) / std::max(std::abs(initial), std::numeric_limits<double>::min());
}

// Returns a description of the first violated invariant, or an empty string.
std::string audit(const RunConfig& cfg, const DiagnosticsRecord& first, const DiagnosticsRecord& rec,
                  double max_rho_total) {
  const MixtureParams& p = cfg.mixture;
  if (p.epsilon == 0.0)
    for (int i = 0; i < p.n; ++i) {
      const double drift = relative_drift(rec.masses[i], first.masses[i]);
      if (drift > 1e-10) return fmt::format("mass of species {} drifted by {:.3e} (relative)", i + 1, drift);
    }
  if (rec.max_total_density_defect > 1e-12 * max_rho_total)
    return fmt::format("total density changed by {:.3e}", rec.max_total_density_defect);
  if (rec.fourier_dissipation < 0.0 || rec.friction_dissipation < 0.0) return "negative dissipation";
  if (p.lambda == 0.0 && p.epsilon == 0.0) {
    const double drift = relative_drift(rec.energy, first.energy);
    if (drift > 1e-8) return fmt::format("energy drifted by {:.3e} (relative)", drift);
    if (rec.entropy_margin < -10.0 * cfg.stepper.newton_tol)
      return fmt::format("entropy inequality violated, margin {:.3e}", rec.entropy_margin);
  }
  return {};
}

}  // namespace

std::string config_header(const RunConfig& cfg) {
  std::string out;
  std::istringstream in(render_config(cfg));
  std::string line;
  out += fmt::format("# seed = {}\n", cfg.seed);
  while (std::getline(in, line)) out += "# " + line + "\n";
  return out;
}

std::string diagnostics_csv(const RunConfig& cfg, const std::vector<DiagnosticsRecord>& records) {
  std::string out = config_header(cfg);
  out += "time,H,energy";
  for (int i = 0; i < cfg.mixture.n; ++i) out += fmt::format(",mass_{}", i + 1);
  out += ",fourier_dissipation,friction_dissipation,max_grad_p,sup_rho_theta2,entropy_margin\n";
  const int every = std::max(cfg.output.every, 1);
  for (size_t k = 0; k < records.size(); ++k) {
    if (k % every != 0 && k + 1 != records.size()) continue;
    const DiagnosticsRecord& r = records[k];
    out += num(r.time) + "," + num(r.entropy) + "," + num(r.energy);
    for (double m : r.masses) out += "," + num(m);
    out += "," + num(r.fourier_dissipation) + "," + num(r.friction_dissipation) + "," + num(r.max_grad_p) + "," +
           num(r.sup_rho_theta2) + "," + num(r.entropy_margin) + "\n";
  }
  return out;
}

std::string snapshot_csv(const RunConfig& cfg, const Grid& g, const std::vector<LocalState>& cells) {
  std::string out = config_header(cfg);
  out += "x";
  for (int i = 0; i < cfg.mixture.n; ++i) out += fmt::format(",rho_{}", i + 1);
  out += ",theta\n";
  for (int k = 0; k < static_cast<int>(cells.size()); ++k) {
    out += num(g.center(k));
    for (int i = 0; i < cfg.mixture.n; ++i) out += "," + num(cells[k].rho(i));
    out += "," + num(cells[k].theta) + "\n";
  }
  return out;
}

RunOutcome run(const RunConfig& cfg, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  RunOutcome out;
  const std::filesystem::path dir = cfg.output.directory;
  int step = 0;
  double time = 0.0;

  auto finish = [&]() {
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!options.write_files) return;
    write_file(dir / cfg.output.diagnostics, diagnostics_csv(cfg, out.records));
    if (!out.final_cells.empty()) write_file(dir / cfg.output.snapshot, snapshot_csv(cfg, cfg.grid, out.final_cells));
    const std::filesystem::path err = dir / "error.json";
    if (!out.error_json.empty()) write_file(err, out.error_json);
    else std::filesystem::remove(err);
  };

  try {
    cfg.validate();
    const Scheme scheme(cfg.mixture, cfg.grid, cfg.stepper);
    TrajectoryState state = make_trajectory(cfg.mixture, sample_initial(cfg));
    const double max_rho_total = *std::max_element(state.rho_total.begin(), state.rho_total.end());

    DiagnosticsRecord rec = make_record(scheme, state);
    rec.sup_rho_theta2 = rec.rho_theta2;
    out.records.push_back(rec);
    out.final_cells = scheme.states(state);

    for (step = 1; step <= cfg.steps; ++step) {
      try {
        state = scheme.step(state).state;
      } catch (const StepFailed& e) {
        out.exit_code = kExitStepFailed;
        out.error_json = error_report("step_failed", kExitStepFailed, e.what(), state.time, step,
                                      {{"last_residual", e.last_residual()}});
        break;
      }
      // Pin the clock to the step count so times do not accumulate rounding.
      state.time = step * cfg.stepper.tau;
      time = state.time;
      const DiagnosticsRecord& prev = out.records.back();
      DiagnosticsRecord next = make_record(scheme, state);
      next.sup_rho_theta2 = std::max(prev.sup_rho_theta2, next.rho_theta2);
      next.entropy_margin =
          prev.entropy - next.entropy - cfg.stepper.tau * (next.fourier_dissipation + next.friction_dissipation);
      out.records.push_back(next);
      out.final_cells = scheme.states(state);
      if (options.strict) {
        const std::string violation = audit(cfg, out.records.front(), next, max_rho_total);
        if (!violation.empty()) {
          out.exit_code = kExitInvariant;
          out.error_json = error_report("invariant_violated", kExitInvariant, violation, time, step);
          break;
        }
      }
    }
  } catch (const ValidationError& e) {
    out.exit_code = kExitConfig;
    out.error_json = error_report("invalid_config", kExitConfig, e.what(), time, step,
                                  {{"assumption", e.assumption()}});
  } catch (const Error& e) {
    out.exit_code = kExitStepFailed;
    out.error_json = error_report("numerical_failure", kExitStepFailed, e.what(), time, step);
  }
  finish();
  return out;
}

std::vector<std::string> sweep_parameters() { return {"tau", "N", "epsilon", "lambda"}; }

RunConfig with_parameter(const RunConfig& cfg, const std::string& param, double value) {
  RunConfig c = cfg;
  if (param == "tau") {
    // Keep the final time fixed.
    const double t_end = cfg.steps * cfg.stepper.tau;
    c.stepper.tau = value;
    c.steps = std::max(1, static_cast<int>(std::llround(t_end / value)));
  } else if (param == "N") {
    if (value < 1 || value != std::floor(value)) throw ValidationError("A1", "N must be a positive integer");
    c.grid.cells = static_cast<int>(value);
  } else if (param == "epsilon") {
    c.mixture.epsilon = value;
  } else if (param == "lambda") {
    c.mixture.lambda = value;
  } else {
    throw ValidationError("", "unknown sweep parameter '" + param + "' (tau, N, epsilon, lambda)");
  }
  return c;
}

SweepOutcome sweep(const RunConfig& cfg, const std::string& param, const std::vector<double>& values,
                   const RunOptions& options) {
  if (values.empty()) throw ValidationError("", "sweep needs at least one value");
  std::vector<RunConfig> configs;
  SweepOutcome result;
  for (double v : values) {
    RunConfig c = with_parameter(cfg, param, v);
    c.output.directory = (std::filesystem::path(cfg.output.directory) / fmt::format("{}_{}", param, v)).string();
    configs.push_back(std::move(c));
    SweepRow row;
    row.value = v;
    row.directory = configs.back().output.directory;
    result.rows.push_back(row);
  }

  const auto finest = param == "N" ? std::max_element(values.begin(), values.end())
                                   : std::min_element(values.begin(), values.end());
  result.reference = static_cast<std::size_t>(finest - values.begin());

  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MSNT_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) threads = std::min<unsigned>(threads, static_cast<unsigned>(cap));
  }
  threads = std::min<unsigned>(threads, static_cast<unsigned>(configs.size()));

  std::vector<RunOutcome> outcomes(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        outcomes[i] = run(configs[i], options);
      } catch (const std::exception& e) {
        outcomes[i].exit_code = kExitStepFailed;
        outcomes[i].error_json = error_report("io_failure", kExitStepFailed, e.what(), 0.0, 0);
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  const RunOutcome& ref = outcomes[result.reference];
  const RunConfig& ref_cfg = configs[result.reference];
  for (std::size_t i = 0; i < configs.size(); ++i) {
    SweepRow& row = result.rows[i];
    const RunOutcome& o = outcomes[i];
    row.exit_code = o.exit_code;
    row.wall_seconds = o.wall_seconds;
    row.final_entropy = o.records.empty() ? std::numeric_limits<double>::quiet_NaN() : o.records.back().entropy;
    row.final_relative_entropy = std::numeric_limits<double>::quiet_NaN();
    if (o.exit_code == kExitOk && ref.exit_code == kExitOk && ref_cfg.grid.cells % configs[i].grid.cells == 0) {
      const std::vector<LocalState> reference =
          restrict_states(configs[i].mixture, ref_cfg.grid, ref.final_cells, configs[i].grid);
      row.final_relative_entropy = relative_entropy(configs[i].mixture, configs[i].grid, o.final_cells, reference);
    }
    if (o.exit_code != kExitOk) result.exit_code = o.exit_code;
  }
  if (options.write_files)
    write_file(std::filesystem::path(cfg.output.directory) / "summary.csv", summary_csv(param, result));
  return result;
}

std::string summary_csv(const std::string& param, const SweepOutcome& outcome) {
  std::string out = fmt::format("# sweep over {}; relative entropy is measured against {} = {}\n", param, param,
                                num(outcome.rows[outcome.reference].value));
  out += "value,final_H,final_relative_entropy,wall_seconds,exit_code\n";
  for (const SweepRow& r : outcome.rows)
    out += fmt::format("{},{},{},{},{}\n", num(r.value), num(r.final_entropy), num(r.final_relative_entropy),
                       num(r.wall_seconds), r.exit_code);
  return out;
}

}  // namespace msnt
