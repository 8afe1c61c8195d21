#include "msnt/config.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include "msnt/errors.hpp"

namespace msnt {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double to_double(std::string_view token) {
  const std::string t = trim(token);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw std::invalid_argument("expected a number, got '" + t + "'");
  return v;
}

long to_integer(std::string_view token) {
  const std::string t = trim(token);
  long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw std::invalid_argument("expected an integer, got '" + t + "'");
  return v;
}

std::vector<double> to_list(std::string_view text) {
  std::vector<double> out;
  std::string item;
  std::stringstream ss{std::string(text)};
  while (std::getline(ss, item, ',')) out.push_back(to_double(item));
  return out;
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::string join(const std::vector<double>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + num(v[i]);
  return out;
}

Matrix friction_from_list(int n, const std::vector<double>& values) {
  Matrix b = Matrix::Zero(n, n);
  const size_t pairs = static_cast<size_t>(n) * (n - 1) / 2;
  if (values.size() == 1) {
    b.setConstant(values[0]);
    b.diagonal().setZero();
    return b;
  }
  if (values.size() != pairs)
    throw std::invalid_argument(fmt::format("friction needs 1 or {} values (upper triangle b_12, b_13, ...), got {}",
                                            pairs, values.size()));
  size_t idx = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) b(i, j) = b(j, i) = values[idx++];
  return b;
}

std::vector<double> friction_to_list(const Matrix& b) {
  std::vector<double> out;
  for (int i = 0; i < b.rows(); ++i)
    for (int j = i + 1; j < b.cols(); ++j) out.push_back(b(i, j));
  return out;
}

struct Entry {
  std::string section;
  std::string key;
  std::string value;
  int line = 0;
};

}  // namespace

double Profile::operator()(double x) const {
  switch (kind) {
    case Kind::Constant:
      return args[0];
    case Kind::Step: {
      const double left = args[0], right = args[1], x0 = args[2];
      const double width = args.size() > 3 ? args[3] : 0.0;
      if (width <= 0.0) return x < x0 ? left : right;
      return left + (right - left) * 0.5 * (1.0 + std::tanh((x - x0) / width));
    }
    case Kind::Gaussian: {
      const double z = (x - args[2]) / args[3];
      return args[0] + args[1] * std::exp(-0.5 * z * z);
    }
  }
  return args[0];
}

std::string Profile::to_string() const {
  std::string name = kind == Kind::Constant ? "constant" : kind == Kind::Step ? "step" : "gaussian";
  for (double a : args) name += " " + num(a);
  return name;
}

Profile Profile::parse(std::string_view text) {
  std::stringstream ss{std::string(text)};
  std::string name;
  ss >> name;
  std::vector<double> args;
  std::string tok;
  while (ss >> tok) args.push_back(to_double(tok));
  Profile p;
  if (name == "constant") {
    p.kind = Kind::Constant;
    if (args.size() != 1) throw std::invalid_argument("constant profile takes 1 value");
  } else if (name == "step") {
    p.kind = Kind::Step;
    if (args.size() != 3 && args.size() != 4) throw std::invalid_argument("step profile takes left right x0 [width]");
  } else if (name == "gaussian") {
    p.kind = Kind::Gaussian;
    if (args.size() != 4) throw std::invalid_argument("gaussian profile takes base amplitude center width");
    if (!(args[3] > 0.0)) throw std::invalid_argument("gaussian width must be positive");
  } else {
    throw std::invalid_argument("unknown profile '" + name + "' (constant, step, gaussian)");
  }
  p.args = std::move(args);
  return p;
}

RunConfig default_config() {
  RunConfig c;
  c.mixture = MixtureParams::with_masses(Vector::Ones(2), 1.0);
  c.initial.rho.assign(2, Profile::constant(1.0));
  c.initial.theta = Profile::constant(1.0);
  return c;
}

std::vector<std::string> scenario_names() {
  return {"uniform-rest", "two-species-mixing", "robin-cooling", "equilibration"};
}

RunConfig scenario_config(const std::string& name) {
  RunConfig c = default_config();
  c.scenario = name;
  if (name == "custom") return c;
  if (name == "uniform-rest") {
    c.mixture = MixtureParams::with_masses((Vector(2) << 1.0, 2.0).finished(), 1.0);
    c.grid = Grid(20, 1.0);
    c.stepper.tau = 1e-2;
    c.steps = 100;
    c.initial.rho = {Profile::constant(1.0), Profile::constant(1.0)};
    c.initial.theta = Profile::constant(1.0);
  } else if (name == "two-species-mixing") {
    // Two species exchange places through an inert carrier while a hot spot relaxes.
    c.mixture = MixtureParams::with_masses((Vector(3) << 1.0, 2.0, 4.0).finished(), 1.0);
    c.mixture.b = friction_from_list(3, {1.0, 2.0, 0.5});
    c.mixture.c_w = 1.5;
    c.mixture.kappa0 = 0.5;
    c.mixture.kappa2 = 0.25;
    c.grid = Grid(100, 1.0);
    c.stepper.tau = 1e-3;
    c.steps = 1000;
    c.initial.rho = {Profile::parse("step 0.9 0.1 0.5 0.05"), Profile::parse("step 0.1 0.9 0.5 0.05"),
                     Profile::constant(0.5)};
    c.initial.theta = Profile::parse("gaussian 1 0.5 0.3 0.1");
  } else if (name == "robin-cooling") {
    c.mixture = MixtureParams::with_masses((Vector(2) << 1.0, 2.0).finished(), 1.0);
    c.mixture.lambda = 1.0;
    c.mixture.theta0 = 1.0;
    c.grid = Grid(1, 1.0);
    c.stepper.tau = 1e-2;
    c.steps = 100;
    c.initial.rho = {Profile::constant(1.0), Profile::constant(1.0)};
    c.initial.theta = Profile::constant(2.0);
  } else if (name == "equilibration") {
    c.mixture = MixtureParams::with_masses((Vector(2) << 1.0, 3.0).finished(), 1.0);
    c.grid = Grid(40, 1.0);
    c.stepper.tau = 2e-2;
    c.steps = 400;
    c.initial.rho = {Profile::parse("gaussian 0.5 0.3 0.5 0.15"), Profile::parse("gaussian 0.5 -0.3 0.5 0.15")};
    c.initial.theta = Profile::parse("step 1.2 0.8 0.5 0.1");
    c.initial.perturbation = 0.01;
  } else {
    throw ValidationError("", "unknown scenario '" + name + "'");
  }
  return c;
}

void RunConfig::validate() const {
  mixture.validate();
  stepper.validate();
  if (grid.cells < 1) throw ValidationError("A1", "grid needs at least one cell");
  if (!(grid.length > 0.0)) throw ValidationError("A1", "domain length must be positive");
  if (steps < 0) throw ValidationError("", "steps must be non-negative");
  if (output.every < 1) throw ValidationError("", "output cadence 'every' must be positive");
  if (static_cast<int>(initial.rho.size()) != mixture.n)
    throw ValidationError("A2", "one density profile rho_i is required per species");
  if (!(initial.perturbation >= 0.0 && initial.perturbation < 1.0))
    throw ValidationError("A2", "perturbation amplitude must lie in [0, 1)");

  double min_total = std::numeric_limits<double>::infinity();
  double min_theta = std::numeric_limits<double>::infinity();
  for (int k = 0; k < grid.cells; ++k) {
    const double x = grid.center(k);
    double total = 0.0;
    for (int i = 0; i < mixture.n; ++i) {
      const double r = initial.rho[i](x);
      if (!(r >= 0.0) || !std::isfinite(r))
        throw ValidationError("A2", fmt::format("initial density rho_{} must be non-negative and bounded", i + 1));
      total += r;
    }
    min_total = std::min(min_total, total);
    const double th = initial.theta(x);
    if (!std::isfinite(th)) throw ValidationError("A2", "initial temperature must be bounded");
    min_theta = std::min(min_theta, th);
  }
  if (!(min_total > 0.0)) throw ValidationError("A2", "total initial density must satisfy rho_* > 0");
  if (!(min_theta > 0.0)) throw ValidationError("A2", "initial temperature must satisfy inf_Ω θ⁰ > 0");
}

RunConfig parse_config(std::string_view text) {
  std::vector<Entry> entries;
  std::string section;
  std::string scenario = "custom";
  int scenario_line = 0;
  int line_no = 0;
  std::stringstream ss{std::string(text)};
  std::string raw;
  while (std::getline(ss, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, "unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      static const std::vector<std::string> known{"mixture", "grid", "stepper", "initial", "output"};
      if (std::find(known.begin(), known.end(), section) == known.end())
        throw ParseError(line_no, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected 'key = value'");
    Entry e{section, trim(std::string_view(line).substr(0, eq)), trim(std::string_view(line).substr(eq + 1)),
            line_no};
    if (e.key.empty()) throw ParseError(line_no, "empty key");
    if (section.empty()) {
      if (e.key != "scenario") throw ParseError(line_no, "unknown top-level key '" + e.key + "'");
      scenario = e.value;
      scenario_line = line_no;
      continue;
    }
    entries.push_back(std::move(e));
  }

  RunConfig c;
  try {
    c = scenario_config(scenario);
  } catch (const ValidationError& err) {
    throw ParseError(scenario_line, err.what());
  }

  // Species count first: list-valued keys are sized against it.
  bool masses_set = false, friction_set = false;
  std::map<int, bool> rho_set;
  std::vector<double> friction_values;
  for (const Entry& e : entries)
    if (e.section == "mixture" && e.key == "species") {
      try {
        const long n = to_integer(e.value);
        if (n < 2) throw ValidationError("", "species count must be at least 2");
        if (n != c.mixture.n) {
          c.mixture.n = static_cast<int>(n);
          c.mixture.m = Vector::Ones(n);
          c.mixture.b = friction_from_list(static_cast<int>(n), {1.0});
          c.initial.rho.assign(n, Profile::constant(1.0));
        }
      } catch (const std::invalid_argument& err) {
        throw ParseError(e.line, err.what());
      }
    }

  for (const Entry& e : entries) {
    try {
      const std::string& k = e.key;
      if (e.section == "mixture") {
        if (k == "species") continue;
        if (k == "molar_masses") {
          const auto v = to_list(e.value);
          if (static_cast<int>(v.size()) != c.mixture.n)
            throw std::invalid_argument(fmt::format("molar_masses needs {} values", c.mixture.n));
          c.mixture.m = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
          masses_set = true;
        } else if (k == "friction") {
          friction_values = to_list(e.value);
          friction_set = true;
        } else if (k == "heat_capacity") c.mixture.c_w = to_double(e.value);
        else if (k == "kappa0") c.mixture.kappa0 = to_double(e.value);
        else if (k == "kappa2") c.mixture.kappa2 = to_double(e.value);
        else if (k == "lambda") c.mixture.lambda = to_double(e.value);
        else if (k == "theta0") c.mixture.theta0 = to_double(e.value);
        else if (k == "epsilon") c.mixture.epsilon = to_double(e.value);
        else throw std::invalid_argument("unknown key '" + k + "' in [mixture]");
      } else if (e.section == "grid") {
        if (k == "cells") c.grid.cells = static_cast<int>(to_integer(e.value));
        else if (k == "length") c.grid.length = to_double(e.value);
        else throw std::invalid_argument("unknown key '" + k + "' in [grid]");
      } else if (e.section == "stepper") {
        if (k == "tau") c.stepper.tau = to_double(e.value);
        else if (k == "steps") c.steps = static_cast<int>(to_integer(e.value));
        else if (k == "newton_tol") c.stepper.newton_tol = to_double(e.value);
        else if (k == "newton_max") c.stepper.newton_max = static_cast<int>(to_integer(e.value));
        else if (k == "damping") c.stepper.damping = to_double(e.value);
        else if (k == "max_halvings") c.stepper.max_halvings = static_cast<int>(to_integer(e.value));
        else if (k == "face_average") {
          if (e.value == "arithmetic") c.stepper.averaging = FaceAverage::Arithmetic;
          else if (e.value == "harmonic") c.stepper.averaging = FaceAverage::Harmonic;
          else throw std::invalid_argument("face_average must be 'arithmetic' or 'harmonic'");
        } else throw std::invalid_argument("unknown key '" + k + "' in [stepper]");
      } else if (e.section == "initial") {
        if (k == "theta") c.initial.theta = Profile::parse(e.value);
        else if (k == "perturbation") c.initial.perturbation = to_double(e.value);
        else if (k.rfind("rho_", 0) == 0) {
          const long i = to_integer(std::string_view(k).substr(4));
          if (i < 1 || i > c.mixture.n) throw std::invalid_argument("species index out of range in '" + k + "'");
          c.initial.rho[i - 1] = Profile::parse(e.value);
          rho_set[static_cast<int>(i)] = true;
        } else throw std::invalid_argument("unknown key '" + k + "' in [initial]");
      } else if (e.section == "output") {
        if (k == "directory") c.output.directory = e.value;
        else if (k == "diagnostics") c.output.diagnostics = e.value;
        else if (k == "snapshot") c.output.snapshot = e.value;
        else if (k == "every") c.output.every = static_cast<int>(to_integer(e.value));
        else throw std::invalid_argument("unknown key '" + k + "' in [output]");
      }
    } catch (const std::invalid_argument& err) {
      throw ParseError(e.line, err.what());
    }
  }
  if (friction_set) {
    try {
      c.mixture.b = friction_from_list(c.mixture.n, friction_values);
    } catch (const std::invalid_argument& err) {
      throw ParseError(0, err.what());
    }
  }
  (void)masses_set;
  c.validate();
  return c;
}

std::string render_config(const RunConfig& c) {
  std::string out;
  out += fmt::format("scenario = {}\n", c.scenario);
  out += "[mixture]\n";
  out += fmt::format("species = {}\n", c.mixture.n);
  out += fmt::format("molar_masses = {}\n", join(std::vector<double>(c.mixture.m.data(), c.mixture.m.data() + c.mixture.n)));
  out += fmt::format("friction = {}\n", join(friction_to_list(c.mixture.b)));
  out += fmt::format("heat_capacity = {}\n", num(c.mixture.c_w));
  out += fmt::format("kappa0 = {}\n", num(c.mixture.kappa0));
  out += fmt::format("kappa2 = {}\n", num(c.mixture.kappa2));
  out += fmt::format("lambda = {}\n", num(c.mixture.lambda));
  out += fmt::format("theta0 = {}\n", num(c.mixture.theta0));
  out += fmt::format("epsilon = {}\n", num(c.mixture.epsilon));
  out += "[grid]\n";
  out += fmt::format("cells = {}\n", c.grid.cells);
  out += fmt::format("length = {}\n", num(c.grid.length));
  out += "[stepper]\n";
  out += fmt::format("tau = {}\n", num(c.stepper.tau));
  out += fmt::format("steps = {}\n", c.steps);
  out += fmt::format("newton_tol = {}\n", num(c.stepper.newton_tol));
  out += fmt::format("newton_max = {}\n", c.stepper.newton_max);
  out += fmt::format("damping = {}\n", num(c.stepper.damping));
  out += fmt::format("max_halvings = {}\n", c.stepper.max_halvings);
  out += fmt::format("face_average = {}\n",
                     c.stepper.averaging == FaceAverage::Harmonic ? "harmonic" : "arithmetic");
  out += "[initial]\n";
  for (int i = 0; i < c.mixture.n; ++i) out += fmt::format("rho_{} = {}\n", i + 1, c.initial.rho[i].to_string());
  out += fmt::format("theta = {}\n", c.initial.theta.to_string());
  out += fmt::format("perturbation = {}\n", num(c.initial.perturbation));
  out += "[output]\n";
  out += fmt::format("directory = {}\n", c.output.directory);
  out += fmt::format("diagnostics = {}\n", c.output.diagnostics);
  out += fmt::format("snapshot = {}\n", c.output.snapshot);
  out += fmt::format("every = {}\n", c.output.every);
  return out;
}

std::vector<LocalState> sample_profiles(const RunConfig& cfg, const Grid& g) {
  std::vector<LocalState> cells(g.cells);
  for (int k = 0; k < g.cells; ++k) {
    const double x = g.center(k);
    cells[k].rho.resize(cfg.mixture.n);
    for (int i = 0; i < cfg.mixture.n; ++i) cells[k].rho(i) = cfg.initial.rho[i](x);
    cells[k].theta = cfg.initial.theta(x);
  }
  return cells;
}

std::vector<LocalState> sample_initial(const RunConfig& cfg) {
  std::vector<LocalState> cells = sample_profiles(cfg, cfg.grid);
  if (cfg.initial.perturbation > 0.0) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> noise(-1.0, 1.0);
    const double a = cfg.initial.perturbation;
    for (LocalState& s : cells) {
      for (int i = 0; i < cfg.mixture.n; ++i) s.rho(i) *= 1.0 + a * noise(rng);
      s.theta *= 1.0 + a * noise(rng);
    }
  }
  for (LocalState& s : cells) s = apply_density_floor(s);
  return cells;
}

}  // namespace msnt
