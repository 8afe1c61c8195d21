#pragma once

// Flat INI-like run configuration:
//
//   scenario = two-species-mixing     # optional, must precede any section
//   [mixture]  species, molar_masses, friction, heat_capacity, kappa0, kappa2,
//              lambda, theta0, epsilon
//   [grid]     cells, length
//   [stepper]  tau, steps, newton_tol, newton_max, damping, max_halvings,
//              face_average
//   [initial]  rho_<i>, theta, perturbation
//   [output]   directory, diagnostics, snapshot, every
//
// A scenario loads a preset; the remaining keys override it. Unknown keys are
// errors. Profiles are `constant v`, `step left right x0 [width]` and
// `gaussian base amplitude center width`.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "msnt/constitutive.hpp"
#include "msnt/grid1d.hpp"
#include "msnt/stepper.hpp"

namespace msnt {

struct Profile {
  enum class Kind { Constant, Step, Gaussian };
  Kind kind = Kind::Constant;
  std::vector<double> args{1.0};

  double operator()(double x) const;
  std::string to_string() const;
  static Profile parse(std::string_view text);  // throws std::invalid_argument
  static Profile constant(double v) { return {Kind::Constant, {v}}; }
};

struct InitialData {
  std::vector<Profile> rho;  // one per species
  Profile theta;
  double perturbation = 0.0;  // relative amplitude of seeded cellwise noise
};

struct OutputSpec {
  std::string directory = "msnt-out";
  std::string diagnostics = "diagnostics.csv";
  std::string snapshot = "snapshot.csv";
  int every = 1;
};

struct RunConfig {
  std::string scenario = "custom";
  MixtureParams mixture;
  Grid grid{50, 1.0};
  StepConfig stepper;
  int steps = 100;
  InitialData initial;
  OutputSpec output;
  std::uint64_t seed = 0;

  /// Applies every physical and structural validation. Throws ValidationError.
  void validate() const;
};

/// Default configuration (n = 2, unit constants, closed box).
RunConfig default_config();

/// Names of the built-in scenario presets.
std::vector<std::string> scenario_names();

/// Preset by name. Throws ValidationError for unknown names.
RunConfig scenario_config(const std::string& name);

/// Parses and validates a configuration document. Throws ParseError (with a
/// line number) or ValidationError (naming the violated assumption).
RunConfig parse_config(std::string_view text);

/// Renders a configuration back to text; parse_config(render_config(c)) == c.
std::string render_config(const RunConfig& cfg);

/// Samples the initial profiles at cell centers, applies the seeded perturbation
/// and the density floor.
std::vector<LocalState> sample_initial(const RunConfig& cfg);

/// Samples the initial profiles on an arbitrary grid (no perturbation, no floor).
std::vector<LocalState> sample_profiles(const RunConfig& cfg, const Grid& g);

}  // namespace msnt
