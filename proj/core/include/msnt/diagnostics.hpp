#pragma once

// Entropy, relative entropy, dissipation and constraint audits of a
// trajectory, plus the refinement experiment that uses a finer run as a
// stand-in for the strong solution.

#include <optional>
#include <span>
#include <vector>

#include "msnt/stepper.hpp"

namespace msnt {

struct DiagnosticsRecord {
  double time = 0.0;
  double entropy = 0.0;               // H = int h dx
  double energy = 0.0;                // int c_w rho theta dx
  std::vector<double> masses;         // int rho_i dx
  double fourier_dissipation = 0.0;   // int kappa |grad log theta|^2
  double friction_dissipation = 0.0;  // (1/2) int sum b_ij rho_i rho_j |u_i - u_j|^2
  double max_grad_p = 0.0;            // max over interior faces of |grad p|
  double pressure_defect = 0.0;       // max over faces of |P_Lperp g|
  double rho_theta2 = 0.0;            // int rho theta^2
  double sup_rho_theta2 = 0.0;        // running sup of int rho theta^2
  double entropy_margin = 0.0;        // H^{k-1} - H^k - tau D^k (0 on the first row)
  double max_total_density_defect = 0.0;  // max |sum rho_i - rho_frozen|
  std::optional<double> relative_entropy;
};

double total_entropy(const MixtureParams& p, const Grid& g, std::span<const LocalState> cells);
double total_energy(const MixtureParams& p, const Grid& g, std::span<const LocalState> cells);
std::vector<double> species_masses(const MixtureParams& p, const Grid& g, std::span<const LocalState> cells);

/// Bregman divergence of the entropy in (rho_1..rho_{n-1}, E):
///   int sum_i (1/m_i)(rho_i log(rho_i/rbar_i) - (rho_i - rbar_i))
///     + c_w rho (-log(theta/tbar) + (theta - tbar)/tbar) dx.
/// Both states are expected to share the same total density field.
double relative_entropy(const MixtureParams& p, const Grid& g, std::span<const LocalState> cells,
                        std::span<const LocalState> reference);

/// Evaluates every audit quantity of one state. entropy_margin and
/// sup_rho_theta2 are left for the caller, which knows the history.
DiagnosticsRecord make_record(const Scheme& scheme, const TrajectoryState& state);

struct EntropyCheck {
  bool pass = false;
  double margin = 0.0;  // rhs - lhs
  double lhs = 0.0;     // H^k + tau D^k
  double rhs = 0.0;     // H^{k-1} + slack
};

/// Discrete entropy inequality H^k + tau D^k <= H^{k-1} + slack (lambda = 0).
EntropyCheck entropy_inequality_check(const DiagnosticsRecord& prev, const DiagnosticsRecord& next, double tau,
                                      double slack);

/// Conservative restriction by cell averaging: rho_i and E = c_w rho theta are averaged.
std::vector<LocalState> restrict_states(const MixtureParams& p, const Grid& fine, std::span<const LocalState> cells,
                                        const Grid& coarse);

/// Steady state of the closed box: constant entropy variables that carry the
/// given species masses and total energy on the frozen total density field.
std::vector<LocalState> equilibrium_states(const MixtureParams& p, const Grid& g, const CellField& rho_total,
                                           std::span<const double> masses, double energy);

struct WeakStrongOptions {
  double t_end = 0.1;
  /// Initial data for the coarse run; defaults to the restriction of the fine initial data.
  std::optional<std::vector<LocalState>> coarse_initial;
};

struct GronwallMonitor {
  double initial = 0.0;
  double final = 0.0;
  double fitted_rate = 0.0;  // fitted over the first 10% of the run
  double growth = 0.0;       // final / initial
  double bound = 0.0;        // exp(max(fitted_rate, 0) T)
  bool consistent = false;
};

/// Result of comparing a coarse run against a refined proxy of the strong
/// solution. The proxy is an experimental stand-in, not a certified solution.
struct WeakStrongReport {
  int coarse_cells = 0;
  int fine_cells = 0;
  double coarse_tau = 0.0;
  double fine_tau = 0.0;
  std::vector<double> times;
  std::vector<double> relative_entropy;
  double final_relative_entropy = 0.0;
  double fitted_rate = 0.0;  // least-squares slope of log(relative entropy) vs t
  double proxy_sup_velocity = 0.0;       // observed sup |u_i| of the proxy
  double proxy_sup_grad_log_theta = 0.0; // observed sup |grad log theta| of the proxy
  GronwallMonitor gronwall;
};

/// Runs the coarse problem on g_coarse with cfg.tau and the proxy on g_fine with
/// tau * N_coarse / N_fine, both to t_end; N_fine must be a multiple of N_coarse.
/// `fine_initial` is sampled on g_fine. Requires lambda = 0. Propagates StepFailed.
WeakStrongReport weak_strong_experiment(const MixtureParams& p, const Grid& g_coarse, const Grid& g_fine,
                                        const StepConfig& cfg, std::span<const LocalState> fine_initial,
                                        const WeakStrongOptions& options);

struct RefinementStudy {
  std::vector<int> cells;                // coarse resolution per level
  std::vector<double> taus;
  std::vector<double> final_relative_entropy;  // vs its own (dx/2, tau/2) refinement
  std::vector<double> ratios;            // level k over level k+1
};

/// Compares each level against its (dx/2, tau/2) refinement, halving the coarse
/// resolution from level to level. `finest_initial` is sampled on
/// g_coarsest.cells * 2^levels cells and restricted to every level.
RefinementStudy refinement_study(const MixtureParams& p, const Grid& g_coarsest, const StepConfig& cfg,
                                 std::span<const LocalState> finest_initial, double t_end, int levels);

GronwallMonitor gronwall_monitor(std::span<const double> times, std::span<const double> values);

}  // namespace msnt
