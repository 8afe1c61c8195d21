#pragma once

// Implicit-Euler finite-volume scheme in relative entropy variables.
//
// Unknowns per cell are (w_1, ..., w_{n-1}, log theta); densities and
// temperature are recovered cellwise at the frozen total density, so
// positivity never has to be enforced. Interior face fluxes use the Onsager
// coefficients at the face-averaged state applied to differences of the
// entropy variables (w_j, -1/theta):
//
//   Y_j   = (w_j^R - w_j^L) + theta_f (1/theta^L - 1/theta^R) / m_j,  w_n = 0
//   J_i   = -sum_j A_ij(rho_f) Y_j / dx
//   J_e   = -kappa(theta_f) (theta^R - theta^L) / dx + theta_f sum_i J_i / m_i
//
// Pairing these fluxes with the differences of (w_j, -1/theta) gives
// Y^T A Y + kappa (d theta)^2 / (theta^L theta^R) >= 0, which is the discrete
// entropy dissipation of one face.

#include <Eigen/Sparse>
#include <span>
#include <vector>

#include "msnt/constitutive.hpp"
#include "msnt/grid1d.hpp"

namespace msnt {

enum class FaceAverage { Arithmetic, Harmonic };

struct StepConfig {
  double tau = 1e-3;
  double newton_tol = 1e-10;
  int newton_max = 30;
  double damping = 0.5;
  int max_halvings = 8;
  FaceAverage averaging = FaceAverage::Arithmetic;

  void validate() const;
};

/// Cell-major storage of the entropy-variable unknowns: entry (k, j) with
/// j < n-1 the relative variable w_{j+1} and j = n-1 the log temperature.
class EntropyFields {
 public:
  EntropyFields() = default;
  EntropyFields(int cells, int vars) : cells_(cells), vars_(vars), data_(static_cast<size_t>(cells) * vars, 0.0) {}

  int cells() const { return cells_; }
  int vars() const { return vars_; }
  int size() const { return cells_ * vars_; }

  double& operator()(int k, int j) { return data_[static_cast<size_t>(k) * vars_ + j]; }
  double operator()(int k, int j) const { return data_[static_cast<size_t>(k) * vars_ + j]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  LocalEntropyVars cell(int k) const;
  void set_cell(int k, const LocalEntropyVars& v);

  bool operator==(const EntropyFields&) const = default;

 private:
  int cells_ = 0;
  int vars_ = 0;
  std::vector<double> data_;
};

struct TrajectoryState {
  EntropyFields vars;
  CellField rho_total;  // frozen for all time
  double time = 0.0;
};

/// Applies the density floor and converts cell states to entropy variables.
TrajectoryState make_trajectory(const MixtureParams& p, std::span<const LocalState> cells,
                                double time = 0.0);

struct FaceData {
  std::vector<Vector> J;   // mass fluxes, n per face
  FaceField Je;            // energy flux
  std::vector<Vector> u;   // diffusion velocities J_i / rho_i at the face (zero on boundary faces)
  std::vector<Vector> rho; // face-averaged densities
  FaceField theta;         // face-averaged temperature
  FaceField friction;      // (1/2) sum b_ij rho_i rho_j |u_i - u_j|^2
  FaceField fourier;       // kappa |grad log theta|^2
  FaceField constraint;    // |P_Lperp g|, the discrete pressure-gradient defect
};

struct StepStats {
  int newton_iterations = 0;
  int substeps = 0;
  int halvings = 0;        // deepest halving level used
  double residual = 0.0;   // final max-norm residual of the last substep
  double dissipation = 0.0;  // sum over substeps of tau_s * D(state_s)
};

struct StepResult {
  TrajectoryState state;
  StepStats stats;
};

class Scheme {
 public:
  Scheme(MixtureParams p, Grid g, StepConfig cfg);

  const MixtureParams& params() const { return p_; }
  const Grid& grid() const { return g_; }
  const StepConfig& config() const { return cfg_; }

  /// Number of cells on each side a residual row depends on.
  int stencil_radius() const { return p_.epsilon > 0.0 ? 2 : 1; }

  std::vector<LocalState> recover(const EntropyFields& vars, const CellField& rho_total) const;
  std::vector<LocalState> states(const TrajectoryState& s) const { return recover(s.vars, s.rho_total); }

  FaceData face_fluxes(std::span<const LocalState> cells, const EntropyFields& vars) const;

  /// Total dissipation sum_f (friction_f + fourier_f) dx over interior faces.
  double dissipation(const FaceData& faces) const;

  /// Implicit-Euler residual with the configured tau. Layout matches EntropyFields.
  Vector residual(const TrajectoryState& prev, const EntropyFields& trial) const;
  Vector residual(std::span<const LocalState> prev_cells, const CellField& rho_total,
                  const EntropyFields& trial, double tau) const;

  /// Forward-difference Jacobian assembled by cell coloring; banded by construction.
  Eigen::SparseMatrix<double> jacobian(const TrajectoryState& prev, const EntropyFields& trial) const;
  Eigen::SparseMatrix<double> jacobian(std::span<const LocalState> prev_cells, const CellField& rho_total,
                                       const EntropyFields& trial, double tau, const Vector& base) const;

  /// Advances by exactly cfg.tau, halving on Newton failure. Throws StepFailed.
  StepResult step(const TrajectoryState& prev) const;

 private:
  struct Solve {
    bool ok = false;
    EntropyFields vars;
    int iterations = 0;
    double residual = 0.0;
  };

  Solve newton(const TrajectoryState& prev, double tau) const;
  void advance(const TrajectoryState& prev, double tau, int depth, StepResult& out) const;
  void add_regularization(const EntropyFields& trial, std::span<const LocalState> cells, Vector& r) const;

  MixtureParams p_;
  Grid g_;
  StepConfig cfg_;
};

}  // namespace msnt
