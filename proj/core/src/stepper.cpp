#include "msnt/stepper.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <limits>
#include <string>

#include "msnt/errors.hpp"
#include "msnt/msalgebra.hpp"

namespace msnt {

void StepConfig::validate() const {
  if (!(tau > 0.0)) throw ValidationError("", "time step tau must be positive");
  if (!(newton_tol >= 1e-13)) throw ValidationError("", "newton_tol must be at least 1e-13");
  if (newton_max < 1) throw ValidationError("", "newton_max must be positive");
  if (!(damping > 0.0 && damping < 1.0)) throw ValidationError("", "damping must lie in (0, 1)");
  if (max_halvings < 0) throw ValidationError("", "max_halvings must be non-negative");
}

LocalEntropyVars EntropyFields::cell(int k) const {
  LocalEntropyVars v;
  v.w.resize(vars_ - 1);
  for (int j = 0; j < vars_ - 1; ++j) v.w(j) = (*this)(k, j);
  v.wlog = (*this)(k, vars_ - 1);
  return v;
}

void EntropyFields::set_cell(int k, const LocalEntropyVars& v) {
  for (int j = 0; j < vars_ - 1; ++j) (*this)(k, j) = v.w(j);
  (*this)(k, vars_ - 1) = v.wlog;
}

TrajectoryState make_trajectory(const MixtureParams& p, std::span<const LocalState> cells, double time) {
  TrajectoryState s;
  const int N = static_cast<int>(cells.size());
  s.vars = EntropyFields(N, p.n);
  s.rho_total.resize(N);
  s.time = time;
  for (int k = 0; k < N; ++k) {
    const LocalState floored = apply_density_floor(cells[k]);
    s.rho_total[k] = floored.total();
    s.vars.set_cell(k, entropy_vars_from_state(p, floored));
  }
  return s;
}

Scheme::Scheme(MixtureParams p, Grid g, StepConfig cfg) : p_(std::move(p)), g_(g), cfg_(cfg) {
  p_.validate();
  cfg_.validate();
}

std::vector<LocalState> Scheme::recover(const EntropyFields& vars, const CellField& rho_total) const {
  std::vector<LocalState> out;
  out.reserve(vars.cells());
  for (int k = 0; k < vars.cells(); ++k) out.push_back(state_from_entropy_vars(p_, vars.cell(k), rho_total[k]));
  return out;
}

namespace {

double face_mean(double a, double b, FaceAverage avg) {
  if (avg == FaceAverage::Harmonic) return 2.0 * a * b / (a + b);
  return 0.5 * (a + b);
}

double max_abs(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

FaceData Scheme::face_fluxes(std::span<const LocalState> cells, const EntropyFields& vars) const {
  const int n = p_.n;
  const int N = g_.cells;
  const int F = g_.faces();
  const double dx = g_.dx();

  FaceData fd;
  fd.J.assign(F, Vector::Zero(n));
  fd.u.assign(F, Vector::Zero(n));
  fd.rho.assign(F, Vector::Zero(n));
  fd.Je.assign(F, 0.0);
  fd.theta.assign(F, 0.0);
  fd.friction.assign(F, 0.0);
  fd.fourier.assign(F, 0.0);
  fd.constraint.assign(F, 0.0);

  for (int f = 1; f < N; ++f) {
    const LocalState& L = cells[f - 1];
    const LocalState& R = cells[f];
    Vector rho_f(n);
    for (int i = 0; i < n; ++i) rho_f(i) = face_mean(L.rho(i), R.rho(i), cfg_.averaging);
    const double theta_f = face_mean(L.theta, R.theta, cfg_.averaging);

    // Differences of (w_1..w_{n-1}, 0) stand in for the gradients of q_j:
    // the common shift q_n drops out because the rows of A sum to zero.
    Vector grad_q = Vector::Zero(n);
    for (int j = 0; j < n - 1; ++j) grad_q(j) = (vars(f, j) - vars(f - 1, j)) / dx;
    const double dzeta = 1.0 / L.theta - 1.0 / R.theta;
    const double grad_w = theta_f * dzeta / dx;

    const Onsager ons = onsager(p_, rho_f, theta_f);
    const Vector J = flux_mass(p_, ons, theta_f, grad_q, grad_w);
    const Vector u = J.cwiseQuotient(rho_f);
    const double grad_theta = (R.theta - L.theta) / dx;

    fd.J[f] = J;
    fd.u[f] = u;
    fd.rho[f] = rho_f;
    fd.theta[f] = theta_f;
    fd.Je[f] = flux_energy(p_, rho_f, theta_f, grad_theta, u);
    fd.friction[f] = friction_dissipation(p_, rho_f, u);
    const double glog = (std::log(R.theta) - std::log(L.theta)) / dx;
    fd.fourier[f] = p_.kappa(theta_f) * glog * glog;

    // |P_Lperp g| with g_j = d_j / (theta sqrt(rho_j)) reduces to |sum_j d_j| / (theta sqrt(rho)).
    double sum_d = 0.0;
    for (int j = 0; j < n; ++j) sum_d += (R.rho(j) * R.theta - L.rho(j) * L.theta) / (dx * p_.m(j));
    fd.constraint[f] = std::abs(sum_d) / (theta_f * std::sqrt(rho_f.sum()));
  }

  if (p_.lambda > 0.0) {
    const BoundaryEnergyFlux bc = apply_boundary(p_, cells.front().theta, cells.back().theta);
    fd.Je[0] = bc.left;
    fd.Je[N] = bc.right;
  }
  fd.theta[0] = cells.front().theta;
  fd.theta[N] = cells.back().theta;
  return fd;
}

double Scheme::dissipation(const FaceData& faces) const {
  double d = 0.0;
  for (int f = 1; f < g_.cells; ++f) d += (faces.friction[f] + faces.fourier[f]) * g_.dx();
  return d;
}

Vector Scheme::residual(const TrajectoryState& prev, const EntropyFields& trial) const {
  return residual(states(prev), prev.rho_total, trial, cfg_.tau);
}

Vector Scheme::residual(std::span<const LocalState> prev_cells, const CellField& rho_total,
                        const EntropyFields& trial, double tau) const {
  const int n = p_.n;
  const int N = g_.cells;
  const std::vector<LocalState> cells = recover(trial, rho_total);
  const FaceData fd = face_fluxes(cells, trial);
  const double inv_dx = 1.0 / g_.dx();

  Vector r(static_cast<Eigen::Index>(N) * n);
  for (int k = 0; k < N; ++k) {
    for (int i = 0; i < n - 1; ++i)
      r(k * n + i) = (cells[k].rho(i) - prev_cells[k].rho(i)) / tau + (fd.J[k + 1](i) - fd.J[k](i)) * inv_dx;
    r(k * n + n - 1) = (internal_energy(p_, cells[k]) - internal_energy(p_, prev_cells[k])) / tau +
                       (fd.Je[k + 1] - fd.Je[k]) * inv_dx;
  }
  if (p_.epsilon > 0.0) add_regularization(trial, cells, r);
  return r;
}

// Lower- and fourth-order regularization: for the relative variables
// eps (w_i'''' + w_i), for the log temperature
// eps [(theta0 + theta)(w - w0) + (theta w'')'' - (theta (w')^3)'],
// with w'' the Neumann second difference.
void Scheme::add_regularization(const EntropyFields& trial, std::span<const LocalState> cells, Vector& r) const {
  const int n = p_.n;
  const int N = g_.cells;
  const double eps = p_.epsilon;
  const double w0 = std::log(p_.theta0);
  auto second_difference = [&](const CellField& f) { return divergence(g_, face_gradient(g_, f)); };

  CellField col(N);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < N; ++k) col[k] = trial(k, j);
    const CellField lap = second_difference(col);
    if (j < n - 1) {
      const CellField bilap = second_difference(lap);
      for (int k = 0; k < N; ++k) r(k * n + j) += eps * (bilap[k] + col[k]);
    } else {
      CellField weighted(N);
      for (int k = 0; k < N; ++k) weighted[k] = cells[k].theta * lap[k];
      const CellField bilap = second_difference(weighted);
      const FaceField grad = face_gradient(g_, col);
      FaceField cubic(g_.faces(), 0.0);
      for (int f = 1; f < N; ++f)
        cubic[f] = 0.5 * (cells[f - 1].theta + cells[f].theta) * grad[f] * grad[f] * grad[f];
      const CellField div = divergence(g_, cubic);
      for (int k = 0; k < N; ++k)
        r(k * n + j) += eps * ((p_.theta0 + cells[k].theta) * (col[k] - w0) + bilap[k] - div[k]);
    }
  }
}

Eigen::SparseMatrix<double> Scheme::jacobian(const TrajectoryState& prev, const EntropyFields& trial) const {
  const std::vector<LocalState> prev_cells = states(prev);
  const Vector base = residual(prev_cells, prev.rho_total, trial, cfg_.tau);
  return jacobian(prev_cells, prev.rho_total, trial, cfg_.tau, base);
}

Eigen::SparseMatrix<double> Scheme::jacobian(std::span<const LocalState> prev_cells, const CellField& rho_total,
                                             const EntropyFields& trial, double tau, const Vector& base) const {
  const int n = p_.n;
  const int N = g_.cells;
  const int radius = stencil_radius();
  const int stride = 2 * radius + 1;

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<size_t>(N) * n * n * stride);

  for (int color = 0; color < std::min(stride, N); ++color) {
    for (int j = 0; j < n; ++j) {
      EntropyFields shifted = trial;
      std::vector<double> steps(N, 0.0);
      for (int k = color; k < N; k += stride) {
        steps[k] = 1e-7 * (1.0 + std::abs(trial(k, j)));
        shifted(k, j) += steps[k];
        steps[k] = shifted(k, j) - trial(k, j);
      }
      const Vector perturbed = residual(prev_cells, rho_total, shifted, tau);
      for (int k = color; k < N; k += stride) {
        const int col = k * n + j;
        for (int row_cell = std::max(0, k - radius); row_cell <= std::min(N - 1, k + radius); ++row_cell)
          for (int i = 0; i < n; ++i) {
            const int row = row_cell * n + i;
            const double value = (perturbed(row) - base(row)) / steps[k];
            triplets.emplace_back(row, col, value);
          }
      }
    }
  }
  Eigen::SparseMatrix<double> jac(N * n, N * n);
  jac.setFromTriplets(triplets.begin(), triplets.end());
  return jac;
}

Scheme::Solve Scheme::newton(const TrajectoryState& prev, double tau) const {
  Solve out;
  const std::vector<LocalState> prev_cells = states(prev);
  EntropyFields w = prev.vars;
  Vector r = residual(prev_cells, prev.rho_total, w, tau);
  double norm = max_abs(r);

  auto try_residual = [&](const EntropyFields& trial, Vector& into) {
    try {
      into = residual(prev_cells, prev.rho_total, trial, tau);
      const double v = max_abs(into);
      return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  for (int it = 0; it < cfg_.newton_max && norm > cfg_.newton_tol; ++it) {
    out.iterations = it + 1;
    const Eigen::SparseMatrix<double> jac = jacobian(prev_cells, prev.rho_total, w, tau, r);
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(jac);
    if (lu.info() != Eigen::Success) break;
    const Vector delta = lu.solve(-r);
    if (lu.info() != Eigen::Success || !delta.allFinite()) break;

    double alpha = 1.0;
    bool accepted = false;
    Vector r_trial;
    while (alpha >= 1e-4) {
      EntropyFields trial = w;
      auto vals = trial.values();
      for (int idx = 0; idx < trial.size(); ++idx) vals[idx] += alpha * delta(idx);
      const double trial_norm = try_residual(trial, r_trial);
      if (trial_norm < norm) {
        w = std::move(trial);
        r = std::move(r_trial);
        norm = trial_norm;
        accepted = true;
        break;
      }
      alpha *= cfg_.damping;
    }
    if (!accepted) break;
  }
  out.ok = norm <= cfg_.newton_tol;
  out.vars = std::move(w);
  out.residual = norm;
  return out;
}

void Scheme::advance(const TrajectoryState& prev, double tau, int depth, StepResult& out) const {
  Solve s = newton(prev, tau);
  if (s.ok) {
    out.state.vars = std::move(s.vars);
    out.state.rho_total = prev.rho_total;
    out.state.time = prev.time + tau;
    out.stats.newton_iterations += s.iterations;
    out.stats.substeps += 1;
    out.stats.residual = s.residual;
    out.stats.halvings = std::max(out.stats.halvings, depth);
    const std::vector<LocalState> cells = states(out.state);
    out.stats.dissipation += tau * dissipation(face_fluxes(cells, out.state.vars));
    return;
  }
  if (depth >= cfg_.max_halvings)
    throw StepFailed("Newton failed at t=" + std::to_string(prev.time) + " after " + std::to_string(depth) +
                         " time-step halvings (residual " + std::to_string(s.residual) + ")",
                     s.residual);
  advance(prev, 0.5 * tau, depth + 1, out);
  const TrajectoryState mid = out.state;
  advance(mid, 0.5 * tau, depth + 1, out);
}

StepResult Scheme::step(const TrajectoryState& prev) const {
  StepResult out;
  advance(prev, cfg_.tau, 0, out);
  // Accumulated sub-step times may differ from prev.time + tau by rounding.
  out.state.time = prev.time + cfg_.tau;
  return out;
}

}  // namespace msnt
