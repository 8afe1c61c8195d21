#include "msnt/diagnostics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "msnt/errors.hpp"
#include "msnt/msalgebra.hpp"

namespace msnt {

double total_entropy(const MixtureParams& p, const Grid& g, std::span<const LocalState> cells) {
  double sum = 0.0;
  for (const LocalState& s : cells) sum += entropy_density(p, s);
  return sum * g.dx();
}

double total_energy(const MixtureParams& p, const Grid& g, std::span<const LocalState> cells) {
  double sum = 0.0;
  for (const LocalState& s : cells) sum += internal_energy(p, s);
  return sum * g.dx();
}

std::vector<double> species_masses(const MixtureParams& p, const Grid& g, std::span<const LocalState> cells) {
  std::vector<double> mass(p.n, 0.0);
  for (const LocalState& s : cells)
    for (int i = 0; i < p.n; ++i) mass[i] += s.rho(i);
  for (double& m : mass) m *= g.dx();
  return mass;
}

double relative_entropy(const MixtureParams& p, const Grid& g, std::span<const LocalState> cells,
                        std::span<const LocalState> reference) {
  if (cells.size() != reference.size()) throw std::invalid_argument("relative_entropy: grids differ");
  double sum = 0.0;
  for (size_t k = 0; k < cells.size(); ++k) {
    const LocalState& s = cells[k];
    const LocalState& r = reference[k];
    double local = 0.0;
    for (int i = 0; i < p.n; ++i)
      local += (s.rho(i) * std::log(s.rho(i) / r.rho(i)) - (s.rho(i) - r.rho(i))) / p.m(i);
    const double ratio = s.theta / r.theta;
    local += p.c_w * s.total() * (ratio - 1.0 - std::log(ratio));
    sum += local;
  }
  return sum * g.dx();
}

DiagnosticsRecord make_record(const Scheme& scheme, const TrajectoryState& state) {
  const MixtureParams& p = scheme.params();
  const Grid& g = scheme.grid();
  const std::vector<LocalState> cells = scheme.states(state);
  const FaceData fd = scheme.face_fluxes(cells, state.vars);

  DiagnosticsRecord rec;
  rec.time = state.time;
  rec.entropy = total_entropy(p, g, cells);
  rec.energy = total_energy(p, g, cells);
  rec.masses = species_masses(p, g, cells);
  for (int f = 1; f < g.cells; ++f) {
    rec.fourier_dissipation += fd.fourier[f] * g.dx();
    rec.friction_dissipation += fd.friction[f] * g.dx();
    rec.pressure_defect = std::max(rec.pressure_defect, fd.constraint[f]);
    const double dp = (total_pressure(p, cells[f]) - total_pressure(p, cells[f - 1])) / g.dx();
    rec.max_grad_p = std::max(rec.max_grad_p, std::abs(dp));
  }
  for (int k = 0; k < g.cells; ++k) {
    rec.rho_theta2 += cells[k].total() * cells[k].theta * cells[k].theta * g.dx();
    rec.max_total_density_defect =
        std::max(rec.max_total_density_defect, std::abs(cells[k].total() - state.rho_total[k]));
  }
  rec.sup_rho_theta2 = rec.rho_theta2;
  return rec;
}

EntropyCheck entropy_inequality_check(const DiagnosticsRecord& prev, const DiagnosticsRecord& next, double tau,
                                      double slack) {
  EntropyCheck check;
  check.lhs = next.entropy + tau * (next.fourier_dissipation + next.friction_dissipation);
  check.rhs = prev.entropy + slack;
  check.margin = check.rhs - check.lhs;
  check.pass = check.margin >= 0.0;
  return check;
}

std::vector<LocalState> restrict_states(const MixtureParams& p, const Grid& fine, std::span<const LocalState> cells,
                                        const Grid& coarse) {
  if (fine.cells % coarse.cells != 0) throw std::invalid_argument("restrict_states: grids are not nested");
  const int ratio = fine.cells / coarse.cells;
  if (ratio == 1) return {cells.begin(), cells.end()};
  std::vector<LocalState> out(coarse.cells);
  for (int k = 0; k < coarse.cells; ++k) {
    Vector rho = Vector::Zero(p.n);
    double energy = 0.0;
    for (int c = 0; c < ratio; ++c) {
      const LocalState& s = cells[k * ratio + c];
      rho += s.rho;
      energy += internal_energy(p, s);
    }
    rho /= ratio;
    energy /= ratio;
    out[k].rho = rho;
    out[k].theta = energy / (p.c_w * rho.sum());
  }
  return out;
}

std::vector<LocalState> equilibrium_states(const MixtureParams& p, const Grid& g, const CellField& rho_total,
                                           std::span<const double> masses, double energy) {
  const int n = p.n;
  const int N = g.cells;
  double total_mass = 0.0;
  for (double r : rho_total) total_mass += r * g.dx();
  const double theta = energy / (p.c_w * total_mass);

  // Start from the mean composition and run Newton on the n-1 species masses;
  // d rho'/d w' is the inverse of the leading block of the entropy Hessian.
  LocalState mean;
  mean.theta = theta;
  mean.rho.resize(n);
  for (int i = 0; i < n; ++i) mean.rho(i) = masses[i] / total_mass;
  LocalEntropyVars v = entropy_vars_from_state(p, mean);

  std::vector<LocalState> cells(N);
  for (int it = 0; it < 100; ++it) {
    Vector defect = Vector::Zero(n - 1);
    Matrix jac = Matrix::Zero(n - 1, n - 1);
    for (int k = 0; k < N; ++k) {
      cells[k] = state_from_entropy_vars(p, v, rho_total[k]);
      defect += cells[k].rho.head(n - 1) * g.dx();
      jac += entropy_hessian(p, cells[k]).topLeftCorner(n - 1, n - 1).inverse() * g.dx();
    }
    for (int i = 0; i < n - 1; ++i) defect(i) -= masses[i];
    const Vector delta = jac.partialPivLu().solve(-defect);
    v.w += delta;
    if (delta.cwiseAbs().maxCoeff() <= 1e-15 * (1.0 + v.w.cwiseAbs().maxCoeff())) break;
  }
  for (int k = 0; k < N; ++k) cells[k] = state_from_entropy_vars(p, v, rho_total[k]);
  return cells;
}

namespace {

double least_squares_slope(std::span<const double> t, std::span<const double> y) {
  const size_t n = t.size();
  if (n < 2) return 0.0;
  double mt = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mt += t[i];
    my += y[i];
  }
  mt /= n;
  my /= n;
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < n; ++i) {
    num += (t[i] - mt) * (y[i] - my);
    den += (t[i] - mt) * (t[i] - mt);
  }
  return den > 0.0 ? num / den : 0.0;
}

double log_slope(std::span<const double> times, std::span<const double> values, double t_max) {
  std::vector<double> t, y;
  for (size_t i = 0; i < times.size(); ++i)
    if (values[i] > 0.0 && times[i] <= t_max) {
      t.push_back(times[i]);
      y.push_back(std::log(values[i]));
    }
  return least_squares_slope(t, y);
}

}  // namespace

GronwallMonitor gronwall_monitor(std::span<const double> times, std::span<const double> values) {
  GronwallMonitor m;
  if (times.empty()) return m;
  const double t0 = times.front();
  const double horizon = times.back() - t0;
  m.initial = values.front();
  m.final = values.back();
  m.fitted_rate = log_slope(times, values, t0 + 0.1 * horizon);
  m.growth = m.initial > 0.0 ? m.final / m.initial : std::numeric_limits<double>::infinity();
  m.bound = std::exp(std::max(m.fitted_rate, 0.0) * horizon);
  m.consistent = m.initial > 0.0 && m.growth <= m.bound * (1.0 + 1e-12);
  return m;
}

WeakStrongReport weak_strong_experiment(const MixtureParams& p, const Grid& g_coarse, const Grid& g_fine,
                                        const StepConfig& cfg, std::span<const LocalState> fine_initial,
                                        const WeakStrongOptions& options) {
  if (p.lambda != 0.0) throw ValidationError("", "the weak-strong experiment requires lambda = 0");
  if (g_fine.cells % g_coarse.cells != 0) throw std::invalid_argument("fine grid must refine the coarse grid");
  const int ratio = g_fine.cells / g_coarse.cells;

  StepConfig fine_cfg = cfg;
  fine_cfg.tau = cfg.tau / ratio;
  const Scheme coarse(p, g_coarse, cfg);
  const Scheme fine(p, g_fine, fine_cfg);

  const std::vector<LocalState> coarse_initial =
      options.coarse_initial ? *options.coarse_initial : restrict_states(p, g_fine, fine_initial, g_coarse);
  TrajectoryState weak = make_trajectory(p, coarse_initial);
  TrajectoryState strong = make_trajectory(p, fine_initial);

  WeakStrongReport rep;
  rep.coarse_cells = g_coarse.cells;
  rep.fine_cells = g_fine.cells;
  rep.coarse_tau = cfg.tau;
  rep.fine_tau = fine_cfg.tau;

  auto observe = [&]() {
    const std::vector<LocalState> proxy = fine.states(strong);
    const std::vector<LocalState> restricted = restrict_states(p, g_fine, proxy, g_coarse);
    rep.times.push_back(weak.time);
    rep.relative_entropy.push_back(relative_entropy(p, g_coarse, coarse.states(weak), restricted));
    const FaceData fd = fine.face_fluxes(proxy, strong.vars);
    for (int f = 1; f < g_fine.cells; ++f) {
      rep.proxy_sup_velocity = std::max(rep.proxy_sup_velocity, fd.u[f].cwiseAbs().maxCoeff());
      const double glog = std::abs(std::log(proxy[f].theta) - std::log(proxy[f - 1].theta)) / g_fine.dx();
      rep.proxy_sup_grad_log_theta = std::max(rep.proxy_sup_grad_log_theta, glog);
    }
  };

  observe();
  const int steps = static_cast<int>(std::llround(options.t_end / cfg.tau));
  for (int s = 0; s < steps; ++s) {
    weak = coarse.step(weak).state;
    for (int r = 0; r < ratio; ++r) strong = fine.step(strong).state;
    strong.time = weak.time;
    observe();
  }
  rep.final_relative_entropy = rep.relative_entropy.back();
  rep.fitted_rate = log_slope(rep.times, rep.relative_entropy, std::numeric_limits<double>::infinity());
  rep.gronwall = gronwall_monitor(rep.times, rep.relative_entropy);
  return rep;
}

RefinementStudy refinement_study(const MixtureParams& p, const Grid& g_coarsest, const StepConfig& cfg,
                                 std::span<const LocalState> finest_initial, double t_end, int levels) {
  const int finest_cells = g_coarsest.cells << levels;
  const Grid finest(finest_cells, g_coarsest.length);
  if (static_cast<int>(finest_initial.size()) != finest_cells)
    throw std::invalid_argument("refinement_study: initial data must live on the finest grid");

  RefinementStudy study;
  for (int level = 0; level < levels; ++level) {
    const Grid coarse(g_coarsest.cells << level, g_coarsest.length);
    const Grid fine(coarse.cells * 2, g_coarsest.length);
    StepConfig level_cfg = cfg;
    level_cfg.tau = cfg.tau / (1 << level);
    const std::vector<LocalState> fine_initial = restrict_states(p, finest, finest_initial, fine);
    WeakStrongOptions opts;
    opts.t_end = t_end;
    const WeakStrongReport rep = weak_strong_experiment(p, coarse, fine, level_cfg, fine_initial, opts);
    study.cells.push_back(coarse.cells);
    study.taus.push_back(level_cfg.tau);
    study.final_relative_entropy.push_back(rep.final_relative_entropy);
  }
  for (int level = 0; level + 1 < levels; ++level)
    study.ratios.push_back(study.final_relative_entropy[level] / study.final_relative_entropy[level + 1]);
  return study;
}

}  // namespace msnt
