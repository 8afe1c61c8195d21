#include <gtest/gtest.h>

#include <cmath>

#include "msnt/diagnostics.hpp"
#include "msnt/errors.hpp"
#include "msnt/stepper.hpp"
#include "random_instances.hpp"

using namespace msnt;
using msnt::testing::Sampler;

namespace {

MixtureParams three_species() {
  MixtureParams p = MixtureParams::with_masses((Vector(3) << 1.0, 2.0, 4.0).finished(), 1.0);
  p.b(0, 2) = p.b(2, 0) = 2.0;
  p.b(1, 2) = p.b(2, 1) = 0.5;
  p.c_w = 1.5;
  p.kappa0 = 0.5;
  p.kappa2 = 0.25;
  return p;
}

std::vector<LocalState> uniform_cells(int cells, const Vector& rho, double theta) {
  return std::vector<LocalState>(cells, LocalState{rho, theta});
}

std::vector<LocalState> random_cells(Sampler& rng, int n, int cells) {
  std::vector<LocalState> out;
  for (int k = 0; k < cells; ++k) out.push_back(rng.state(n, 0.2, 2.0, 0.5, 2.0));
  return out;
}

EntropyFields perturbed(const EntropyFields& f, Sampler& rng, double amplitude) {
  EntropyFields g = f;
  for (double& v : g.values()) v += amplitude * rng.normal();
  return g;
}

double max_rel_deviation(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff();
}

}  // namespace

TEST(StepConfig, Validation) {
  StepConfig c;
  EXPECT_NO_THROW(c.validate());
  c.newton_tol = 1e-14;
  EXPECT_THROW(c.validate(), ValidationError);
  c = StepConfig{};
  c.damping = 1.0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = StepConfig{};
  c.tau = 0.0;
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(Residual, UniformStateIsStationary) {
  const MixtureParams p = three_species();
  const Scheme scheme(p, Grid(6, 1.0), StepConfig{});
  const TrajectoryState s = make_trajectory(p, uniform_cells(6, (Vector(3) << 0.2, 0.5, 0.3).finished(), 1.4));
  EXPECT_LE(scheme.residual(s, s.vars).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Residual, LumpedRobinCell) {
  MixtureParams p = MixtureParams::with_masses((Vector(2) << 1.0, 2.0).finished(), 1.0);
  p.lambda = 0.7;
  p.theta0 = 1.2;
  p.c_w = 1.3;
  const double L = 2.0, tau = 0.05;
  StepConfig cfg;
  cfg.tau = tau;
  const Scheme scheme(p, Grid(1, L), cfg);
  const TrajectoryState prev = make_trajectory(p, uniform_cells(1, (Vector(2) << 0.4, 0.6).finished(), 2.0));
  TrajectoryState next = prev;
  const double theta = 1.7;
  next.vars(0, 1) = std::log(theta);
  const Vector r = scheme.residual(prev, next.vars);
  const double rho = 1.0;
  EXPECT_NEAR(r(0), 0.0, 1e-14);
  EXPECT_NEAR(r(1), p.c_w * rho * (theta - 2.0) / tau + (p.lambda * 2.0 / L) * (theta - p.theta0), 1e-12);
}

TEST(Residual, FluxPartOfMassRowsIsConservative) {
  Sampler rng(51);
  for (double lambda : {0.0, 1.0}) {
    MixtureParams p = three_species();
    p.lambda = lambda;
    StepConfig cfg;
    cfg.tau = 0.01;
    const Grid g(9, 1.5);
    const Scheme scheme(p, g, cfg);
    const TrajectoryState prev = make_trajectory(p, random_cells(rng, 3, 9));
    const EntropyFields trial = perturbed(prev.vars, rng, 0.1);
    const Vector r = scheme.residual(prev, trial);
    const std::vector<LocalState> now = scheme.recover(trial, prev.rho_total);
    const std::vector<LocalState> before = scheme.states(prev);
    for (int i = 0; i < 2; ++i) {
      double flux_sum = 0.0, scale = 0.0;
      for (int k = 0; k < 9; ++k) {
        const double accumulation = (now[k].rho(i) - before[k].rho(i)) / cfg.tau;
        flux_sum += (r(k * 3 + i) - accumulation) * g.dx();
        scale += std::abs(r(k * 3 + i)) * g.dx();
      }
      EXPECT_NEAR(flux_sum, 0.0, 1e-13 * (1.0 + scale));
    }
  }
}

TEST(Jacobian, BandedMatchesDenseFiniteDifferences) {
  Sampler rng(52);
  for (double epsilon : {0.0, 0.05}) {
    for (int t = 0; t < 10; ++t) {
      MixtureParams p = three_species();
      p.lambda = t % 2 ? 0.8 : 0.0;
      p.epsilon = epsilon;
      StepConfig cfg;
      cfg.tau = 0.02;
      const Scheme scheme(p, Grid(4, 1.0), cfg);
      const TrajectoryState prev = make_trajectory(p, random_cells(rng, 3, 4));
      const EntropyFields trial = perturbed(prev.vars, rng, 0.05);
      const Matrix banded = Matrix(scheme.jacobian(prev, trial));
      const Matrix dense = msnt::testing::dense_fd_jacobian(scheme, prev, trial);
      EXPECT_LE(max_rel_deviation(banded, dense), 1e-5) << "epsilon " << epsilon << " trial " << t;
    }
  }
}

TEST(Jacobian, BandwidthFollowsStencil) {
  MixtureParams p = three_species();
  Sampler rng(53);
  for (double epsilon : {0.0, 0.1}) {
    p.epsilon = epsilon;
    const Scheme scheme(p, Grid(10, 1.0), StepConfig{});
    const TrajectoryState prev = make_trajectory(p, random_cells(rng, 3, 10));
    const Eigen::SparseMatrix<double> jac = scheme.jacobian(prev, prev.vars);
    const int r = scheme.stencil_radius();
    for (int col = 0; col < jac.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(jac, col); it; ++it)
        EXPECT_LE(std::abs(it.row() / 3 - it.col() / 3), r);
  }
}

TEST(Jacobian, ConstantShiftIsAnnihilatedByTheFluxes) {
  // With an enormous time step only the flux part of the Jacobian survives;
  // a spatially constant shift of one w_i must not drive any flux.
  const MixtureParams p = three_species();
  StepConfig cfg;
  cfg.tau = 1e12;
  const Scheme scheme(p, Grid(8, 1.0), cfg);
  const TrajectoryState s = make_trajectory(p, uniform_cells(8, (Vector(3) << 0.3, 0.3, 0.4).finished(), 1.1));
  const Matrix jac = Matrix(scheme.jacobian(s, s.vars));
  for (int j = 0; j < 3; ++j) {
    Vector shift = Vector::Zero(24);
    for (int k = 0; k < 8; ++k) shift(k * 3 + j) = 1.0;
    EXPECT_LE((jac * shift).cwiseAbs().maxCoeff(), 1e-6 * jac.cwiseAbs().maxCoeff()) << "variable " << j;
  }
}

TEST(Jacobian, MassRowsHaveConservativeColumnSums) {
  // Sum over cells of each mass row's flux part vanishes for every column.
  Sampler rng(54);
  MixtureParams p = three_species();
  p.lambda = 1.0;
  StepConfig cfg;
  cfg.tau = 1e12;
  const Scheme scheme(p, Grid(6, 1.0), cfg);
  const TrajectoryState s = make_trajectory(p, random_cells(rng, 3, 6));
  const Matrix jac = Matrix(scheme.jacobian(s, s.vars));
  for (int i = 0; i < 2; ++i) {
    Vector sum = Vector::Zero(18);
    for (int k = 0; k < 6; ++k) sum += jac.row(k * 3 + i).transpose();
    EXPECT_LE(sum.cwiseAbs().maxCoeff(), 1e-6 * jac.cwiseAbs().maxCoeff());
  }
}

TEST(Jacobian, LumpedEnergyEquation) {
  MixtureParams p = MixtureParams::with_masses((Vector(2) << 1.0, 2.0).finished(), 1.0);
  p.lambda = 1.5;
  p.c_w = 0.8;
  const double L = 0.5, tau = 0.1, theta = 1.9;
  StepConfig cfg;
  cfg.tau = tau;
  const Scheme scheme(p, Grid(1, L), cfg);
  const TrajectoryState s = make_trajectory(p, uniform_cells(1, (Vector(2) << 1.0, 2.0).finished(), theta));
  const Matrix jac = Matrix(scheme.jacobian(s, s.vars));
  const double rho = 3.0;
  const double expected = p.c_w * rho * theta / tau + 2.0 * p.lambda * theta / L;
  EXPECT_NEAR(jac(1, 1), expected, 1e-5 * expected);
}

TEST(Step, UniformStateIsAFixedPoint) {
  const MixtureParams p = three_species();
  StepConfig cfg;
  cfg.tau = 0.1;
  const Scheme scheme(p, Grid(12, 1.0), cfg);
  const TrajectoryState s = make_trajectory(p, uniform_cells(12, (Vector(3) << 0.2, 0.5, 0.3).finished(), 0.9));
  const StepResult r = scheme.step(s);
  for (int c = 0; c < s.vars.size(); ++c) EXPECT_NEAR(r.state.vars.values()[c], s.vars.values()[c], cfg.newton_tol);
  EXPECT_LE(r.stats.residual, cfg.newton_tol);
  EXPECT_DOUBLE_EQ(r.state.time, 0.1);
}

TEST(Step, LumpedRobinRecursion) {
  MixtureParams p = MixtureParams::with_masses((Vector(2) << 1.0, 2.0).finished(), 1.0);
  p.lambda = 1.0;
  p.theta0 = 1.0;
  p.c_w = 1.4;
  const double L = 1.5, tau = 0.01;
  StepConfig cfg;
  cfg.tau = tau;
  const Scheme scheme(p, Grid(1, L), cfg);
  TrajectoryState s = make_trajectory(p, uniform_cells(1, (Vector(2) << 0.5, 1.5).finished(), 2.0));
  const double gamma = 2.0 * p.lambda / (p.c_w * 2.0 * L);
  double theta = 2.0;
  for (int k = 0; k < 50; ++k) {
    s = scheme.step(s).state;
    theta = (theta + gamma * tau * p.theta0) / (1.0 + gamma * tau);
    EXPECT_NEAR(scheme.states(s)[0].theta, theta, 1e-10);
  }
}

TEST(Step, EqualMassesMatchIsothermalLinearDiffusion) {
  // Small cosine ripple in a binary mixture with equal masses at uniform
  // temperature. Heat decouples, and the ripple decays like the implicit-Euler
  // linear diffusion mode with D = 1 / (m b rho).
  const double m = 1.3, b = 0.8, a = 1e-4, L = 1.0;
  const int N = 20, steps = 20;
  const double tau = 1e-2;
  MixtureParams p = MixtureParams::with_masses(Vector::Constant(2, m), b);
  StepConfig cfg;
  cfg.tau = tau;
  const Grid g(N, L);
  const Scheme scheme(p, g, cfg);
  const double pi = std::acos(-1.0);
  std::vector<LocalState> cells(N);
  for (int k = 0; k < N; ++k) {
    const double c = std::cos(pi * g.center(k) / L);
    cells[k] = {(Vector(2) << 1.0 + a * c, 1.0 - a * c).finished(), 1.3};
  }
  TrajectoryState s = make_trajectory(p, cells);
  for (int k = 0; k < steps; ++k) s = scheme.step(s).state;
  const std::vector<LocalState> out = scheme.states(s);

  double proj = 0.0, norm = 0.0, theta_dev = 0.0;
  for (int k = 0; k < N; ++k) {
    const double c = std::cos(pi * g.center(k) / L);
    proj += (out[k].rho(0) - 1.0) * c;
    norm += c * c;
    theta_dev = std::max(theta_dev, std::abs(out[k].theta - 1.3));
  }
  const double D = 1.0 / (m * b * 2.0);
  const double dx = g.dx();
  const double eig = D * 4.0 / (dx * dx) * std::pow(std::sin(pi * dx / (2.0 * L)), 2);
  const double expected = a * std::pow(1.0 + tau * eig, -steps);
  EXPECT_NEAR(proj / norm, expected, 1e-3 * expected);
  EXPECT_LE(theta_dev, 1e-12);
}

TEST(Step, ConservesMassWithHeatExchange) {
  Sampler rng(55);
  MixtureParams p = three_species();
  p.lambda = 1.0;
  p.theta0 = 0.7;
  StepConfig cfg;
  cfg.tau = 0.01;
  const Grid g(10, 1.0);
  const Scheme scheme(p, g, cfg);
  TrajectoryState s = make_trajectory(p, random_cells(rng, 3, 10));
  const std::vector<double> m0 = species_masses(p, g, scheme.states(s));
  for (int k = 0; k < 30; ++k) s = scheme.step(s).state;
  const std::vector<LocalState> out = scheme.states(s);
  const std::vector<double> m1 = species_masses(p, g, out);
  for (int i = 0; i < 3; ++i) EXPECT_LE(std::abs(m1[i] - m0[i]), 1e-10 * m0[i]);
  for (int k = 0; k < 10; ++k) {
    EXPECT_LE(std::abs(out[k].total() - s.rho_total[k]), 1e-12 * s.rho_total[k]);
    EXPECT_GT(out[k].rho.minCoeff(), 0.0);
    EXPECT_GT(out[k].theta, 0.0);
  }
}

TEST(Step, EntropyInequalityOnRandomData) {
  Sampler rng(56);
  const MixtureParams p = three_species();
  StepConfig cfg;
  cfg.tau = 0.005;
  const Grid g(10, 1.0);
  const Scheme scheme(p, g, cfg);
  TrajectoryState s = make_trajectory(p, random_cells(rng, 3, 10));
  DiagnosticsRecord prev = make_record(scheme, s);
  for (int k = 0; k < 20; ++k) {
    s = scheme.step(s).state;
    const DiagnosticsRecord next = make_record(scheme, s);
    const EntropyCheck check = entropy_inequality_check(prev, next, cfg.tau, 10.0 * cfg.newton_tol);
    EXPECT_TRUE(check.pass) << "step " << k << " margin " << check.margin;
    prev = next;
  }
}

TEST(Step, RegularizedModeKeepsEntropyVariablesBounded) {
  Sampler rng(57);
  MixtureParams p = three_species();
  p.epsilon = 1e-3;
  StepConfig cfg;
  cfg.tau = 0.01;
  const Scheme scheme(p, Grid(10, 1.0), cfg);
  ASSERT_EQ(scheme.stencil_radius(), 2);
  TrajectoryState s = make_trajectory(p, random_cells(rng, 3, 10));
  for (int k = 0; k < 10; ++k) {
    const StepResult r = scheme.step(s);
    EXPECT_LE(r.stats.residual, cfg.newton_tol);
    s = r.state;
  }
  for (double v : s.vars.values()) EXPECT_TRUE(std::isfinite(v));
}

TEST(Step, ExhaustedHalvingsThrow) {
  Sampler rng(58);
  const MixtureParams p = three_species();
  StepConfig cfg;
  cfg.tau = 10.0;
  cfg.newton_max = 1;
  cfg.max_halvings = 0;
  const Scheme scheme(p, Grid(10, 1.0), cfg);
  const TrajectoryState s = make_trajectory(p, random_cells(rng, 3, 10));
  try {
    scheme.step(s);
    FAIL() << "expected StepFailed";
  } catch (const StepFailed& e) {
    EXPECT_GT(e.last_residual(), cfg.newton_tol);
  }
}

TEST(Step, HalvingRecoversFromHardSteps) {
  Sampler rng(59);
  const MixtureParams p = three_species();
  StepConfig cfg;
  cfg.tau = 0.5;
  cfg.newton_max = 8;
  cfg.max_halvings = 0;
  std::vector<LocalState> cells = random_cells(rng, 3, 10);
  for (int k = 0; k < 10; ++k) cells[k].theta = k % 2 ? 0.1 : 5.0;
  const TrajectoryState s = make_trajectory(p, cells);
  // The full step is out of reach for plain Newton.
  EXPECT_THROW(Scheme(p, Grid(10, 1.0), cfg).step(s), StepFailed);
  cfg.max_halvings = 12;
  const StepResult r = Scheme(p, Grid(10, 1.0), cfg).step(s);
  EXPECT_GE(r.stats.substeps, 2);
  EXPECT_GE(r.stats.halvings, 1);
  EXPECT_DOUBLE_EQ(r.state.time, 0.5);
}

TEST(Step, HarmonicAveragingAlsoConserves) {
  Sampler rng(60);
  const MixtureParams p = three_species();
  StepConfig cfg;
  cfg.tau = 0.01;
  cfg.averaging = FaceAverage::Harmonic;
  const Grid g(8, 1.0);
  const Scheme scheme(p, g, cfg);
  TrajectoryState s = make_trajectory(p, random_cells(rng, 3, 8));
  const double e0 = total_energy(p, g, scheme.states(s));
  DiagnosticsRecord prev = make_record(scheme, s);
  for (int k = 0; k < 10; ++k) {
    s = scheme.step(s).state;
    const DiagnosticsRecord next = make_record(scheme, s);
    EXPECT_TRUE(entropy_inequality_check(prev, next, cfg.tau, 10.0 * cfg.newton_tol).pass);
    prev = next;
  }
  EXPECT_LE(std::abs(total_energy(p, g, scheme.states(s)) - e0), 1e-10 * e0);
}

TEST(Step, Deterministic) {
  Sampler rng(61);
  const MixtureParams p = three_species();
  const Scheme scheme(p, Grid(16, 1.0), StepConfig{});
  TrajectoryState a = make_trajectory(p, random_cells(rng, 3, 16));
  TrajectoryState b = a;
  for (int k = 0; k < 5; ++k) {
    a = scheme.step(a).state;
    b = scheme.step(b).state;
  }
  EXPECT_TRUE(a.vars == b.vars);
}
