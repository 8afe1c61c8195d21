#include "msnt/constitutive.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "msnt/errors.hpp"

namespace msnt {

void MixtureParams::validate() const {
  if (n < 2) throw ValidationError("", "species count must be at least 2, got " + std::to_string(n));
  if (m.size() != n) throw ValidationError("", "molar mass vector has wrong length");
  if (b.rows() != n || b.cols() != n) throw ValidationError("A3", "friction matrix must be n x n");
  for (int i = 0; i < n; ++i) {
    if (!(m(i) > 0.0) || !std::isfinite(m(i)))
      throw ValidationError("", "molar mass m_" + std::to_string(i + 1) + " must be positive");
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if (!(b(i, j) > 0.0) || !std::isfinite(b(i, j)))
        throw ValidationError("A3", "friction b_" + std::to_string(i + 1) + std::to_string(j + 1) +
                                        " must be positive");
      if (b(i, j) != b(j, i))
        throw ValidationError("A3", "friction matrix must be symmetric");
    }
  }
  if (!(c_w > 0.0)) throw ValidationError("", "heat capacity c_w must be positive");
  if (!(kappa0 > 0.0) || !(kappa2 > 0.0))
    throw ValidationError("A4", "conductivity coefficients kappa0, kappa2 must be positive");
  if (!(lambda >= 0.0)) throw ValidationError("", "boundary coefficient lambda must be >= 0");
  if (!(theta0 > 0.0)) throw ValidationError("", "background temperature theta0 must be positive");
  if (!(epsilon >= 0.0)) throw ValidationError("", "regularization epsilon must be >= 0");
}

MixtureParams MixtureParams::with_masses(const Vector& masses, double friction) {
  MixtureParams p;
  p.n = static_cast<int>(masses.size());
  p.m = masses;
  p.b = Matrix::Constant(p.n, p.n, friction);
  p.b.diagonal().setZero();
  return p;
}

Vector chemical_potential(const MixtureParams& p, const LocalState& s) {
  const double th = s.theta;
  const double thermal = p.c_w * th * (std::log(th) - 1.0);
  Vector mu(p.n);
  for (int i = 0; i < p.n; ++i) mu(i) = th / p.m(i) * std::log(s.rho(i) / p.m(i)) - thermal;
  return mu;
}

Vector thermo_chemical_potential(const MixtureParams& p, const LocalState& s) {
  Vector q(p.n);
  const double thermal = p.c_w * (std::log(s.theta) - 1.0);
  for (int i = 0; i < p.n; ++i) q(i) = std::log(s.rho(i) / p.m(i)) / p.m(i) - thermal;
  return q;
}

double entropy_density(const MixtureParams& p, const LocalState& s) {
  double h = 0.0;
  for (int i = 0; i < p.n; ++i) {
    const double c = s.rho(i) / p.m(i);
    h += c * (std::log(c) - 1.0);
  }
  return h - p.c_w * s.total() * std::log(s.theta);
}

double internal_energy(const MixtureParams& p, const LocalState& s) {
  return p.c_w * s.total() * s.theta;
}

Vector partial_pressure(const MixtureParams& p, const LocalState& s) {
  return (s.rho.array() * s.theta / p.m.array()).matrix();
}

double total_pressure(const MixtureParams& p, const LocalState& s) {
  return partial_pressure(p, s).sum();
}

Vector driving_force(const MixtureParams& p, const Vector& grad_rho_theta) {
  return (grad_rho_theta.array() / p.m.array()).matrix();
}

Vector free_energy(const MixtureParams& p, const LocalState& s) {
  // Simple mixture: psi_i depends on rho_i and theta only, so the thermal
  // part carries rho_i. This is what makes mu_i = d psi_i / d rho_i and
  // p_i = rho_i mu_i - psi_i hold together.
  const double th = s.theta;
  Vector psi(p.n);
  for (int i = 0; i < p.n; ++i) {
    const double c = s.rho(i) / p.m(i);
    psi(i) = th * c * (std::log(c) - 1.0) - p.c_w * s.rho(i) * th * (std::log(th) - 1.0);
  }
  return psi;
}

LocalEntropyVars entropy_vars_from_state(const MixtureParams& p, const LocalState& s) {
  const int n = p.n;
  const double last = std::log(s.rho(n - 1) / p.m(n - 1)) / p.m(n - 1);
  LocalEntropyVars v;
  v.w.resize(n - 1);
  for (int i = 0; i < n - 1; ++i) v.w(i) = std::log(s.rho(i) / p.m(i)) / p.m(i) - last;
  v.wlog = std::log(s.theta);
  return v;
}

namespace {

// log rho_i as a function of y = log rho_n:
//   log rho_i = log m_i + m_i w_i + (m_i / m_n) (y - log m_n)
struct SpeciesFromLast {
  const MixtureParams& p;
  const LocalEntropyVars& v;

  double log_rho(int i, double y) const {
    const double mn = p.m(p.n - 1);
    return std::log(p.m(i)) + p.m(i) * v.w(i) + p.m(i) / mn * (y - std::log(mn));
  }

  // F(y) = rho_n + sum_{i<n} rho_i - rho, strictly increasing in y.
  // Returns (F, dF/dy).
  std::pair<double, double> eval(double y, double rho_total) const {
    const double mn = p.m(p.n - 1);
    double f = std::exp(y) - rho_total;
    double df = std::exp(y);
    for (int i = 0; i < p.n - 1; ++i) {
      const double r = std::exp(log_rho(i, y));
      f += r;
      df += r * p.m(i) / mn;
    }
    return {f, df};
  }
};

}  // namespace

LocalState state_from_entropy_vars(const MixtureParams& p, const LocalEntropyVars& v,
                                   double rho_total) {
  const int n = p.n;
  if (!(rho_total > 0.0) || !std::isfinite(rho_total))
    throw ConvergenceError("total density must be positive and finite");
  if (!std::isfinite(v.wlog) || !v.w.allFinite())
    throw ConvergenceError("entropy variables must be finite");

  const SpeciesFromLast species{p, v};
  const double mn = p.m(n - 1);

  // Bracket: at y_hi = log rho every term is positive so F > 0; at y_lo every
  // summand is at most rho / n so F <= 0.
  const double share = std::log(rho_total / n);
  double y_hi = std::log(rho_total);
  double y_lo = share;
  for (int i = 0; i < n - 1; ++i) {
    const double y_i = std::log(mn) + mn / p.m(i) * (share - std::log(p.m(i)) - p.m(i) * v.w(i));
    y_lo = std::min(y_lo, y_i);
  }
  if (!std::isfinite(y_lo)) throw ConvergenceError("entropy variables overflow the density bracket");

  double y = 0.5 * (y_lo + y_hi);
  bool converged = false;
  for (int it = 0; it < 200; ++it) {
    const auto [f, df] = species.eval(y, rho_total);
    if (f == 0.0) {
      converged = true;
      break;
    }
    if (f > 0.0) y_hi = y; else y_lo = y;
    double next = y - f / df;
    if (!(next > y_lo && next < y_hi) || !std::isfinite(next)) next = 0.5 * (y_lo + y_hi);
    const double step = std::abs(next - y);
    y = next;
    if (step <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(y)) ||
        y_hi - y_lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(y))) {
      converged = true;
      break;
    }
  }
  if (!converged) throw ConvergenceError("density recovery did not converge in 200 iterations");

  LocalState s;
  s.theta = std::exp(v.wlog);
  s.rho.resize(n);
  for (int i = 0; i < n - 1; ++i) s.rho(i) = std::exp(species.log_rho(i, y));
  s.rho(n - 1) = std::exp(y);
  if (!(s.rho.array() > 0.0).all() || !s.rho.allFinite() || !(s.theta > 0.0) || !std::isfinite(s.theta))
    throw ConvergenceError("recovered state is not strictly positive and finite");

  // Close the total-density constraint exactly on the dominant species.
  Eigen::Index big = 0;
  s.rho.maxCoeff(&big);
  double others = 0.0;
  for (int i = 0; i < n; ++i)
    if (i != big) others += s.rho(i);
  s.rho(big) = rho_total - others;
  return s;
}

Matrix entropy_hessian(const MixtureParams& p, const LocalState& s) {
  const int n = p.n;
  Matrix hess = Matrix::Zero(n, n);
  const double last = 1.0 / (p.m(n - 1) * s.rho(n - 1));
  for (int i = 0; i < n - 1; ++i) {
    for (int j = 0; j < n - 1; ++j) hess(i, j) = last;
    hess(i, i) += 1.0 / (p.m(i) * s.rho(i));
  }
  hess(n - 1, n - 1) = p.c_w * s.total() / (s.theta * s.theta);
  return hess;
}

LocalState apply_density_floor(LocalState s) {
  const double floor = kDensityFloor * s.total();
  for (Eigen::Index i = 0; i < s.rho.size(); ++i) s.rho(i) = std::max(s.rho(i), floor);
  return s;
}

}  // namespace msnt
