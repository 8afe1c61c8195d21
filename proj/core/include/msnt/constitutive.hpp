#pragma once

// Thermodynamic closures of an ideal simple gas mixture with constant heat
// capacity, and the bijection between primal states (rho_1..rho_n, theta) and
// relative entropy variables (w_1..w_{n-1}, log theta).

#include <algorithm>

#include <Eigen/Dense>

namespace msnt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct MixtureParams {
  int n = 2;
  Vector m;        // molar masses, length n
  Matrix b;        // symmetric friction coefficients, diagonal ignored
  double c_w = 1.0;
  double kappa0 = 1.0;
  double kappa2 = 1.0;
  double lambda = 0.0;   // boundary heat-exchange coefficient
  double theta0 = 1.0;   // background temperature
  double epsilon = 0.0;  // regularization strength, 0 = plain scheme

  /// Heat conductivity kappa(theta) = kappa0 + kappa2 * theta^2.
  double kappa(double theta) const { return kappa0 + kappa2 * theta * theta; }
  double kappa_lower() const { return std::min(kappa0, kappa2); }
  double kappa_upper() const { return std::max(kappa0, kappa2); }

  /// Throws ValidationError naming the violated assumption.
  void validate() const;

  /// All pairwise frictions equal to `friction`, unit heat capacity.
  static MixtureParams with_masses(const Vector& masses, double friction);
};

struct LocalState {
  Vector rho;
  double theta = 1.0;

  double total() const { return rho.sum(); }
};

struct LocalEntropyVars {
  Vector w;           // w_1..w_{n-1}
  double wlog = 0.0;  // log theta
};

/// mu_i = (theta/m_i) log(rho_i/m_i) - c_w theta (log theta - 1)
Vector chemical_potential(const MixtureParams& p, const LocalState& s);

/// Mathematical (negative physical) entropy density h.
double entropy_density(const MixtureParams& p, const LocalState& s);

/// Total internal energy density E = c_w rho theta.
double internal_energy(const MixtureParams& p, const LocalState& s);

Vector partial_pressure(const MixtureParams& p, const LocalState& s);
double total_pressure(const MixtureParams& p, const LocalState& s);

/// d_i = grad(rho_i theta) / m_i from the gradients of rho_i theta.
Vector driving_force(const MixtureParams& p, const Vector& grad_rho_theta);

/// Partial Helmholtz free energies psi_i. Diagnostic only.
Vector free_energy(const MixtureParams& p, const LocalState& s);

/// q_i = mu_i / theta.
Vector thermo_chemical_potential(const MixtureParams& p, const LocalState& s);

LocalEntropyVars entropy_vars_from_state(const MixtureParams& p, const LocalState& s);

/// Inverse of entropy_vars_from_state at prescribed total density.
///
/// Solves the scalar monotone equation for rho_n in log space with a
/// bisection-safeguarded Newton iteration (at most 200 iterations). The
/// largest component absorbs the rounding so that sum(rho) == rho_total to
/// machine precision. Throws ConvergenceError when the inputs overflow.
LocalState state_from_entropy_vars(const MixtureParams& p, const LocalEntropyVars& v,
                                   double rho_total);

/// Hessian of h with respect to (rho_1..rho_{n-1}, theta) at fixed total density.
Matrix entropy_hessian(const MixtureParams& p, const LocalState& s);

/// Lower bound on admissible densities applied to initial data.
inline constexpr double kDensityFloor = 1e-12;

/// Clamps every rho_i to at least kDensityFloor * sum(rho).
LocalState apply_density_floor(LocalState s);

}  // namespace msnt
