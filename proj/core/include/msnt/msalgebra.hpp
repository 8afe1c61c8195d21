#pragma once

// Pointwise Maxwell-Stefan algebra: the singular friction matrix M, the
// projections onto L = {y : sqrt(rho) . y = 0} and its complement, the
// Bott-Duffin inverse of M with respect to L, and the Onsager coefficients
// (A, B, a) that map gradients of entropy variables to fluxes.

#include "msnt/constitutive.hpp"

namespace msnt {

struct Projections {
  Matrix P_L;
  Matrix P_Lperp;
};

struct Onsager {
  Matrix A;       // A_ij = M^BD_ij sqrt(rho_i rho_j)
  Vector B;       // B_i = theta sum_j A_ij / m_j
  double a = 0.0; // theta^2 (kappa + sum_ij A_ij / (m_i m_j))

  /// Full (n+1)x(n+1) Onsager matrix [[A, B], [B^T, a]].
  Matrix Q() const;
};

struct MSLocal {
  Matrix M;
  Matrix P_L;
  Matrix P_Lperp;
  Matrix M_BD;
  Matrix A;
  Vector B;
  double a = 0.0;
};

struct Velocities {
  Vector u;
  /// |P_Lperp g| with g_j = d_j / (theta sqrt(rho_j)); zero when sum_j d_j = 0.
  double constraint_violation = 0.0;
};

Matrix build_M(const MixtureParams& p, const Vector& rho);

Projections projections(const Vector& rho);

/// M^BD = P_L (M P_L + P_Lperp)^{-1}, via a dense partially pivoted LU.
/// Throws SingularMatrixError when a pivot drops below 1e-14 * ||M||.
Matrix bott_duffin(const Matrix& M, const Projections& proj);

/// M^BD assembled at rho.
Matrix bott_duffin(const MixtureParams& p, const Vector& rho);

/// Solves the constrained Maxwell-Stefan system for the diffusion velocities.
Velocities velocities(const MixtureParams& p, const Vector& rho, double theta, const Vector& d);

Onsager onsager(const MixtureParams& p, const Vector& rho, double theta);

MSLocal ms_local(const MixtureParams& p, const Vector& rho, double theta);

/// Mass fluxes J_i = -sum_j A_ij grad q_j - (B_i / theta) grad w, with
/// grad_q the gradients of all n thermo-chemical potentials q_j = mu_j / theta
/// and grad_w the gradient of log theta.
Vector flux_mass(const MixtureParams& p, const Onsager& ons, double theta, const Vector& grad_q,
                 double grad_w);
Vector flux_mass(const MixtureParams& p, const Vector& rho, double theta, const Vector& grad_q,
                 double grad_w);

/// Same flux written in the relative variables: -sum_{j<n} A_ij grad w_j - (B_i/theta) grad w.
Vector flux_mass_relative(const MixtureParams& p, const Vector& rho, double theta,
                          const Vector& grad_wrel, double grad_w);

/// J_i = -sum_j A_ij grad(q_j + w / m_j).
Vector flux_mass_shifted(const MixtureParams& p, const Vector& rho, double theta, const Vector& grad_q,
                         double grad_w);

/// J_i = -sqrt(rho_i) sum_j M^BD_ij d_j / (theta sqrt(rho_j)).
Vector flux_mass_direct(const MixtureParams& p, const Vector& rho, double theta, const Vector& d);

/// J_e = -kappa grad theta + theta sum_i rho_i u_i / m_i.
double flux_energy(const MixtureParams& p, const Vector& rho, double theta, double grad_theta,
                   const Vector& u);

/// Onsager form: -kappa theta grad w - sum_{j<n} B_j grad w_j - theta sum_ij A_ij/(m_i m_j) grad w.
double flux_energy_onsager(const MixtureParams& p, const Vector& rho, double theta,
                           const Vector& grad_wrel, double grad_w);

/// Definiteness constant of M on L at unit total density: min_{i != j} b_ij.
/// M is homogeneous of degree one in rho, so in general z^T M z >= rho min b_ij |P_L z|^2.
double friction_lower_bound(const MixtureParams& p);

/// Definiteness constant of M^BD on L at unit total density: (2 sum_{i != j} (b_ij + 1))^{-1}.
/// For total density rho the constant is divided by rho.
double bott_duffin_lower_bound(const MixtureParams& p);

/// (1/2) sum_ij b_ij rho_i rho_j |u_i - u_j|^2.
double friction_dissipation(const MixtureParams& p, const Vector& rho, const Vector& u);

}  // namespace msnt
