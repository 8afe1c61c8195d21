#include "msnt/msalgebra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "msnt/errors.hpp"

namespace msnt {

Matrix Onsager::Q() const {
  const Eigen::Index n = A.rows();
  Matrix q(n + 1, n + 1);
  q.topLeftCorner(n, n) = A;
  q.topRightCorner(n, 1) = B;
  q.bottomLeftCorner(1, n) = B.transpose();
  q(n, n) = a;
  return q;
}

Matrix build_M(const MixtureParams& p, const Vector& rho) {
  const int n = p.n;
  const Vector sq = rho.array().sqrt().matrix();
  Matrix M(n, n);
  for (int i = 0; i < n; ++i) {
    double diag = 0.0;
    for (int k = 0; k < n; ++k)
      if (k != i) diag += p.b(i, k) * rho(k);
    M(i, i) = diag;
    for (int j = 0; j < n; ++j)
      if (j != i) M(i, j) = -p.b(i, j) * (sq(i) * sq(j));
  }
  return M;
}

Projections projections(const Vector& rho) {
  const Eigen::Index n = rho.size();
  const Vector sq = rho.array().sqrt().matrix();
  Projections proj;
  proj.P_Lperp = sq * sq.transpose() / rho.sum();
  proj.P_L = Matrix::Identity(n, n) - proj.P_Lperp;
  return proj;
}

Matrix bott_duffin(const Matrix& M, const Projections& proj) {
  const Matrix system = M * proj.P_L + proj.P_Lperp;
  const Eigen::PartialPivLU<Matrix> lu(system);
  const double threshold = 1e-14 * M.norm();
  const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(min_pivot > threshold))
    throw SingularMatrixError("Bott-Duffin system is numerically singular (pivot " +
                              std::to_string(min_pivot) + ")");
  Matrix bd = proj.P_L * lu.inverse();
  // Exact symmetry holds in exact arithmetic; remove rounding asymmetry.
  return 0.5 * (bd + bd.transpose());
}

Matrix bott_duffin(const MixtureParams& p, const Vector& rho) {
  return bott_duffin(build_M(p, rho), projections(rho));
}

Velocities velocities(const MixtureParams& p, const Vector& rho, double theta, const Vector& d) {
  const Vector sq = rho.array().sqrt().matrix();
  const Matrix bd = bott_duffin(p, rho);
  const Vector g = (d.array() / (theta * sq.array())).matrix();
  Velocities out;
  out.u = -(bd * g).cwiseQuotient(sq);
  out.constraint_violation = std::abs(sq.dot(g)) / std::sqrt(rho.sum());
  return out;
}

Onsager onsager(const MixtureParams& p, const Vector& rho, double theta) {
  const Vector sq = rho.array().sqrt().matrix();
  const Matrix bd = bott_duffin(p, rho);
  Onsager ons;
  ons.A = sq.asDiagonal() * bd * sq.asDiagonal();
  const Vector inv_m = p.m.cwiseInverse();
  ons.B = theta * (ons.A * inv_m);
  ons.a = theta * theta * (p.kappa(theta) + inv_m.dot(ons.A * inv_m));
  return ons;
}

MSLocal ms_local(const MixtureParams& p, const Vector& rho, double theta) {
  MSLocal loc;
  loc.M = build_M(p, rho);
  const Projections proj = projections(rho);
  loc.P_L = proj.P_L;
  loc.P_Lperp = proj.P_Lperp;
  loc.M_BD = bott_duffin(loc.M, proj);
  const Vector sq = rho.array().sqrt().matrix();
  loc.A = sq.asDiagonal() * loc.M_BD * sq.asDiagonal();
  const Vector inv_m = p.m.cwiseInverse();
  loc.B = theta * (loc.A * inv_m);
  loc.a = theta * theta * (p.kappa(theta) + inv_m.dot(loc.A * inv_m));
  return loc;
}

Vector flux_mass(const MixtureParams& /*p*/, const Onsager& ons, double theta, const Vector& grad_q,
                 double grad_w) {
  return -(ons.A * grad_q) - ons.B * (grad_w / theta);
}

Vector flux_mass(const MixtureParams& p, const Vector& rho, double theta, const Vector& grad_q,
                 double grad_w) {
  return flux_mass(p, onsager(p, rho, theta), theta, grad_q, grad_w);
}

Vector flux_mass_relative(const MixtureParams& p, const Vector& rho, double theta,
                          const Vector& grad_wrel, double grad_w) {
  const Onsager ons = onsager(p, rho, theta);
  const int n = p.n;
  return -(ons.A.leftCols(n - 1) * grad_wrel) - ons.B * (grad_w / theta);
}

Vector flux_mass_shifted(const MixtureParams& p, const Vector& rho, double theta, const Vector& grad_q,
                         double grad_w) {
  const Onsager ons = onsager(p, rho, theta);
  const Vector shifted = grad_q + grad_w * p.m.cwiseInverse();
  return -(ons.A * shifted);
}

Vector flux_mass_direct(const MixtureParams& p, const Vector& rho, double theta, const Vector& d) {
  const Vector sq = rho.array().sqrt().matrix();
  const Matrix bd = bott_duffin(p, rho);
  const Vector g = (d.array() / (theta * sq.array())).matrix();
  return -sq.cwiseProduct(bd * g);
}

double flux_energy(const MixtureParams& p, const Vector& rho, double theta, double grad_theta,
                   const Vector& u) {
  return -p.kappa(theta) * grad_theta + theta * (rho.cwiseProduct(u).cwiseQuotient(p.m)).sum();
}

double flux_energy_onsager(const MixtureParams& p, const Vector& rho, double theta,
                           const Vector& grad_wrel, double grad_w) {
  const Onsager ons = onsager(p, rho, theta);
  const Vector inv_m = p.m.cwiseInverse();
  const int n = p.n;
  return -p.kappa(theta) * theta * grad_w - ons.B.head(n - 1).dot(grad_wrel) -
         theta * inv_m.dot(ons.A * inv_m) * grad_w;
}

double friction_lower_bound(const MixtureParams& p) {
  double lo = std::numeric_limits<double>::infinity();
  for (int i = 0; i < p.n; ++i)
    for (int j = 0; j < p.n; ++j)
      if (i != j) lo = std::min(lo, p.b(i, j));
  return lo;
}

double bott_duffin_lower_bound(const MixtureParams& p) {
  double sum = 0.0;
  for (int i = 0; i < p.n; ++i)
    for (int j = 0; j < p.n; ++j)
      if (i != j) sum += p.b(i, j) + 1.0;
  return 1.0 / (2.0 * sum);
}

double friction_dissipation(const MixtureParams& p, const Vector& rho, const Vector& u) {
  double sum = 0.0;
  for (int i = 0; i < p.n; ++i)
    for (int j = 0; j < p.n; ++j) {
      if (i == j) continue;
      const double du = u(i) - u(j);
      sum += p.b(i, j) * rho(i) * rho(j) * du * du;
    }
  return 0.5 * sum;
}

}  // namespace msnt
