#include "msnt/grid1d.hpp"

#include <stdexcept>

#include "msnt/errors.hpp"

namespace msnt {

Grid::Grid(int cells_, double length_) : cells(cells_), length(length_) {
  if (cells < 1) throw ValidationError("A1", "grid needs at least one cell");
  if (!(length > 0.0)) throw ValidationError("A1", "domain length must be positive");
}

FaceField face_gradient(const Grid& g, std::span<const double> f) {
  if (static_cast<int>(f.size()) != g.cells) throw std::invalid_argument("face_gradient: expected a cell field");
  FaceField grad(g.faces(), 0.0);
  const double inv_dx = 1.0 / g.dx();
  for (int k = 1; k < g.cells; ++k) grad[k] = (f[k] - f[k - 1]) * inv_dx;
  return grad;
}

CellField divergence(const Grid& g, std::span<const double> F) {
  if (static_cast<int>(F.size()) != g.faces()) throw std::invalid_argument("divergence: expected a face field");
  CellField div(g.cells);
  const double inv_dx = 1.0 / g.dx();
  for (int k = 0; k < g.cells; ++k) div[k] = (F[k + 1] - F[k]) * inv_dx;
  return div;
}

BoundaryEnergyFlux apply_boundary(const MixtureParams& p, double theta_left_cell,
                                  double theta_right_cell) {
  return {-p.lambda * (theta_left_cell - p.theta0), p.lambda * (theta_right_cell - p.theta0)};
}

}  // namespace msnt
