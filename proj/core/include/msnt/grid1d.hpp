#pragma once

// Cell-centered finite volumes on [0, length]. Cell fields have `cells`
// entries, face fields have `cells + 1` entries; face 0 and face `cells` are
// the domain boundary.

#include <span>
#include <vector>

#include "msnt/constitutive.hpp"

namespace msnt {

using CellField = std::vector<double>;
using FaceField = std::vector<double>;

struct Grid {
  int cells = 1;
  double length = 1.0;

  Grid() = default;
  Grid(int cells, double length);

  double dx() const { return length / cells; }
  double center(int k) const { return (k + 0.5) * dx(); }
  double face(int f) const { return f * dx(); }
  int faces() const { return cells + 1; }
};

/// Interior faces: (f_k - f_{k-1}) / dx. Boundary faces are zero.
FaceField face_gradient(const Grid& g, std::span<const double> f);

/// Cell k: (F_{k+1} - F_k) / dx.
CellField divergence(const Grid& g, std::span<const double> F);

struct BoundaryEnergyFlux {
  double left = 0.0;   // flux through face 0 in the +x direction
  double right = 0.0;  // flux through the last face in the +x direction
};

/// Robin heat exchange J_e . nu = lambda (theta - theta0); mass fluxes vanish.
/// A boundary cell hotter than theta0 loses energy through its outer face.
BoundaryEnergyFlux apply_boundary(const MixtureParams& p, double theta_left_cell,
                                  double theta_right_cell);

}  // namespace msnt
