#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "looplc/gauge.hpp"
#include "looplc/linalg.hpp"
#include "looplc/polytope.hpp"

namespace looplc {

/// Axis-aligned box {lo[0] <= u1 <= hi[0], lo[1] <= u2 <= hi[1]}.
struct Box2d {
  std::array<double, 2> lo{};
  std::array<double, 2> hi{};
};

/// Named built-in 2-D sets used to visualize how a layer spreads a grid:
///   "triangle"  u1 >= 0, u2 >= 0, u1 + u2 <= 2, centered off-middle
///   "box"       [-1, 1]^2 centered at the origin
///   "dispatch3" reduced set of a three-generator dispatch case
ShiftedSet planar_preset(const std::string& name);

/// Bounding box of a bounded 2-D polytope, by vertex enumeration.
Box2d bounding_box_2d(const LinearInequalitySet& set, const Vector& context);

/// res x res uniform grid over a box, row-major in (v1, v2).
std::vector<Vector> uniform_grid_2d(const Box2d& box, int res);

/// Default input grid for a layer: the unit ball for the traditional and
/// variant maps, the set's bounding box relative to the center for the
/// generalized map.
std::vector<Vector> default_grid(const GaugeLayerConfig& config, const ShiftedSet& s,
                                 int res);

/// Max over min point count across the bins x bins cells of the set's
/// bounding box that lie entirely inside the set. Infinite when such a cell
/// is empty; NaN when no cell is fully inside.
double binned_density_ratio(const ShiftedSet& s, const std::vector<Vector>& points,
                            int bins = 10);

}  // namespace looplc
