#include "looplc/mapviz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "looplc/dispatch.hpp"
#include "looplc/errors.hpp"

namespace looplc {

namespace {

Matrix rows2(std::initializer_list<std::array<double, 2>> rows) {
  Matrix m(static_cast<Index>(rows.size()), 2);
  Index r = 0;
  for (const auto& row : rows) {
    m(r, 0) = row[0];
    m(r, 1) = row[1];
    ++r;
  }
  return m;
}

void require_planar(const LinearInequalitySet& set) {
  if (set.dim() != 2) {
    throw DimensionError("planar helpers need a 2-D set, got dimension " +
                         std::to_string(set.dim()));
  }
}

}  // namespace

ShiftedSet planar_preset(const std::string& name) {
  if (name == "triangle") {
    Matrix a = rows2({{-1.0, 0.0}, {0.0, -1.0}, {1.0, 1.0}});
    Vector b(3);
    b << 0.0, 0.0, 2.0;
    auto set = std::make_shared<const LinearInequalitySet>(a, Matrix(3, 0), b);
    Vector center(2);
    center << 0.4, 0.4;
    return ShiftedSet::around(set, Vector(0), center);
  }
  if (name == "box") {
    Matrix a = rows2({{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}});
    auto set = std::make_shared<const LinearInequalitySet>(a, Matrix(4, 0),
                                                           Vector::Ones(4));
    return ShiftedSet::around(set, Vector(0), Vector::Zero(2));
  }
  if (name == "dispatch3") {
    DispatchCase c;
    c.u_min = Vector::Zero(3);
    c.u_max = Vector(3);
    c.u_max << 1.0, 1.5, 2.0;
    c.cost_quadratic = Vector::Ones(3);
    c.cost_linear = Vector::Zero(3);
    c.loads_nominal = Vector::Constant(1, 1.2);
    const ReducedSet rs = build_reduced_set(c, Partition::with_dependent(3));
    return shifted_reduced_set(c, rs, c.loads_nominal);
  }
  throw DomainError("unknown planar set '" + name + "' (triangle, box, dispatch3)");
}

Box2d bounding_box_2d(const LinearInequalitySet& set, const Vector& context) {
  require_planar(set);
  const Vector rhs = set.rhs(context);
  const Matrix& a = set.a();
  Box2d box{{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()},
            {-std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity()}};
  bool any = false;
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = i + 1; j < a.rows(); ++j) {
      const double det = a(i, 0) * a(j, 1) - a(i, 1) * a(j, 0);
      if (std::abs(det) < 1e-14) continue;
      Vector p(2);
      p[0] = (rhs[i] * a(j, 1) - a(i, 1) * rhs[j]) / det;
      p[1] = (a(i, 0) * rhs[j] - rhs[i] * a(j, 0)) / det;
      if (!contains(set, context, p, 1e-9)) continue;
      any = true;
      for (int k = 0; k < 2; ++k) {
        box.lo[k] = std::min(box.lo[k], p[k]);
        box.hi[k] = std::max(box.hi[k], p[k]);
      }
    }
  }
  if (!any) throw GeometryError("planar set has no vertices (empty or unbounded)");
  return box;
}

std::vector<Vector> uniform_grid_2d(const Box2d& box, int res) {
  if (res < 2) throw DomainError("grid resolution must be at least 2");
  std::vector<Vector> grid;
  grid.reserve(static_cast<std::size_t>(res) * static_cast<std::size_t>(res));
  for (int i = 0; i < res; ++i) {
    const double v1 = box.lo[0] + (box.hi[0] - box.lo[0]) * i / (res - 1);
    for (int j = 0; j < res; ++j) {
      const double v2 = box.lo[1] + (box.hi[1] - box.lo[1]) * j / (res - 1);
      Vector v(2);
      v << v1, v2;
      grid.push_back(std::move(v));
    }
  }
  return grid;
}

std::vector<Vector> default_grid(const GaugeLayerConfig& config, const ShiftedSet& s,
                                 int res) {
  require_planar(s.base());
  if (config.needs_unit_ball()) return uniform_grid_2d(Box2d{{-1.0, -1.0}, {1.0, 1.0}}, res);
  Box2d box = bounding_box_2d(s.base(), s.context());
  for (int k = 0; k < 2; ++k) {
    box.lo[k] -= s.center()[k];
    box.hi[k] -= s.center()[k];
  }
  return uniform_grid_2d(box, res);
}

double binned_density_ratio(const ShiftedSet& s, const std::vector<Vector>& points,
                            int bins) {
  require_planar(s.base());
  if (bins < 1) throw DomainError("need at least one bin per axis");
  const Box2d box = bounding_box_2d(s.base(), s.context());
  const double w0 = (box.hi[0] - box.lo[0]) / bins;
  const double w1 = (box.hi[1] - box.lo[1]) / bins;

  std::vector<char> inside(static_cast<std::size_t>(bins * bins), 0);
  for (int i = 0; i < bins; ++i) {
    for (int j = 0; j < bins; ++j) {
      bool all = true;
      for (int di = 0; di <= 1 && all; ++di) {
        for (int dj = 0; dj <= 1 && all; ++dj) {
          Vector corner(2);
          corner << box.lo[0] + (i + di) * w0, box.lo[1] + (j + dj) * w1;
          all = contains(s.base(), s.context(), corner, 1e-12);
        }
      }
      inside[static_cast<std::size_t>(i * bins + j)] = all ? 1 : 0;
    }
  }

  std::vector<long> count(static_cast<std::size_t>(bins * bins), 0);
  for (const Vector& p : points) {
    const int i = std::clamp(static_cast<int>(std::floor((p[0] - box.lo[0]) / w0)), 0, bins - 1);
    const int j = std::clamp(static_cast<int>(std::floor((p[1] - box.lo[1]) / w1)), 0, bins - 1);
    ++count[static_cast<std::size_t>(i * bins + j)];
  }

  long lo = std::numeric_limits<long>::max();
  long hi = 0;
  for (std::size_t k = 0; k < count.size(); ++k) {
    if (!inside[k]) continue;
    lo = std::min(lo, count[k]);
    hi = std::max(hi, count[k]);
  }
  if (lo == std::numeric_limits<long>::max()) return std::numeric_limits<double>::quiet_NaN();
  if (lo == 0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(hi) / static_cast<double>(lo);
}

}  // namespace looplc
