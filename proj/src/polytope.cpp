#include "looplc/polytope.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "looplc/errors.hpp"

namespace looplc {

namespace {

std::string shape(Index r, Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

}  // namespace

LinearInequalitySet::LinearInequalitySet(Matrix a, Matrix b_mat, Vector b_vec)
    : a_(std::move(a)), b_mat_(std::move(b_mat)), b_vec_(std::move(b_vec)) {
  if (a_.rows() < 1 || a_.cols() < 1) {
    throw DimensionError("inequality set needs at least one row and column, got A " +
                         shape(a_.rows(), a_.cols()));
  }
  if (b_mat_.rows() != a_.rows() || b_vec_.size() != a_.rows()) {
    throw DimensionError("row counts disagree: A " + shape(a_.rows(), a_.cols()) +
                         ", B " + shape(b_mat_.rows(), b_mat_.cols()) + ", b " +
                         std::to_string(b_vec_.size()));
  }
}

Vector LinearInequalitySet::rhs(const Vector& x) const {
  if (x.size() != context_dim()) {
    throw DimensionError("context has " + std::to_string(x.size()) +
                         " entries, set expects " + std::to_string(context_dim()));
  }
  if (context_dim() == 0) return b_vec_;
  return b_mat_ * x + b_vec_;
}

Vector LinearInequalitySet::residual(const Vector& x, const Vector& u) const {
  if (u.size() != dim()) {
    throw DimensionError("point has " + std::to_string(u.size()) +
                         " entries, set expects " + std::to_string(dim()));
  }
  return a_ * u - rhs(x);
}

bool contains(const LinearInequalitySet& set, const Vector& x, const Vector& u,
              double tol) {
  if (!(tol >= 0.0)) throw DomainError("membership tolerance must be nonnegative");
  return (set.residual(x, u).array() <= tol).all();
}

double unit_ball_gauge(const Vector& v) {
  if (v.size() == 0) throw DimensionError("gauge of an empty vector");
  return v.cwiseAbs().maxCoeff();
}

Index unit_ball_argmax(const Vector& v) {
  if (v.size() == 0) throw DimensionError("gauge of an empty vector");
  Index best = 0;
  for (Index i = 1; i < v.size(); ++i) {
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  }
  return best;
}

InteriorPoint InteriorPoint::make(const LinearInequalitySet& set, const Vector& x,
                                  Vector point) {
  Vector slack = -set.residual(x, point);
  return from_slack(std::move(point), std::move(slack));
}

InteriorPoint InteriorPoint::from_slack(Vector point, Vector slack) {
  for (Index r = 0; r < slack.size(); ++r) {
    if (!(slack[r] > kDenominatorFloor)) {
      throw GeometryError("center not strictly interior: row " + std::to_string(r) +
                              " has slack " + std::to_string(slack[r]),
                          r);
    }
  }
  return InteriorPoint{std::move(point), std::move(slack)};
}

ShiftedSet::ShiftedSet(std::shared_ptr<const LinearInequalitySet> base,
                       Vector context, InteriorPoint center)
    : base_(std::move(base)), context_(std::move(context)), center_(std::move(center)) {
  if (!base_) throw DomainError("shifted set without a base set");
  if (center_.point.size() != base_->dim() || center_.slack.size() != base_->rows() ||
      context_.size() != base_->context_dim()) {
    throw DimensionError("shifted set center or context does not match the base set");
  }
}

ShiftedSet ShiftedSet::around(std::shared_ptr<const LinearInequalitySet> base,
                              Vector context, Vector point) {
  if (!base) throw DomainError("shifted set without a base set");
  auto center = InteriorPoint::make(*base, context, std::move(point));
  return ShiftedSet(std::move(base), std::move(context), std::move(center));
}

GaugeValue shifted_set_gauge_argmax(const ShiftedSet& s, const Vector& v) {
  if (v.size() != s.dim()) {
    throw DimensionError("gauge argument has " + std::to_string(v.size()) +
                         " entries, set dimension is " + std::to_string(s.dim()));
  }
  const Matrix& a = s.base().a();
  const Vector& slack = s.slack();
  GaugeValue best{a.row(0).dot(v) / slack[0], 0};
  for (Index r = 1; r < a.rows(); ++r) {
    const double ratio = a.row(r).dot(v) / slack[r];
    if (ratio > best.value) best = {ratio, r};
  }
  return best;
}

std::optional<double> gauge_boundary_oracle(const ShiftedSet& s,
                                            const Vector& direction, double cap) {
  if (direction.size() != s.dim()) {
    throw DimensionError("direction does not match the set dimension");
  }
  if (direction.isZero(0.0)) throw DomainError("ray direction must be nonzero");

  const auto inside = [&](double t) {
    const Vector p = s.center() + t * direction;
    return contains(s.base(), s.context(), p, 0.0);
  };

  double lo = 0.0;
  double hi = 1.0;
  while (inside(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > cap) return std::nullopt;
  }
  for (int it = 0; it < 400 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (inside(mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace looplc
