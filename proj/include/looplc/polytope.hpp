#pragma once

#include <memory>
#include <optional>

#include "looplc/linalg.hpp"

namespace looplc {

/// Slacks at or below this value mark a center as non-interior.
inline constexpr double kDenominatorFloor = 1e-12;

/// The polytope { u : A u <= B x + b } parameterized by a context vector x.
///
/// A is m x n, B is m x d and b has m entries. Storage is dense and
/// row-major; instances are immutable after construction.
class LinearInequalitySet {
 public:
  LinearInequalitySet(Matrix a, Matrix b_mat, Vector b_vec);

  Index rows() const noexcept { return a_.rows(); }
  Index dim() const noexcept { return a_.cols(); }
  Index context_dim() const noexcept { return b_mat_.cols(); }

  const Matrix& a() const noexcept { return a_; }
  const Matrix& b_mat() const noexcept { return b_mat_; }
  const Vector& b_vec() const noexcept { return b_vec_; }

  /// B x + b.
  Vector rhs(const Vector& x) const;
  /// A u - B x - b; nonpositive entries are satisfied rows.
  Vector residual(const Vector& x, const Vector& u) const;

 private:
  Matrix a_;
  Matrix b_mat_;
  Vector b_vec_;
};

/// True iff every component of A u - B x - b is <= tol.
bool contains(const LinearInequalitySet& set, const Vector& x, const Vector& u,
              double tol);

/// Minkowski gauge of the l-infinity unit ball, i.e. max_r |v_r|.
double unit_ball_gauge(const Vector& v);

/// Index of the component attaining unit_ball_gauge; lowest index wins ties.
Index unit_ball_argmax(const Vector& v);

/// A strictly feasible anchor together with its row slacks B x + b - A point.
struct InteriorPoint {
  Vector point;
  Vector slack;

  /// Computes the slacks against `set` at context `x` and checks that
  /// every slack exceeds kDenominatorFloor. Throws GeometryError naming
  /// the first offending row otherwise.
  static InteriorPoint make(const LinearInequalitySet& set, const Vector& x,
                            Vector point);
  /// Same check for slacks that were computed elsewhere.
  static InteriorPoint from_slack(Vector point, Vector slack);
};

/// Gauge value together with the row attaining the maximum.
struct GaugeValue {
  double value = 0.0;
  Index row = 0;
};

/// The set translated so that `center` sits at the origin:
/// v is a member iff center.point + v lies in the base set at the bound
/// context. The base set is shared, not copied.
class ShiftedSet {
 public:
  ShiftedSet(std::shared_ptr<const LinearInequalitySet> base, Vector context,
             InteriorPoint center);
  /// Builds the center from `point` with InteriorPoint::make.
  static ShiftedSet around(std::shared_ptr<const LinearInequalitySet> base,
                           Vector context, Vector point);

  const LinearInequalitySet& base() const noexcept { return *base_; }
  const std::shared_ptr<const LinearInequalitySet>& base_ptr() const noexcept {
    return base_;
  }
  const Vector& context() const noexcept { return context_; }
  const Vector& center() const noexcept { return center_.point; }
  const Vector& slack() const noexcept { return center_.slack; }
  Index dim() const noexcept { return base_->dim(); }

 private:
  std::shared_ptr<const LinearInequalitySet> base_;
  Vector context_;
  InteriorPoint center_;
};

/// max_r (A_r v) / slack_r, the gauge of the shifted set. The value is not
/// clamped and is negative when every row numerator is negative. Ties go to
/// the lowest row index.
GaugeValue shifted_set_gauge_argmax(const ShiftedSet& s, const Vector& v);

inline double shifted_set_gauge(const ShiftedSet& s, const Vector& v) {
  return shifted_set_gauge_argmax(s, v).value;
}

/// Distance t* along `direction` from the center to the boundary, found by
/// bisection on membership alone. Returns nullopt when the ray stays inside
/// the set up to `cap`.
std::optional<double> gauge_boundary_oracle(const ShiftedSet& s,
                                            const Vector& direction,
                                            double cap = 1e12);

}  // namespace looplc
