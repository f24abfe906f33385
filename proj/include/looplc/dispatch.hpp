#pragma once

#include <memory>
#include <vector>

#include "looplc/linalg.hpp"
#include "looplc/polytope.hpp"

namespace looplc {

/// One instance of the economic dispatch problem
///
///   min  sum_i c2_i u_i^2 + c1_i u_i
///   s.t. 1'u = 1'x - fixed_output,   u_min <= u <= u_max.
///
/// All quantities are per unit. `fixed_output` is the total output of
/// must-run units whose limits coincide; they are not decision variables.
struct DispatchCase {
  Vector u_min;
  Vector u_max;
  Vector cost_quadratic;
  Vector cost_linear;
  Vector loads_nominal;
  double fixed_output = 0.0;

  Index generators() const noexcept { return u_min.size(); }
  Index nodes() const noexcept { return loads_nominal.size(); }

  /// Demand the dispatchable units must cover for loads `x`.
  double net_demand(const Vector& x) const;
  /// Cost of a full generation vector.
  double cost(const Vector& u) const;

  /// Throws DomainError or DimensionError when an invariant is broken.
  void validate() const;
};

/// Split of the generators into one dependent unit and the independent rest.
struct Partition {
  Index dep_index = 0;
  std::vector<Index> ind_indices;

  Index generators() const noexcept {
    return static_cast<Index>(ind_indices.size()) + 1;
  }
  Index independent() const noexcept {
    return static_cast<Index>(ind_indices.size());
  }

  /// Dependent unit `dep`, independents in ascending order.
  static Partition with_dependent(Index generators, Index dep = 0);
};

/// The polytope over independent outputs left after equality completion.
///
/// Rows come in four blocks, m = 2g in total:
///   (i)   -1'u_ind <= -1'x + F + u_max[dep]
///   (ii)   I u_ind <=  u_max[ind]
///   (iii)  1'u_ind <=  1'x - F - u_min[dep]
///   (iv)  -I u_ind <= -u_min[ind]
/// where F is the fixed output of the case.
struct ReducedSet {
  std::shared_ptr<const LinearInequalitySet> set;
  Partition partition;

  Index upper_sum_row() const noexcept { return 0; }
  Index upper_box_row(Index k) const noexcept { return 1 + k; }
  Index lower_sum_row() const noexcept { return 1 + partition.independent(); }
  Index lower_box_row(Index k) const noexcept {
    return 2 + partition.independent() + k;
  }
};

/// Lowest index among the units with the largest u_max - u_min. Using it as
/// the dependent unit gives the widest reduced set around the anchor.
Index widest_unit(const DispatchCase& c);

/// Proportional fill u_min + t (u_max - u_min) that meets the net demand.
/// Throws InfeasibleDemand unless sum(u_min) < demand < sum(u_max).
Vector intuitive_solution(const DispatchCase& c, const Vector& x);

/// Places `u_ind` per the partition and sets the dependent unit to
/// net_demand(x) - 1'u_ind.
Vector equality_completion(const DispatchCase& c, const Partition& p, const Vector& x,
                           const Vector& u_ind);

/// Pulls a cotangent on the full vector back to the independent outputs.
Vector completion_backward(const Partition& p, const Vector& grad_full);

/// Independent components of a full generation vector.
Vector independent_part(const Partition& p, const Vector& u);

ReducedSet build_reduced_set(const DispatchCase& c, const Partition& p);

/// Interior point of the reduced set built from the intuitive solution.
/// Slacks are formed from the block structure in O(g).
InteriorPoint reduced_interior_point(const DispatchCase& c, const ReducedSet& rs,
                                     const Vector& x);

/// Interior point moved a fraction `shift` of the way from the intuitive
/// solution to the boundary along +(1, ..., 1) (shift > 0) or -(1, ..., 1)
/// (shift < 0). Requires |shift| < 1; shift 0 is reduced_interior_point.
InteriorPoint perturbed_interior_point(const DispatchCase& c, const ReducedSet& rs,
                                       const Vector& x, double shift);

/// Shifted reduced set centered at perturbed_interior_point(c, rs, x, shift).
ShiftedSet shifted_reduced_set(const DispatchCase& c, const ReducedSet& rs,
                               const Vector& x, double center_shift = 0.0);

/// (1/N) sum ||prediction - label||^2.
double optimality_gap(const std::vector<Vector>& predictions,
                      const std::vector<Vector>& labels);

/// Positive bound violations plus the absolute balance residual of a full
/// generation vector.
double feasibility_gap(const DispatchCase& c, const Vector& x, const Vector& u);

}  // namespace looplc
