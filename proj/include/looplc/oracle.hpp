#pragma once

#include <optional>

#include "looplc/dispatch.hpp"
#include "looplc/linalg.hpp"

namespace looplc {

/// Exact economic dispatch by bisection on the system marginal cost lambda.
/// Units with c2 > 0 follow clamp((lambda - c1) / 2c2, u_min, u_max); units
/// with c2 = 0 jump between their limits at lambda = c1 and absorb the
/// residual in merit order when lambda settles on their price.
Vector solve_dispatch_exact(const DispatchCase& c, const Vector& x, double tol = 1e-9);

/// Residual of the optimality conditions at `u` for the best single lambda:
/// the largest violation among |mc_i - lambda| (units strictly between
/// limits), lambda - mc_i (units at u_min) and mc_i - lambda (units at
/// u_max), with mc_i = 2 c2_i u_i + c1_i.
struct KktReport {
  double lambda = 0.0;
  double stationarity = 0.0;
  double balance = 0.0;
  double bounds = 0.0;

  bool passes(double tol) const {
    return stationarity <= 10.0 * tol && balance <= 10.0 * tol && bounds <= 10.0 * tol;
  }
};

KktReport kkt_certificate(const DispatchCase& c, const Vector& x, const Vector& u);

/// Euclidean projection onto the reduced set by Dykstra's alternating
/// projections over the two sum halfspaces and the box. Throws
/// ConvergenceError when `max_iterations` sweeps do not settle.
Vector project_onto_reduced_set(const ReducedSet& rs, const Vector& x, const Vector& v, double tol = 1e-8,
                                int max_iterations = 10000);

/// Brute-force minimizer over a grid of the independent outputs with the
/// dependent unit fixed by the balance. Only for up to three generators.
/// Returns nullopt when no grid point is feasible.
std::optional<Vector> grid_search_oracle(const DispatchCase& c, const Vector& x,
                                         double step);

}  // namespace looplc
