#include "looplc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "looplc/errors.hpp"

namespace looplc {

namespace {

enum class Tie { low, high };

// Output of unit i at marginal price lambda.
double unit_output(const DispatchCase& c, Index i, double lambda, Tie tie) {
  const double lo = c.u_min[i];
  const double hi = c.u_max[i];
  const double c2 = c.cost_quadratic[i];
  const double c1 = c.cost_linear[i];
  if (c2 > 0.0) return std::clamp((lambda - c1) / (2.0 * c2), lo, hi);
  if (lambda < c1) return lo;
  if (lambda > c1) return hi;
  return tie == Tie::low ? lo : hi;
}

Vector outputs(const DispatchCase& c, double lambda, Tie tie) {
  Vector u(c.generators());
  for (Index i = 0; i < u.size(); ++i) u[i] = unit_output(c, i, lambda, tie);
  return u;
}

}  // namespace

Vector solve_dispatch_exact(const DispatchCase& c, const Vector& x, double tol) {
  c.validate();
  if (!(tol > 0.0)) throw DomainError("dispatch tolerance must be positive");
  const double demand = c.net_demand(x);
  const double cap_lo = c.u_min.sum();
  const double cap_hi = c.u_max.sum();
  if (demand < cap_lo - tol || demand > cap_hi + tol) {
    throw InfeasibleDemand("demand " + std::to_string(demand) + " outside [" +
                           std::to_string(cap_lo) + ", " + std::to_string(cap_hi) + "]");
  }

  const Vector mc_lo = 2.0 * c.cost_quadratic.cwiseProduct(c.u_min) + c.cost_linear;
  const Vector mc_hi = 2.0 * c.cost_quadratic.cwiseProduct(c.u_max) + c.cost_linear;
  double lo = mc_lo.minCoeff() - 1.0;
  double hi = mc_hi.maxCoeff() + 1.0;

  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (outputs(c, mid, Tie::low).sum() < demand ? lo : hi) = mid;
  }

  // Every unit moves monotonically between the two bracket ends; hand the
  // remaining demand to price-setting linear units first, in merit order,
  // then share it across quadratic units in proportion to their movement.
  Vector u = outputs(c, lo, Tie::low);
  const Vector u_hi = outputs(c, hi, Tie::high);
  double residual = demand - u.sum();

  std::vector<Index> flat;
  for (Index i = 0; i < u.size(); ++i) {
    if (c.cost_quadratic[i] == 0.0 && u_hi[i] > u[i]) flat.push_back(i);
  }
  std::stable_sort(flat.begin(), flat.end(), [&](Index a, Index b) {
    return c.cost_linear[a] < c.cost_linear[b];
  });
  for (const Index i : flat) {
    if (residual <= 0.0) break;
    const double take = std::min(u_hi[i] - u[i], residual);
    u[i] += take;
    residual -= take;
  }
  double movable = 0.0;
  for (Index i = 0; i < u.size(); ++i) {
    if (c.cost_quadratic[i] > 0.0) movable += u_hi[i] - u[i];
  }
  if (movable > 0.0 && residual != 0.0) {
    const double share = std::clamp(residual / movable, -1.0, 1.0);
    for (Index i = 0; i < u.size(); ++i) {
      if (c.cost_quadratic[i] > 0.0) u[i] += share * (u_hi[i] - u[i]);
    }
  }

  const double imbalance = std::abs(u.sum() - demand);
  if (!(imbalance <= tol)) {
    throw ConvergenceError("lambda bisection left a balance residual of " +
                           std::to_string(imbalance));
  }
  return u;
}

KktReport kkt_certificate(const DispatchCase& c, const Vector& x, const Vector& u) {
  if (u.size() != c.generators()) throw DimensionError("generation vector size mismatch");
  constexpr double kAtBound = 1e-10;
  const Vector mc = 2.0 * c.cost_quadratic.cwiseProduct(u) + c.cost_linear;

  double free_max = -std::numeric_limits<double>::infinity();
  double free_min = std::numeric_limits<double>::infinity();
  double high_max = -std::numeric_limits<double>::infinity();  // units at u_max
  double low_min = std::numeric_limits<double>::infinity();    // units at u_min
  for (Index i = 0; i < u.size(); ++i) {
    if (c.u_max[i] - c.u_min[i] <= kAtBound) continue;
    if (u[i] <= c.u_min[i] + kAtBound) {
      low_min = std::min(low_min, mc[i]);
    } else if (u[i] >= c.u_max[i] - kAtBound) {
      high_max = std::max(high_max, mc[i]);
    } else {
      free_max = std::max(free_max, mc[i]);
      free_min = std::min(free_min, mc[i]);
    }
  }

  KktReport r;
  if (free_min <= free_max) {
    r.lambda = 0.5 * (free_min + free_max);
  } else if (std::isfinite(high_max) && std::isfinite(low_min)) {
    r.lambda = 0.5 * (high_max + low_min);
  } else if (std::isfinite(high_max)) {
    r.lambda = high_max;
  } else if (std::isfinite(low_min)) {
    r.lambda = low_min;
  }
  double worst = 0.0;
  if (free_min <= free_max) {
    worst = std::max({worst, free_max - r.lambda, r.lambda - free_min});
  }
  if (std::isfinite(low_min)) worst = std::max(worst, r.lambda - low_min);
  if (std::isfinite(high_max)) worst = std::max(worst, high_max - r.lambda);
  r.stationarity = worst;
  r.balance = std::abs(u.sum() - c.net_demand(x));
  r.bounds = (u - c.u_max).cwiseMax(0.0).sum() + (c.u_min - u).cwiseMax(0.0).sum();
  return r;
}

Vector project_onto_reduced_set(const ReducedSet& rs, const Vector& x, const Vector& v, double tol,
                                int max_iterations) {
  const Partition& p = rs.partition;
  const Index n = p.independent();
  if (v.size() != n) throw DimensionError("projection input does not match the set");
  if (!(tol > 0.0)) throw DomainError("projection tolerance must be positive");

  const Vector rhs = rs.set->rhs(x);
  const double sum_lo = -rhs[rs.upper_sum_row()];
  const double sum_hi = rhs[rs.lower_sum_row()];
  Vector box_lo(n);
  Vector box_hi(n);
  for (Index k = 0; k < n; ++k) {
    box_hi[k] = rhs[rs.upper_box_row(k)];
    box_lo[k] = -rhs[rs.lower_box_row(k)];
  }
  if (sum_lo > sum_hi || (box_lo.array() > box_hi.array()).any() ||
      box_lo.sum() > sum_hi || box_hi.sum() < sum_lo) {
    throw GeometryError("reduced set is empty for these loads");
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  const auto residual = [&](const Vector& u) {
    const double s = u.sum();
    double r = std::max(sum_lo - s, s - sum_hi);
    r = std::max(r, (u - box_hi).maxCoeff());
    r = std::max(r, (box_lo - u).maxCoeff());
    return r;
  };

  Vector u = v;
  Vector p_lo = Vector::Zero(n);
  Vector p_hi = Vector::Zero(n);
  Vector p_box = Vector::Zero(n);
  Vector y(n);
  double change = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    // {1'u >= sum_lo}
    y = u + p_lo;
    double s = y.sum();
    Vector z = s < sum_lo ? Vector(y.array() + (sum_lo - s) * inv_n) : y;
    // A sweep can leave u in place while the corrections still move, so
    // both must settle before stopping.
    change = (y - z - p_lo).norm();
    p_lo = y - z;
    // {1'u <= sum_hi}
    y = z + p_hi;
    s = y.sum();
    z = s > sum_hi ? Vector(y.array() - (s - sum_hi) * inv_n) : y;
    change = std::max(change, (y - z - p_hi).norm());
    p_hi = y - z;
    // box
    y = z + p_box;
    z = y.cwiseMax(box_lo).cwiseMin(box_hi);
    change = std::max(change, (y - z - p_box).norm());
    p_box = y - z;

    change = std::max(change, (z - u).norm());
    u = std::move(z);
    if (change <= tol && residual(u) <= tol) return u;
  }
  throw ConvergenceError("Dykstra projection did not converge in " +
                         std::to_string(max_iterations) + " sweeps (last step " +
                         std::to_string(change) + ", residual " +
                         std::to_string(residual(u)) + ")");
}

std::optional<Vector> grid_search_oracle(const DispatchCase& c, const Vector& x,
                                         double step) {
  c.validate();
  const Index g = c.generators();
  if (g > 3) throw DomainError("grid search refuses more than three generators");
  if (!(step > 0.0)) throw DomainError("grid step must be positive");
  const double demand = c.net_demand(x);

  const auto axis = [&](Index i) {
    std::vector<double> pts;
    const double lo = c.u_min[i];
    const double hi = c.u_max[i];
    const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long k = 0; k <= count; ++k) pts.push_back(lo + static_cast<double>(k) * step);
    if (pts.back() < hi) pts.push_back(hi);
    return pts;
  };

  std::optional<Vector> best;
  double best_cost = std::numeric_limits<double>::infinity();
  const auto consider = [&](Vector u) {
    u[0] = demand - u.tail(g - 1).sum();
    if (u[0] < c.u_min[0] - 1e-12 || u[0] > c.u_max[0] + 1e-12) return;
    const double f = c.cost(u);
    if (f < best_cost) {
      best_cost = f;
      best = std::move(u);
    }
  };

  const std::vector<double> a1 = axis(1);
  if (g == 2) {
    for (const double u1 : a1) {
      Vector u(2);
      u[1] = u1;
      consider(std::move(u));
    }
  } else {
    const std::vector<double> a2 = axis(2);
    for (const double u1 : a1) {
      for (const double u2 : a2) {
        Vector u(3);
        u[1] = u1;
        u[2] = u2;
        consider(std::move(u));
      }
    }
  }
  return best;
}

}  // namespace looplc
