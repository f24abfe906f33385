#include "looplc/dispatch.hpp"

#include <cmath>
#include <string>

#include "looplc/errors.hpp"

namespace looplc {

double DispatchCase::net_demand(const Vector& x) const {
  if (x.size() != nodes()) {
    throw DimensionError("load vector has " + std::to_string(x.size()) +
                         " entries, case has " + std::to_string(nodes()) + " nodes");
  }
  return x.sum() - fixed_output;
}

double DispatchCase::cost(const Vector& u) const {
  if (u.size() != generators()) throw DimensionError("generation vector size mismatch");
  return (cost_quadratic.array() * u.array().square() + cost_linear.array() * u.array())
      .sum();
}

void DispatchCase::validate() const {
  const Index g = generators();
  if (g < 2) throw DomainError("dispatch case needs at least two generators");
  if (u_max.size() != g || cost_quadratic.size() != g || cost_linear.size() != g) {
    throw DimensionError("generator vectors of a dispatch case differ in length");
  }
  for (Index i = 0; i < g; ++i) {
    if (!(u_min[i] <= u_max[i])) {
      throw DomainError("generator " + std::to_string(i) + " has u_min > u_max");
    }
    if (!(cost_quadratic[i] >= 0.0)) {
      throw DomainError("generator " + std::to_string(i) +
                        " has a negative quadratic cost (non-convex)");
    }
  }
  if (!std::isfinite(fixed_output)) throw DomainError("fixed output is not finite");
}

Partition Partition::with_dependent(Index generators, Index dep) {
  if (generators < 2) throw DomainError("partition needs at least two generators");
  if (dep < 0 || dep >= generators) throw DomainError("dependent index out of range");
  Partition p;
  p.dep_index = dep;
  p.ind_indices.reserve(static_cast<std::size_t>(generators - 1));
  for (Index i = 0; i < generators; ++i) {
    if (i != dep) p.ind_indices.push_back(i);
  }
  return p;
}

Index widest_unit(const DispatchCase& c) {
  Index best = 0;
  (c.u_max - c.u_min).maxCoeff(&best);
  return best;
}

Vector intuitive_solution(const DispatchCase& c, const Vector& x) {
  const double demand = c.net_demand(x);
  const double lo = c.u_min.sum();
  const double hi = c.u_max.sum();
  if (!(hi > lo)) throw DomainError("degenerate capacity: sum(u_max) == sum(u_min)");
  if (!(demand > lo && demand < hi)) {
    throw InfeasibleDemand("demand " + std::to_string(demand) + " outside (" +
                           std::to_string(lo) + ", " + std::to_string(hi) + ")");
  }
  const double t = (demand - lo) / (hi - lo);
  return c.u_min + t * (c.u_max - c.u_min);
}

Vector equality_completion(const DispatchCase& c, const Partition& p, const Vector& x,
                           const Vector& u_ind) {
  if (u_ind.size() != p.independent() || p.generators() != c.generators()) {
    throw DimensionError("independent vector does not match the partition");
  }
  Vector u(p.generators());
  for (Index k = 0; k < p.independent(); ++k) u[p.ind_indices[k]] = u_ind[k];
  u[p.dep_index] = c.net_demand(x) - u_ind.sum();
  return u;
}

Vector completion_backward(const Partition& p, const Vector& grad_full) {
  if (grad_full.size() != p.generators()) {
    throw DimensionError("cotangent does not match the partition");
  }
  const double dep = grad_full[p.dep_index];
  Vector g(p.independent());
  for (Index k = 0; k < p.independent(); ++k) g[k] = grad_full[p.ind_indices[k]] - dep;
  return g;
}

Vector independent_part(const Partition& p, const Vector& u) {
  if (u.size() != p.generators()) throw DimensionError("full vector size mismatch");
  Vector out(p.independent());
  for (Index k = 0; k < p.independent(); ++k) out[k] = u[p.ind_indices[k]];
  return out;
}

ReducedSet build_reduced_set(const DispatchCase& c, const Partition& p) {
  c.validate();
  if (p.generators() != c.generators()) {
    throw DimensionError("partition does not match the case");
  }
  const Index n = p.independent();
  const Index m = 2 * (n + 1);
  const Index d = c.nodes();
  const Index dep = p.dep_index;

  Matrix a = Matrix::Zero(m, n);
  Matrix b_mat = Matrix::Zero(m, d);
  Vector b_vec(m);

  ReducedSet rs;
  rs.partition = p;

  a.row(rs.upper_sum_row()).setConstant(-1.0);
  b_mat.row(rs.upper_sum_row()).setConstant(-1.0);
  b_vec[rs.upper_sum_row()] = c.u_max[dep] + c.fixed_output;

  a.row(rs.lower_sum_row()).setConstant(1.0);
  b_mat.row(rs.lower_sum_row()).setConstant(1.0);
  b_vec[rs.lower_sum_row()] = -c.u_min[dep] - c.fixed_output;

  for (Index k = 0; k < n; ++k) {
    const Index gen = p.ind_indices[k];
    a(rs.upper_box_row(k), k) = 1.0;
    b_vec[rs.upper_box_row(k)] = c.u_max[gen];
    a(rs.lower_box_row(k), k) = -1.0;
    b_vec[rs.lower_box_row(k)] = -c.u_min[gen];
  }

  rs.set = std::make_shared<const LinearInequalitySet>(std::move(a), std::move(b_mat),
                                                       std::move(b_vec));
  return rs;
}

InteriorPoint reduced_interior_point(const DispatchCase& c, const ReducedSet& rs,
                                     const Vector& x) {
  const Partition& p = rs.partition;
  const Vector u0 = intuitive_solution(c, x);
  const double demand = c.net_demand(x);
  Vector point = independent_part(p, u0);
  const double ind_sum = point.sum();

  Vector slack(rs.set->rows());
  slack[rs.upper_sum_row()] = c.u_max[p.dep_index] - (demand - ind_sum);
  slack[rs.lower_sum_row()] = (demand - ind_sum) - c.u_min[p.dep_index];
  for (Index k = 0; k < p.independent(); ++k) {
    const Index gen = p.ind_indices[k];
    slack[rs.upper_box_row(k)] = c.u_max[gen] - point[k];
    slack[rs.lower_box_row(k)] = point[k] - c.u_min[gen];
  }
  return InteriorPoint::from_slack(std::move(point), std::move(slack));
}

InteriorPoint perturbed_interior_point(const DispatchCase& c, const ReducedSet& rs,
                                       const Vector& x, double shift) {
  if (!(std::abs(shift) < 1.0)) throw DomainError("center shift must lie in (-1, 1)");
  InteriorPoint base = reduced_interior_point(c, rs, x);
  if (shift == 0.0) return base;
  const Vector d = Vector::Constant(base.point.size(), shift > 0.0 ? 1.0 : -1.0);
  const Vector ad = rs.set->a() * d;
  // distance to the boundary along d is 1 / max_r (A_r d / slack_r)
  const double psi = (ad.array() / base.slack.array()).maxCoeff();
  const double step = std::abs(shift) / psi;
  return InteriorPoint::from_slack(base.point + step * d, base.slack - step * ad);
}

ShiftedSet shifted_reduced_set(const DispatchCase& c, const ReducedSet& rs,
                               const Vector& x, double center_shift) {
  return ShiftedSet(rs.set, x, perturbed_interior_point(c, rs, x, center_shift));
}

double optimality_gap(const std::vector<Vector>& predictions,
                      const std::vector<Vector>& labels) {
  if (predictions.empty()) throw DomainError("optimality gap of an empty batch");
  if (predictions.size() != labels.size()) {
    throw DimensionError("prediction and label counts differ");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i].size() != labels[i].size()) {
      throw DimensionError("prediction " + std::to_string(i) + " has the wrong size");
    }
    total += (predictions[i] - labels[i]).squaredNorm();
  }
  return total / static_cast<double>(predictions.size());
}

double feasibility_gap(const DispatchCase& c, const Vector& x, const Vector& u) {
  if (u.size() != c.generators()) throw DimensionError("generation vector size mismatch");
  const double upper = (u - c.u_max).cwiseMax(0.0).sum();
  const double lower = (c.u_min - u).cwiseMax(0.0).sum();
  return upper + lower + std::abs(u.sum() - c.net_demand(x));
}

}  // namespace looplc
