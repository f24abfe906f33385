#include <doctest.h>

#include <cmath>
#include <random>

#include "looplc/errors.hpp"
#include "looplc/oracle.hpp"
#include "support/oracles.hpp"

using namespace looplc;
using testing_support::grid_projection_2d;
using testing_support::random_dispatch_case;
using testing_support::random_feasible_loads;
using testing_support::random_vector;
using testing_support::reduced_projection_reference;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

DispatchCase make_case(Vector lo, Vector hi, Vector c2, Vector c1) {
  DispatchCase c;
  c.u_min = std::move(lo);
  c.u_max = std::move(hi);
  c.cost_quadratic = std::move(c2);
  c.cost_linear = std::move(c1);
  c.loads_nominal = Vector::Zero(1);
  return c;
}

}  // namespace

TEST_CASE("exact dispatch examples") {
  const DispatchCase sym = make_case(vec({0, 0}), vec({1, 1}), vec({1, 1}), vec({0, 0}));
  const Vector u = solve_dispatch_exact(sym, vec({1.0}));
  CHECK(u[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(u[1] == doctest::Approx(0.5).epsilon(1e-9));

  const DispatchCase lin = make_case(vec({0, 0}), vec({1, 1}), vec({0, 0}), vec({1, 2}));
  const Vector m = solve_dispatch_exact(lin, vec({1.5}));
  CHECK(m[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(m[1] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("exact dispatch with mixed linear and quadratic units") {
  // the linear unit at price 1 fills once lambda reaches 1
  const DispatchCase c = make_case(vec({0, 0, 0}), vec({1, 1, 2}), vec({1, 0, 0.5}), vec({0, 1, 0}));
  for (const double d : {0.3, 1.0, 1.5, 2.4, 3.2, 3.9}) {
    CAPTURE(d);
    const Vector u = solve_dispatch_exact(c, vec({d}), 1e-10);
    CHECK(std::abs(u.sum() - d) <= 1e-9);
    const KktReport k = kkt_certificate(c, vec({d}), u);
    CHECK(k.passes(1e-9));
    const auto g = grid_search_oracle(c, vec({d}), 1e-3);
    REQUIRE(g.has_value());
    CHECK(c.cost(u) <= c.cost(*g) + 1e-9);
  }
}

TEST_CASE("exact dispatch errors") {
  const DispatchCase c = make_case(vec({0, 0}), vec({1, 1}), vec({1, 1}), vec({0, 0}));
  CHECK_THROWS_AS(solve_dispatch_exact(c, vec({2.5})), InfeasibleDemand);
  CHECK_THROWS_AS(solve_dispatch_exact(c, vec({-0.1})), InfeasibleDemand);
  CHECK_THROWS_AS(solve_dispatch_exact(c, vec({1.0}), 0.0), DomainError);
  DispatchCase bad = c;
  bad.cost_quadratic[1] = -0.5;
  CHECK_THROWS_AS(solve_dispatch_exact(bad, vec({1.0})), DomainError);
}

TEST_CASE("exact dispatch agrees with grid search") {
  std::mt19937_64 rng(51);
  for (int k = 0; k < 50; ++k) {
    const Index g = 2 + k % 2;
    const DispatchCase c = random_dispatch_case(rng, g, 2);
    const Vector x = random_feasible_loads(rng, c);
    const Vector u = solve_dispatch_exact(c, x, 1e-10);
    const auto grid = grid_search_oracle(c, x, 1e-3);
    REQUIRE(grid.has_value());
    CAPTURE(k);
    REQUIRE((u - *grid).cwiseAbs().maxCoeff() <= 2e-3);
    REQUIRE(kkt_certificate(c, x, u).passes(1e-8));
  }
}

TEST_CASE("labels on larger cases pass the KKT certificate") {
  std::mt19937_64 rng(52);
  for (int k = 0; k < 200; ++k) {
    DispatchCase c = random_dispatch_case(rng, 2 + k % 40, 3, 0.0, 1.0);
    if (k % 3 == 0) c.cost_quadratic[k % c.generators()] = 0.0;
    const Vector x = random_feasible_loads(rng, c);
    const Vector u = solve_dispatch_exact(c, x, 1e-9);
    REQUIRE(kkt_certificate(c, x, u).passes(1e-9));
    REQUIRE(feasibility_gap(c, x, u) <= 1e-8);
  }
}

TEST_CASE("KKT certificate detects a suboptimal dispatch") {
  const DispatchCase c = make_case(vec({0, 0}), vec({1, 1}), vec({1, 1}), vec({0, 0}));
  const KktReport k = kkt_certificate(c, vec({1.0}), vec({0.7, 0.3}));
  CHECK_FALSE(k.passes(1e-6));
  CHECK(k.stationarity > 0.1);
}

TEST_CASE("grid search oracle edge cases") {
  const DispatchCase pinned = make_case(vec({0.5, 0.2}), vec({0.5, 1.0}), vec({1, 1}), vec({0, 0}));
  const auto single = grid_search_oracle(pinned, vec({1.0}), 1e-3);
  REQUIRE(single.has_value());
  CHECK((*single)[0] == doctest::Approx(0.5));
  CHECK((*single)[1] == doctest::Approx(0.5));

  const DispatchCase c = make_case(vec({0, 0}), vec({1, 1}), vec({1, 1}), vec({0, 0}));
  CHECK_FALSE(grid_search_oracle(c, vec({5.0}), 1e-2).has_value());

  const DispatchCase four =
      make_case(Vector::Zero(4), Vector::Ones(4), Vector::Ones(4), Vector::Zero(4));
  CHECK_THROWS_AS(grid_search_oracle(four, vec({1.0}), 1e-2), DomainError);
}

TEST_CASE("projection examples") {
  // 1-D reduced set u_2 in [0.5, 1.5]
  const DispatchCase c = make_case(vec({0, 0}), vec({1, 2}), vec({1, 1}), vec({0, 0}));
  const ReducedSet rs = build_reduced_set(c, Partition::with_dependent(2, 0));
  const Vector x = vec({1.5});
  CHECK(project_onto_reduced_set(rs, x, vec({2.0}))[0] == doctest::Approx(1.5).epsilon(1e-8));
  CHECK(project_onto_reduced_set(rs, x, vec({-3.0}))[0] == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(std::abs(project_onto_reduced_set(rs, x, vec({0.9}))[0] - 0.9) <= 1e-8);
  CHECK_THROWS_AS(project_onto_reduced_set(rs, x, vec({0.9, 1.0})), DimensionError);
}

TEST_CASE("projection leaves members in place") {
  std::mt19937_64 rng(53);
  for (int k = 0; k < 50; ++k) {
    const DispatchCase c = random_dispatch_case(rng, 3 + k % 10, 2);
    const ReducedSet rs = build_reduced_set(c, Partition::with_dependent(c.generators(), 0));
    const Vector x = random_feasible_loads(rng, c);
    const Vector inside = independent_part(rs.partition, intuitive_solution(c, x));
    REQUIRE((project_onto_reduced_set(rs, x, inside) - inside).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("projection agrees with the exact slab-box projection") {
  std::mt19937_64 rng(54);
  for (int k = 0; k < 100; ++k) {
    const DispatchCase c = random_dispatch_case(rng, 2 + k % 30, 3);
    const ReducedSet rs = build_reduced_set(c, Partition::with_dependent(c.generators(), k % 2));
    const Vector x = random_feasible_loads(rng, c);
    const Vector center = independent_part(rs.partition, intuitive_solution(c, x));
    const Vector v = center + random_vector(rng, center.size(), -3.0, 3.0);
    const double tol = 1e-8;
    const Vector p = project_onto_reduced_set(rs, x, v, tol);
    const Vector ref = reduced_projection_reference(rs, x, v);
    CAPTURE(k);
    REQUIRE(contains(*rs.set, x, p, 1e-8));
    REQUIRE((p - ref).norm() <= 10.0 * tol);
  }
}

TEST_CASE("projection agrees with a brute-force grid on three-unit cases") {
  std::mt19937_64 rng(55);
  for (int k = 0; k < 10; ++k) {
    const DispatchCase c = random_dispatch_case(rng, 3, 1);
    const ReducedSet rs = build_reduced_set(c, Partition::with_dependent(3, 0));
    const Vector x = random_feasible_loads(rng, c);
    const Vector v = random_vector(rng, 2, -1.0, 4.0);
    const Vector p = project_onto_reduced_set(rs, x, v);
    const Vector lo = independent_part(rs.partition, c.u_min);
    const Vector hi = independent_part(rs.partition, c.u_max);
    const auto grid = grid_projection_2d(*rs.set, x, v, lo, hi, 1e-3);
    REQUIRE(grid.has_value());
    REQUIRE((p - *grid).cwiseAbs().maxCoeff() <= 2e-3);
  }
}

TEST_CASE("projection satisfies the variational inequality") {
  std::mt19937_64 rng(56);
  for (int k = 0; k < 20; ++k) {
    const DispatchCase c = random_dispatch_case(rng, 3 + k % 8, 2);
    const ReducedSet rs = build_reduced_set(c, Partition::with_dependent(c.generators(), 0));
    const Vector x = random_feasible_loads(rng, c);
    const Vector center = independent_part(rs.partition, intuitive_solution(c, x));
    const Vector v = center + random_vector(rng, center.size(), -3.0, 3.0);
    const double tol = 1e-8;
    const Vector p = project_onto_reduced_set(rs, x, v, tol);
    const Vector lo = independent_part(rs.partition, c.u_min);
    const Vector hi = independent_part(rs.partition, c.u_max);
    int tried = 0;
    while (tried < 100) {
      const Vector s = lo + (hi - lo).cwiseProduct(random_vector(rng, lo.size(), 0.0, 1.0));
      if (!contains(*rs.set, x, s, 0.0)) {
        // pull toward the center until inside
        const Vector t = center + 0.5 * (s - center);
        if (!contains(*rs.set, x, t, 0.0)) continue;
        REQUIRE((v - p).dot(t - p) <= tol);
      } else {
        REQUIRE((v - p).dot(s - p) <= tol);
      }
      ++tried;
    }
  }
}

TEST_CASE("projection reports non-convergence") {
  std::mt19937_64 rng(57);
  const DispatchCase c = random_dispatch_case(rng, 12, 2);
  const ReducedSet rs = build_reduced_set(c, Partition::with_dependent(12, 0));
  const Vector x = random_feasible_loads(rng, c);
  const Vector v = Vector::Constant(11, 50.0);
  CHECK_THROWS_AS(project_onto_reduced_set(rs, x, v, 1e-8, 1), ConvergenceError);
}
