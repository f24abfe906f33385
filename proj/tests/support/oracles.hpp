#pragma once

// Independent reference computations used only by the tests. None of these
// call into the code they are used to check.

#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "looplc/dispatch.hpp"
#include "looplc/linalg.hpp"
#include "looplc/polytope.hpp"

namespace testing_support {

using looplc::Index;
using looplc::Matrix;
using looplc::Vector;

/// Central differences of a scalar function.
Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& at,
                   double h = 1e-6);

/// Central-difference Jacobian of a vector function, one column per input.
Matrix fd_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& at,
                   double h = 1e-6);

/// |a - b| / max(1, |a|, |b|).
double rel_err(double a, double b);
double rel_err(const Vector& a, const Vector& b);

/// Exact Euclidean projection onto {lo <= u <= hi, s_lo <= 1'u <= s_hi}.
/// The minimizer is clamp(v - mu, lo, hi) for a scalar multiplier mu, found
/// by bisection on the monotone sum.
Vector slab_box_projection(const Vector& v, const Vector& lo, const Vector& hi, double s_lo,
                           double s_hi);

/// Same projection read off a reduced set's right-hand side.
Vector reduced_projection_reference(const looplc::ReducedSet& rs, const Vector& x,
                                    const Vector& v);

/// Nearest member of the set among the points of a 2-D grid of spacing `step`
/// over the box [lo, hi].
std::optional<Vector> grid_projection_2d(const looplc::LinearInequalitySet& set,
                                         const Vector& x, const Vector& v, const Vector& lo,
                                         const Vector& hi, double step);

/// Random bounded polytope around a known interior point: box rows plus
/// `extra_rows` random halfspaces, with a context of dimension `context_dim`.
struct RandomSet {
  std::shared_ptr<const looplc::LinearInequalitySet> set;
  Vector context;
  Vector center;

  looplc::ShiftedSet shifted() const;
};
RandomSet random_set(std::mt19937_64& rng, Index dim, Index extra_rows, Index context_dim);

/// Random valid dispatch case with `g` units and `d` load nodes whose nominal
/// demand lies strictly inside the capacity range.
looplc::DispatchCase random_dispatch_case(std::mt19937_64& rng, Index g, Index d,
                                          double c2_lo = 0.5, double c2_hi = 1.5);

/// Random load vector for a case with net demand strictly inside capacity.
Vector random_feasible_loads(std::mt19937_64& rng, const looplc::DispatchCase& c);

Vector random_vector(std::mt19937_64& rng, Index n, double lo, double hi);

/// Validates `doc` against a JSON-schema subset: type, required, properties,
/// additionalProperties (false), items, enum, const, minimum, minItems,
/// minLength, local $ref. Returns the first failure as "path: reason", or nullopt.
std::optional<std::string> schema_violation(const nlohmann::json& schema,
                                            const nlohmann::json& doc);

/// Loads a schema file from the repository's docs/schemas directory.
nlohmann::json load_schema(const std::string& file_name);

/// Fresh temporary directory under the system temp path.
std::string temp_dir(const std::string& tag);

/// Absolute path of a file in the repository's data directory.
std::string data_path(const std::string& file_name);

}  // namespace testing_support
