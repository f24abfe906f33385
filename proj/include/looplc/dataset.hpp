#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "looplc/dispatch.hpp"

namespace looplc {

inline constexpr const char* kDatasetSchema = "looplc.dataset/1";

struct Sample {
  Vector x;       // nodal loads, per unit
  Vector u_star;  // optimal dispatch of the variable units
};

/// Labeled load scenarios for one dispatch case with a train/test split.
struct Dataset {
  std::string case_name;
  DispatchCase dispatch;
  std::uint64_t seed = 0;
  double fluctuation = 0.0;
  double label_tol = 1e-9;
  std::vector<Sample> samples;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Draws `count` load vectors, each node uniform on [(1-f) PD, (1+f) PD].
/// Vectors whose net demand is not strictly inside the capacity range are
/// redrawn, up to 100 * count draws in total.
std::vector<Vector> sample_loads(const DispatchCase& c, std::size_t count,
                                 double fluctuation, std::uint64_t seed);

/// Labels every load vector with the exact dispatch and splits the indices
/// after a seeded shuffle; the first round(train_fraction * N) go to train.
Dataset build_dataset(std::string case_name, const DispatchCase& c,
                      const std::vector<Vector>& loads, double train_fraction,
                      std::uint64_t seed, double label_tol = 1e-9);

nlohmann::json dispatch_to_json(const DispatchCase& c);
DispatchCase dispatch_from_json(const nlohmann::json& j);

nlohmann::json dataset_to_json(const Dataset& ds);
Dataset dataset_from_json(const nlohmann::json& j);

/// Canonical text form (2-space indented JSON plus trailing newline).
std::string serialize_dataset(const Dataset& ds);
Dataset parse_dataset(const std::string& text);

void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

/// 64-bit FNV-1a of `bytes` as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& bytes);

/// Hash of the serialized dataset; ties checkpoints and reports to their data.
std::string dataset_hash(const Dataset& ds);

/// Reads a whole file; throws looplc::Error naming the path on failure.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace looplc
