#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "looplc/mlp.hpp"
#include "looplc/training.hpp"

namespace looplc {

inline constexpr const char* kCheckpointSchema = "looplc.checkpoint/1";

/// A trained network plus what is needed to rebuild its pipeline.
struct Checkpoint {
  MlpModel model;
  PipelineSpec spec;
  TrainConfig config;
  Index dependent_unit = 0;
  std::string case_name;
  std::string dataset_hash;
  double final_loss = 0.0;
};

nlohmann::json checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(const std::string& text);

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

/// "epoch,loss" CSV with one row per epoch starting at 1.
std::string trace_to_csv(const std::vector<double>& trace);

}  // namespace looplc
