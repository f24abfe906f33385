#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "looplc/checkpoint.hpp"
#include "looplc/dataset.hpp"

namespace looplc {

inline constexpr const char* kReportSchema = "looplc.report/1";

struct EvalRow {
  std::string method;
  double optimality_gap = 0.0;
  double feasibility_gap = 0.0;  // mean over the test split
  double time_ms = 0.0;          // mean over instances of the per-instance median
};

struct EvalReport {
  std::string case_name;
  std::string dataset_hash;
  std::uint64_t seed = 0;
  std::size_t test_samples = 0;
  int timing_reps = 0;
  int timing_warmup = 0;
  std::vector<EvalRow> rows;

  const EvalRow* find(const std::string& method) const;
};

struct EvalOptions {
  int reps = 100;
  int warmup = 10;
  bool parallel = false;
  bool include_oracle = true;
  bool include_projection = true;
  double projection_tol = 1e-8;
};

/// Row names used for the two reference methods.
inline constexpr const char* kOracleRow = "exact-oracle";
inline constexpr const char* kProjectionRow = "projection";

/// Evaluates every checkpoint on the test split, plus the exact oracle and
/// the projection baseline (raw output of the lowest-rho penalty model
/// followed by Euclidean projection). Throws Error when a checkpoint was
/// trained on a different dataset.
EvalReport evaluate(const Dataset& ds, const std::vector<Checkpoint>& models,
                    const EvalOptions& options = {});

/// Label used for a checkpoint's row, e.g. "penalty (rho=1e-06)".
std::string row_label(const Checkpoint& ckpt);

nlohmann::json report_to_json(const EvalReport& r);

/// Metric fields only, without timings; identical across reruns.
nlohmann::json report_metrics_json(const EvalReport& r);

/// Markdown table with columns Method, Optimality gap, Feasibility gap,
/// Search time (ms).
std::string report_markdown(const EvalReport& r);

}  // namespace looplc
