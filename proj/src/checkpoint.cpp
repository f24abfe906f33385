#include "looplc/checkpoint.hpp"

#include <cmath>
#include <cstdio>

#include "looplc/dataset.hpp"
#include "looplc/errors.hpp"

namespace looplc {

namespace {

using nlohmann::json;

template <typename M>
json matrix_json(const M& m) {
  json data = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from(const json& j, Index rows, Index cols, const char* what) {
  if (j.at("rows").get<Index>() != rows || j.at("cols").get<Index>() != cols) {
    throw DimensionError(std::string("checkpoint field '") + what + "' has the wrong shape");
  }
  const json& data = j.at("data");
  if (data.size() != static_cast<std::size_t>(rows * cols)) {
    throw DimensionError(std::string("checkpoint field '") + what + "' has the wrong length");
  }
  Matrix m(rows, cols);
  for (Index k = 0; k < rows * cols; ++k) m.data()[k] = data[static_cast<std::size_t>(k)].get<double>();
  return m;
}

Vector vector_from(const json& j, Index size, const char* what) {
  const Matrix m = matrix_from(j, size, 1, what);
  return Eigen::Map<const Vector>(m.data(), size);
}

std::string optimizer_name(OptimizerKind k) { return k == OptimizerKind::adam ? "adam" : "sgd"; }

OptimizerKind optimizer_from(const std::string& s) {
  if (s == "adam") return OptimizerKind::adam;
  if (s == "sgd") return OptimizerKind::sgd;
  throw Error("unknown optimizer '" + s + "' in checkpoint");
}

}  // namespace

json checkpoint_to_json(const Checkpoint& c) {
  const MlpModel& m = c.model;
  return json{
      {"schema", kCheckpointSchema},
      {"method", c.spec.name()},
      {"case_name", c.case_name},
      {"dataset_hash", c.dataset_hash},
      {"final_loss", c.final_loss},
      {"dependent_unit", c.dependent_unit},
      {"center_shift", c.spec.center_shift},
      {"train",
       json{{"seed", c.config.seed},
            {"epochs", c.config.epochs},
            {"learning_rate", c.config.learning_rate},
            {"batch_size", c.config.batch_size},
            {"penalty_rho", c.config.penalty_rho},
            {"optimizer", optimizer_name(c.config.optimizer)},
            {"normalize_inputs", c.config.normalize_inputs}}},
      {"network",
       json{{"input_dim", m.input_dim()},
            {"hidden_dim", m.hidden_dim()},
            {"output_dim", m.output_dim()},
            {"output_activation", to_string(m.output_activation)},
            {"input_offset", matrix_json(m.input_offset)},
            {"input_scale", matrix_json(m.input_scale)},
            {"w1", matrix_json(m.w1)},
            {"b1", matrix_json(m.b1)},
            {"w2", matrix_json(m.w2)},
            {"b2", matrix_json(m.b2)}}}};
}

Checkpoint checkpoint_from_json(const json& j) {
  try {
    if (j.at("schema").get<std::string>() != kCheckpointSchema) {
      throw Error("unsupported checkpoint schema '" + j.at("schema").get<std::string>() + "'");
    }
    Checkpoint c;
    c.spec = PipelineSpec::parse(j.at("method").get<std::string>());
    c.case_name = j.at("case_name").get<std::string>();
    c.dataset_hash = j.at("dataset_hash").get<std::string>();
    c.final_loss = j.at("final_loss").get<double>();
    c.dependent_unit = j.at("dependent_unit").get<Index>();
    c.spec.center_shift = j.at("center_shift").get<double>();
    if (!(std::abs(c.spec.center_shift) < 1.0)) {
      throw DomainError("checkpoint center_shift must lie in (-1, 1)");
    }
    if (c.spec.center_shift != 0.0 && !c.spec.use_gauge) {
      throw Error("checkpoint sets center_shift on a method without a gauge layer");
    }
    const json& t = j.at("train");
    c.config.seed = t.at("seed").get<std::uint64_t>();
    c.config.epochs = t.at("epochs").get<int>();
    c.config.learning_rate = t.at("learning_rate").get<double>();
    c.config.batch_size = t.at("batch_size").get<int>();
    c.config.penalty_rho = t.at("penalty_rho").get<double>();
    c.config.optimizer = optimizer_from(t.at("optimizer").get<std::string>());
    c.config.normalize_inputs = t.at("normalize_inputs").get<bool>();

    const json& n = j.at("network");
    const auto in = n.at("input_dim").get<Index>();
    const auto hid = n.at("hidden_dim").get<Index>();
    const auto out = n.at("output_dim").get<Index>();
    MlpModel& m = c.model;
    m.output_activation = parse_output_activation(n.at("output_activation").get<std::string>());
    m.input_offset = vector_from(n.at("input_offset"), in, "input_offset");
    m.input_scale = vector_from(n.at("input_scale"), in, "input_scale");
    m.w1 = matrix_from(n.at("w1"), hid, in, "w1");
    m.b1 = vector_from(n.at("b1"), hid, "b1");
    m.w2 = matrix_from(n.at("w2"), out, hid, "w2");
    m.b2 = vector_from(n.at("b2"), out, "b2");
    if (c.dependent_unit < 0 || c.dependent_unit > m.output_dim()) {
      throw DimensionError("checkpoint dependent_unit is out of range");
    }
    if (m.output_activation != c.spec.output_activation()) {
      throw Error("checkpoint output activation does not match its method");
    }
    return c;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed checkpoint: ") + e.what());
  }
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  return checkpoint_to_json(ckpt).dump(1) + "\n";
}

Checkpoint parse_checkpoint(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  return checkpoint_from_json(j);
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  write_text_file(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::string& path) {
  return parse_checkpoint(read_text_file(path));
}

std::string trace_to_csv(const std::vector<double>& trace) {
  std::string out = "epoch,loss\n";
  char buf[64];
  for (std::size_t e = 0; e < trace.size(); ++e) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", e + 1, trace[e]);
    out += buf;
  }
  return out;
}

}  // namespace looplc
