#include "looplc/mlp.hpp"

#include <cmath>
#include <random>

#include "looplc/errors.hpp"

namespace looplc {

namespace {

template <typename Self, typename Fn>
decltype(auto) flat_at(Self& self, Index k, Fn&& fn) {
  if (k < 0) throw DomainError("negative parameter index");
  if (k < self.w1.size()) return fn(self.w1.data()[k]);
  k -= self.w1.size();
  if (k < self.b1.size()) return fn(self.b1[k]);
  k -= self.b1.size();
  if (k < self.w2.size()) return fn(self.w2.data()[k]);
  k -= self.w2.size();
  if (k < self.b2.size()) return fn(self.b2[k]);
  throw DomainError("parameter index out of range");
}

Vector assemble_input(const MlpModel& model, const Vector& x, const Vector& u_o) {
  if (x.size() + u_o.size() != model.input_dim()) {
    throw DimensionError("network expects " + std::to_string(model.input_dim()) +
                         " inputs, got " + std::to_string(x.size() + u_o.size()));
  }
  Vector z(model.input_dim());
  z << x, u_o;
  if (model.input_offset.size() == z.size()) {
    z = (z - model.input_offset).cwiseQuotient(model.input_scale);
  }
  return z;
}

}  // namespace

std::string to_string(OutputActivation act) {
  return act == OutputActivation::tanh ? "tanh" : "none";
}

OutputActivation parse_output_activation(const std::string& text) {
  if (text == "tanh") return OutputActivation::tanh;
  if (text == "none") return OutputActivation::none;
  throw DomainError("unknown output activation '" + text + "'");
}

MlpModel MlpModel::init(Index input_dim, Index output_dim, OutputActivation act,
                        std::uint64_t seed, Index hidden) {
  if (input_dim < 1 || output_dim < 1 || hidden < 1) {
    throw DimensionError("network dimensions must be positive");
  }
  std::mt19937_64 rng(seed);
  const auto fill = [&rng](auto& m, Index fan_in) {
    const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  };
  MlpModel m;
  m.w1.resize(hidden, input_dim);
  m.b1.resize(hidden);
  m.w2.resize(output_dim, hidden);
  m.b2.resize(output_dim);
  fill(m.w1, input_dim);
  fill(m.b1, input_dim);
  fill(m.w2, hidden);
  fill(m.b2, hidden);
  m.output_activation = act;
  m.input_offset = Vector::Zero(input_dim);
  m.input_scale = Vector::Ones(input_dim);
  return m;
}

double& MlpModel::parameter(Index k) {
  return flat_at(*this, k, [](double& v) -> double& { return v; });
}

double MlpGradient::operator[](Index k) const {
  return flat_at(*this, k, [](const double& v) { return v; });
}

double MlpModel::parameter(Index k) const {
  return flat_at(*this, k, [](const double& v) { return v; });
}

MlpGradient MlpGradient::zeros_like(const MlpModel& m) {
  return MlpGradient{Matrix::Zero(m.w1.rows(), m.w1.cols()), Vector::Zero(m.b1.size()),
                     Matrix::Zero(m.w2.rows(), m.w2.cols()), Vector::Zero(m.b2.size())};
}

void MlpGradient::scale(double s) {
  w1 *= s;
  b1 *= s;
  w2 *= s;
  b2 *= s;
}

double MlpGradient::squared_norm() const {
  return w1.squaredNorm() + b1.squaredNorm() + w2.squaredNorm() + b2.squaredNorm();
}

double& MlpGradient::operator[](Index k) {
  return flat_at(*this, k, [](double& v) -> double& { return v; });
}

std::pair<Vector, MlpTape> mlp_forward(const MlpModel& model, const Vector& x,
                                       const Vector& u_o) {
  MlpTape tape;
  tape.input = assemble_input(model, x, u_o);
  tape.hidden_pre = model.w1 * tape.input + model.b1;
  tape.hidden = tape.hidden_pre.cwiseMax(0.0);
  Vector out = model.w2 * tape.hidden + model.b2;
  if (model.output_activation == OutputActivation::tanh) out = out.array().tanh();
  tape.output = out;
  return {std::move(out), std::move(tape)};
}

Vector mlp_predict(const MlpModel& model, const Vector& x, const Vector& u_o) {
  const Vector z = assemble_input(model, x, u_o);
  Vector out = model.w2 * (model.w1 * z + model.b1).cwiseMax(0.0) + model.b2;
  if (model.output_activation == OutputActivation::tanh) out = out.array().tanh();
  return out;
}

void mlp_backward(const MlpModel& model, const MlpTape& tape, const Vector& grad_output,
                  MlpGradient& acc) {
  if (grad_output.size() != model.output_dim()) {
    throw DimensionError("output cotangent does not match the network");
  }
  Vector delta_out = grad_output;
  if (model.output_activation == OutputActivation::tanh) {
    delta_out.array() *= 1.0 - tape.output.array().square();
  }
  acc.w2.noalias() += delta_out * tape.hidden.transpose();
  acc.b2 += delta_out;
  Vector delta_hidden = model.w2.transpose() * delta_out;
  for (Index j = 0; j < delta_hidden.size(); ++j) {
    if (!(tape.hidden_pre[j] > 0.0)) delta_hidden[j] = 0.0;
  }
  acc.w1.noalias() += delta_hidden * tape.input.transpose();
  acc.b1 += delta_hidden;
}

}  // namespace looplc
