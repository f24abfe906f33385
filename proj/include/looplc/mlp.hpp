#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "looplc/linalg.hpp"

namespace looplc {

enum class OutputActivation { none, tanh };

std::string to_string(OutputActivation act);
OutputActivation parse_output_activation(const std::string& text);

/// Fully connected network  v = act(W2 relu(W1 z + b1) + b2)  with
/// z = (input - input_offset) ./ input_scale  and  input = [x; u_o].
struct MlpModel {
  Matrix w1;
  Vector b1;
  Matrix w2;
  Vector b2;
  OutputActivation output_activation = OutputActivation::none;
  Vector input_offset;  // zeros unless normalization was requested
  Vector input_scale;   // ones unless normalization was requested

  Index input_dim() const noexcept { return w1.cols(); }
  Index hidden_dim() const noexcept { return w1.rows(); }
  Index output_dim() const noexcept { return w2.rows(); }
  Index parameter_count() const noexcept {
    return w1.size() + b1.size() + w2.size() + b2.size();
  }

  /// Weights and biases uniform in +-sqrt(1/fan_in), drawn from a seeded
  /// mt19937_64.
  static MlpModel init(Index input_dim, Index output_dim, OutputActivation act,
                       std::uint64_t seed, Index hidden = 64);

  /// Flat view over w1, b1, w2, b2 in that order (row-major inside each).
  double& parameter(Index k);
  double parameter(Index k) const;
};

/// Layer intermediates of one forward pass.
struct MlpTape {
  Vector input;  // normalized input z
  Vector hidden_pre;
  Vector hidden;
  Vector output;  // after the output activation
};

/// Parameter-shaped accumulator for gradients and optimizer moments.
struct MlpGradient {
  Matrix w1;
  Vector b1;
  Matrix w2;
  Vector b2;

  static MlpGradient zeros_like(const MlpModel& m);
  void scale(double s);
  double squared_norm() const;
  double& operator[](Index k);
  double operator[](Index k) const;
};

/// Forward pass on the concatenated input [x; u_o].
std::pair<Vector, MlpTape> mlp_forward(const MlpModel& model, const Vector& x,
                                       const Vector& u_o);

/// Forward pass without a tape.
Vector mlp_predict(const MlpModel& model, const Vector& x, const Vector& u_o);

/// Adds the parameter gradient for cotangent `grad_output` on the network
/// output to `acc`. ReLU uses the zero subgradient at 0.
void mlp_backward(const MlpModel& model, const MlpTape& tape, const Vector& grad_output,
                  MlpGradient& acc);

}  // namespace looplc
