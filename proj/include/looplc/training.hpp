#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "looplc/dispatch.hpp"
#include "looplc/gauge.hpp"
#include "looplc/linalg.hpp"
#include "looplc/mlp.hpp"

namespace looplc {

/// A dispatch case together with its reduced set for a fixed partition.
struct Problem {
  DispatchCase dispatch;
  ReducedSet reduced;

  static Problem make(DispatchCase c, Index dep_index = 0);
  Index input_dim() const noexcept { return dispatch.nodes() + dispatch.generators(); }
  Index output_dim() const noexcept { return reduced.partition.independent(); }
};

/// Per-instance quantities that depend only on the loads.
struct PreparedSample {
  Vector x;
  Vector u_o;
  ShiftedSet shifted;
};

/// `center_shift` moves the gauge center, see perturbed_interior_point. The
/// network input u_o is always the unshifted intuitive solution.
PreparedSample prepare_sample(const Problem& problem, const Vector& x,
                              double center_shift = 0.0);

/// How the network output becomes a dispatch: either a gauge layer or the
/// raw output (penalty baseline).
struct PipelineSpec {
  bool use_gauge = true;
  GaugeLayerConfig layer;
  double center_shift = 0.0;  // gauge layers only

  /// "penalty", "traditional-gauge", "generalized-gauge" or "variant:<name>".
  static PipelineSpec parse(const std::string& method);
  std::string name() const;
  OutputActivation output_activation() const noexcept {
    return use_gauge && layer.needs_unit_ball() ? OutputActivation::tanh
                                                : OutputActivation::none;
  }
};

/// Full generation vector predicted for one prepared sample, which must have
/// been prepared with spec.center_shift.
Vector pipeline_predict(const MlpModel& model, const PipelineSpec& spec,
                        const Problem& problem, const PreparedSample& sample);

/// Same, starting from the raw loads (computes the anchor on the fly).
Vector pipeline_predict(const MlpModel& model, const PipelineSpec& spec,
                        const Problem& problem, const Vector& x);

struct LossResult {
  double value = 0.0;
  std::vector<Vector> cotangents;
};

/// (1/N) sum ||u_pred - u_label||^2 and its per-sample cotangents.
LossResult loss_mse(const std::vector<Vector>& predictions,
                    const std::vector<Vector>& labels);

/// MSE plus rho (1/N) sum of squared positive bound violations and squared
/// balance residuals of each prediction.
LossResult loss_penalty(const std::vector<Vector>& predictions,
                        const std::vector<Vector>& labels, const DispatchCase& c,
                        const std::vector<Vector>& loads, double rho);

enum class OptimizerKind { sgd, adam };

struct TrainConfig {
  std::uint64_t seed = 1;
  int epochs = 200;
  double learning_rate = 1e-3;
  int batch_size = 20;  // <= 0 means full batch
  double penalty_rho = 0.0;
  OptimizerKind optimizer = OptimizerKind::adam;
  bool normalize_inputs = false;
};

/// Loss and parameter gradient of the whole pipeline over a batch.
struct BatchResult {
  double loss = 0.0;
  MlpGradient gradient;
};

BatchResult pipeline_loss_gradient(const MlpModel& model, const PipelineSpec& spec,
                                   const Problem& problem,
                                   const std::vector<const PreparedSample*>& samples,
                                   const std::vector<const Vector*>& labels,
                                   double penalty_rho);

struct TrainResult {
  MlpModel model;
  std::vector<double> trace;  // mean training loss per epoch
};

/// Called with epoch 0 before the first update and with e = 1..epochs after
/// each epoch.
using EpochCallback = std::function<void(int epoch, const MlpModel& model)>;

/// Seeded mini-batch training. Initializes the network from config.seed.
/// Throws ConvergenceError if the loss becomes non-finite.
TrainResult train(const PipelineSpec& spec, const Problem& problem,
                  const std::vector<PreparedSample>& samples,
                  const std::vector<Vector>& labels, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

/// Same, continuing from an existing model.
TrainResult train_from(MlpModel model, const PipelineSpec& spec, const Problem& problem,
                       const std::vector<PreparedSample>& samples,
                       const std::vector<Vector>& labels, const TrainConfig& config,
                       const EpochCallback& on_epoch = {});

}  // namespace looplc
