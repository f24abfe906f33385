#include "looplc/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "looplc/errors.hpp"

namespace looplc {

Problem Problem::make(DispatchCase c, Index dep_index) {
  c.validate();
  Problem p{std::move(c), {}};
  p.reduced = build_reduced_set(p.dispatch,
                                Partition::with_dependent(p.dispatch.generators(), dep_index));
  return p;
}

PreparedSample prepare_sample(const Problem& problem, const Vector& x, double center_shift) {
  return PreparedSample{x, intuitive_solution(problem.dispatch, x),
                        shifted_reduced_set(problem.dispatch, problem.reduced, x, center_shift)};
}

PipelineSpec PipelineSpec::parse(const std::string& method) {
  if (method == "penalty") return PipelineSpec{false, {}};
  if (method == "traditional-gauge" || method == "generalized-gauge" ||
      method.rfind("variant:", 0) == 0) {
    return PipelineSpec{true, GaugeLayerConfig::parse(method)};
  }
  throw DomainError("unknown method '" + method +
                    "' (penalty, traditional-gauge, generalized-gauge, variant:<name>)");
}

std::string PipelineSpec::name() const {
  if (!use_gauge) return "penalty";
  switch (layer.kind) {
    case GaugeKind::traditional: return "traditional-gauge";
    case GaugeKind::generalized: return "generalized-gauge";
    default: return layer.name();
  }
}

Vector pipeline_predict(const MlpModel& model, const PipelineSpec& spec,
                        const Problem& problem, const PreparedSample& sample) {
  const Vector v = mlp_predict(model, sample.x, sample.u_o);
  const Vector u_ind = spec.use_gauge ? gauge_forward(spec.layer, sample.shifted, v).first : v;
  return equality_completion(problem.dispatch, problem.reduced.partition, sample.x, u_ind);
}

Vector pipeline_predict(const MlpModel& model, const PipelineSpec& spec,
                        const Problem& problem, const Vector& x) {
  const Vector u_o = intuitive_solution(problem.dispatch, x);
  const Vector v = mlp_predict(model, x, u_o);
  if (!spec.use_gauge) {
    return equality_completion(problem.dispatch, problem.reduced.partition, x, v);
  }
  const ShiftedSet s = shifted_reduced_set(problem.dispatch, problem.reduced, x, spec.center_shift);
  return equality_completion(problem.dispatch, problem.reduced.partition, x,
                             gauge_forward(spec.layer, s, v).first);
}

LossResult loss_mse(const std::vector<Vector>& predictions,
                    const std::vector<Vector>& labels) {
  if (predictions.empty()) throw DomainError("loss of an empty batch");
  if (predictions.size() != labels.size()) {
    throw DimensionError("prediction and label counts differ");
  }
  const double inv_n = 1.0 / static_cast<double>(predictions.size());
  LossResult r;
  r.cotangents.reserve(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i].size() != labels[i].size()) {
      throw DimensionError("prediction and label sizes differ");
    }
    Vector diff = predictions[i] - labels[i];
    r.value += diff.squaredNorm();
    r.cotangents.push_back(2.0 * inv_n * diff);
  }
  r.value *= inv_n;
  return r;
}

LossResult loss_penalty(const std::vector<Vector>& predictions,
                        const std::vector<Vector>& labels, const DispatchCase& c,
                        const std::vector<Vector>& loads, double rho) {
  if (!(rho >= 0.0)) throw DomainError("penalty coefficient must be nonnegative");
  LossResult r = loss_mse(predictions, labels);
  if (loads.size() != predictions.size()) throw DimensionError("load count mismatch");
  if (rho == 0.0) return r;
  const double inv_n = 1.0 / static_cast<double>(predictions.size());
  double penalty = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const Vector& u = predictions[i];
    const Vector upper = (u - c.u_max).cwiseMax(0.0);
    const Vector lower = (c.u_min - u).cwiseMax(0.0);
    const double balance = u.sum() - c.net_demand(loads[i]);
    penalty += upper.squaredNorm() + lower.squaredNorm() + balance * balance;
    r.cotangents[i] +=
        (2.0 * rho * inv_n) * (upper - lower + Vector::Constant(u.size(), balance));
  }
  r.value += rho * inv_n * penalty;
  return r;
}

BatchResult pipeline_loss_gradient(const MlpModel& model, const PipelineSpec& spec,
                                   const Problem& problem,
                                   const std::vector<const PreparedSample*>& samples,
                                   const std::vector<const Vector*>& labels,
                                   double penalty_rho) {
  if (samples.size() != labels.size()) throw DimensionError("sample and label counts differ");
  const std::size_t n = samples.size();
  const Partition& part = problem.reduced.partition;

  std::vector<MlpTape> mlp_tapes;
  std::vector<LayerTape> layer_tapes;
  std::vector<Vector> predictions;
  std::vector<Vector> label_copies;
  std::vector<Vector> loads;
  mlp_tapes.reserve(n);
  layer_tapes.reserve(n);
  predictions.reserve(n);
  label_copies.reserve(n);
  loads.reserve(n);

  for (std::size_t i = 0; i < n; ++i) {
    const PreparedSample& s = *samples[i];
    auto [v, mtape] = mlp_forward(model, s.x, s.u_o);
    mlp_tapes.push_back(std::move(mtape));
    Vector u_ind;
    if (spec.use_gauge) {
      auto [out, ltape] = gauge_forward(spec.layer, s.shifted, v);
      u_ind = std::move(out);
      layer_tapes.push_back(std::move(ltape));
    } else {
      u_ind = std::move(v);
    }
    predictions.push_back(equality_completion(problem.dispatch, part, s.x, u_ind));
    label_copies.push_back(*labels[i]);
    loads.push_back(s.x);
  }

  const LossResult loss =
      spec.use_gauge ? loss_mse(predictions, label_copies)
                     : loss_penalty(predictions, label_copies, problem.dispatch, loads,
                                    penalty_rho);

  BatchResult out{loss.value, MlpGradient::zeros_like(model)};
  for (std::size_t i = 0; i < n; ++i) {
    Vector g = completion_backward(part, loss.cotangents[i]);
    if (spec.use_gauge) g = gauge_backward(layer_tapes[i], g);
    mlp_backward(model, mlp_tapes[i], g, out.gradient);
  }
  return out;
}

namespace {

class Optimizer {
 public:
  Optimizer(const MlpModel& model, const TrainConfig& config)
      : config_(config),
        m_(MlpGradient::zeros_like(model)),
        v_(MlpGradient::zeros_like(model)) {}

  void step(MlpModel& model, const MlpGradient& g) {
    const double lr = config_.learning_rate;
    if (config_.optimizer == OptimizerKind::sgd) {
      model.w1 -= lr * g.w1;
      model.b1 -= lr * g.b1;
      model.w2 -= lr * g.w2;
      model.b2 -= lr * g.b2;
      return;
    }
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, t_);
    const double c2 = 1.0 - std::pow(kBeta2, t_);
    update(model.w1, m_.w1, v_.w1, g.w1, lr, c1, c2);
    update(model.b1, m_.b1, v_.b1, g.b1, lr, c1, c2);
    update(model.w2, m_.w2, v_.w2, g.w2, lr, c1, c2);
    update(model.b2, m_.b2, v_.b2, g.b2, lr, c1, c2);
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  template <typename P>
  static void update(P& param, P& m, P& v, const P& g, double lr, double c1, double c2) {
    m = kBeta1 * m + (1.0 - kBeta1) * g;
    v = kBeta2 * v + (1.0 - kBeta2) * g.cwiseProduct(g);
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + kEps);
  }

  TrainConfig config_;
  MlpGradient m_;
  MlpGradient v_;
  int t_ = 0;
};

void fit_normalization(MlpModel& model, const std::vector<PreparedSample>& samples) {
  const Index dim = model.input_dim();
  Vector mean = Vector::Zero(dim);
  Vector sq = Vector::Zero(dim);
  for (const PreparedSample& s : samples) {
    Vector z(dim);
    z << s.x, s.u_o;
    mean += z;
    sq += z.cwiseProduct(z);
  }
  const double n = static_cast<double>(samples.size());
  mean /= n;
  Vector var = (sq / n - mean.cwiseProduct(mean)).cwiseMax(0.0);
  Vector scale = var.cwiseSqrt();
  for (Index i = 0; i < dim; ++i) {
    if (!(scale[i] > 1e-12)) scale[i] = 1.0;
  }
  model.input_offset = mean;
  model.input_scale = scale;
}

}  // namespace

TrainResult train(const PipelineSpec& spec, const Problem& problem,
                  const std::vector<PreparedSample>& samples,
                  const std::vector<Vector>& labels, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  MlpModel model = MlpModel::init(problem.input_dim(), problem.output_dim(),
                                  spec.output_activation(), config.seed);
  if (config.normalize_inputs && !samples.empty()) fit_normalization(model, samples);
  return train_from(std::move(model), spec, problem, samples, labels, config, on_epoch);
}

TrainResult train_from(MlpModel model, const PipelineSpec& spec, const Problem& problem,
                       const std::vector<PreparedSample>& samples,
                       const std::vector<Vector>& labels, const TrainConfig& config,
                       const EpochCallback& on_epoch) {
  if (samples.empty()) throw DomainError("training set is empty");
  if (samples.size() != labels.size()) throw DimensionError("sample and label counts differ");
  if (config.epochs < 0) throw DomainError("epoch count must be nonnegative");
  if (!(config.learning_rate >= 0.0)) throw DomainError("learning rate must be nonnegative");
  if (model.output_activation != spec.output_activation()) {
    throw DomainError("network output activation does not suit method " + spec.name());
  }

  const std::size_t n = samples.size();
  const std::size_t batch =
      config.batch_size <= 0 ? n : std::min(n, static_cast<std::size_t>(config.batch_size));
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Optimizer opt(model, config);

  TrainResult result{std::move(model), {}};
  result.trace.reserve(static_cast<std::size_t>(config.epochs));
  if (on_epoch) on_epoch(0, result.model);

  std::vector<const PreparedSample*> batch_samples;
  std::vector<const Vector*> batch_labels;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    if (batch < n) std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t stop = std::min(n, start + batch);
      batch_samples.clear();
      batch_labels.clear();
      for (std::size_t k = start; k < stop; ++k) {
        batch_samples.push_back(&samples[order[k]]);
        batch_labels.push_back(&labels[order[k]]);
      }
      const BatchResult br = pipeline_loss_gradient(result.model, spec, problem,
                                                    batch_samples, batch_labels,
                                                    config.penalty_rho);
      if (!std::isfinite(br.loss) || !std::isfinite(br.gradient.squared_norm())) {
        throw ConvergenceError("training diverged in epoch " + std::to_string(epoch) +
                               " (batch loss " + std::to_string(br.loss) + ")");
      }
      epoch_loss += br.loss * static_cast<double>(stop - start);
      opt.step(result.model, br.gradient);
    }
    result.trace.push_back(epoch_loss / static_cast<double>(n));
    if (on_epoch) on_epoch(epoch, result.model);
  }
  return result;
}

}  // namespace looplc
