#include <doctest.h>

#include <cmath>
#include <random>

#include "looplc/errors.hpp"
#include "looplc/mlp.hpp"
#include "looplc/oracle.hpp"
#include "looplc/training.hpp"
#include "support/oracles.hpp"

using namespace looplc;
using testing_support::fd_gradient;
using testing_support::random_dispatch_case;
using testing_support::random_feasible_loads;
using testing_support::random_vector;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

struct Toy {
  Problem problem;
  std::vector<PreparedSample> samples;
  std::vector<Vector> labels;
};

// Two units, two load nodes, labels from the exact oracle.
Toy toy_problem(int count = 40, std::uint64_t seed = 5) {
  DispatchCase c;
  c.u_min = vec({0.0, 0.0});
  c.u_max = vec({1.0, 2.0});
  c.cost_quadratic = vec({1.0, 0.5});
  c.cost_linear = vec({0.0, 0.2});
  c.loads_nominal = vec({0.7, 0.8});
  Toy t{Problem::make(c), {}, {}};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> f(0.6, 1.4);
  for (int i = 0; i < count; ++i) {
    const Vector x = vec({0.7 * f(rng), 0.8 * f(rng)});
    t.samples.push_back(prepare_sample(t.problem, x));
    t.labels.push_back(solve_dispatch_exact(c, x));
  }
  return t;
}

Toy random_problem(std::mt19937_64& rng, Index g, Index d, int count, Index dep = 0,
                   double center_shift = 0.0) {
  const DispatchCase c = random_dispatch_case(rng, g, d);
  Toy t{Problem::make(c, dep), {}, {}};
  for (int i = 0; i < count; ++i) {
    const Vector x = random_feasible_loads(rng, c);
    t.samples.push_back(prepare_sample(t.problem, x, center_shift));
    t.labels.push_back(solve_dispatch_exact(c, x));
  }
  return t;
}

double dataset_gap(const Toy& t, const MlpModel& m, const PipelineSpec& spec) {
  std::vector<Vector> preds;
  for (const auto& s : t.samples) preds.push_back(pipeline_predict(m, spec, t.problem, s));
  return optimality_gap(preds, t.labels);
}

std::vector<const PreparedSample*> sample_ptrs(const Toy& t) {
  std::vector<const PreparedSample*> out;
  for (const auto& s : t.samples) out.push_back(&s);
  return out;
}

std::vector<const Vector*> label_ptrs(const Toy& t) {
  std::vector<const Vector*> out;
  for (const auto& l : t.labels) out.push_back(&l);
  return out;
}

}  // namespace

TEST_CASE("network shapes and initialization") {
  const MlpModel m = MlpModel::init(7, 3, OutputActivation::none, 42);
  CHECK(m.input_dim() == 7);
  CHECK(m.hidden_dim() == 64);
  CHECK(m.output_dim() == 3);
  CHECK(m.parameter_count() == 64 * 7 + 64 + 3 * 64 + 3);
  CHECK(m.w1.cwiseAbs().maxCoeff() <= std::sqrt(1.0 / 7.0));
  CHECK(m.w2.cwiseAbs().maxCoeff() <= std::sqrt(1.0 / 64.0));
  CHECK(m.w1.cwiseAbs().maxCoeff() > 0.0);
  const MlpModel same = MlpModel::init(7, 3, OutputActivation::none, 42);
  CHECK(same.w1 == m.w1);
  CHECK(same.b2 == m.b2);
  const MlpModel other = MlpModel::init(7, 3, OutputActivation::none, 43);
  CHECK(other.w1 != m.w1);
  CHECK_THROWS_AS(MlpModel::init(0, 3, OutputActivation::none, 1), DimensionError);
}

TEST_CASE("forward pass of a zero-weight network") {
  MlpModel m = MlpModel::init(3, 2, OutputActivation::none, 1);
  m.w1.setZero();
  m.b1.setZero();
  m.w2.setZero();
  m.b2 = vec({0.3, -2.0});
  CHECK(mlp_predict(m, vec({1.0}), vec({2.0, 3.0})) == m.b2);
  m.output_activation = OutputActivation::tanh;
  const Vector v = mlp_predict(m, vec({1.0}), vec({2.0, 3.0}));
  CHECK(v[0] == doctest::Approx(std::tanh(0.3)));
  CHECK(v[1] == doctest::Approx(std::tanh(-2.0)));
  CHECK(v.cwiseAbs().maxCoeff() < 1.0);
  CHECK_THROWS_AS(mlp_predict(m, vec({1.0, 2.0}), vec({2.0, 3.0})), DimensionError);
}

TEST_CASE("forward pass is deterministic") {
  const MlpModel m = MlpModel::init(5, 4, OutputActivation::tanh, 9);
  const Vector x = vec({0.1, 0.2, 0.3});
  const Vector uo = vec({1.0, -1.0});
  const Vector a = mlp_predict(m, x, uo);
  const Vector b = mlp_forward(m, x, uo).first;
  CHECK(a == b);
}

TEST_CASE("network backward matches finite differences") {
  std::mt19937_64 rng(41);
  for (const auto act : {OutputActivation::none, OutputActivation::tanh}) {
    MlpModel m = MlpModel::init(4, 3, act, 17, 8);
    const Vector x = random_vector(rng, 2, -1, 1);
    const Vector uo = random_vector(rng, 2, -1, 1);
    const Vector up = random_vector(rng, 3, -1, 1);
    auto [v, tape] = mlp_forward(m, x, uo);
    MlpGradient g = MlpGradient::zeros_like(m);
    mlp_backward(m, tape, up, g);
    for (Index k = 0; k < m.parameter_count(); ++k) {
      const double saved = m.parameter(k);
      m.parameter(k) = saved + 1e-6;
      const double hi = up.dot(mlp_predict(m, x, uo));
      m.parameter(k) = saved - 1e-6;
      const double lo = up.dot(mlp_predict(m, x, uo));
      m.parameter(k) = saved;
      const double fd = (hi - lo) / 2e-6;
      REQUIRE(std::abs(fd - g[k]) <= 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("mse loss") {
  const auto zero = loss_mse({vec({1.0, 2.0})}, {vec({1.0, 2.0})});
  CHECK(zero.value == 0.0);
  CHECK(zero.cotangents[0].isZero(0.0));
  const auto one = loss_mse({vec({0.3})}, {vec({0.0})});
  CHECK(one.value == doctest::Approx(0.09));
  CHECK(one.cotangents[0][0] == doctest::Approx(0.6));
  CHECK_THROWS_AS(loss_mse({}, {}), DomainError);

  std::mt19937_64 rng(42);
  const std::vector<Vector> labels{random_vector(rng, 3, -1, 1), random_vector(rng, 3, -1, 1)};
  const Vector p0 = random_vector(rng, 3, -1, 1);
  const Vector p1 = random_vector(rng, 3, -1, 1);
  const auto res = loss_mse({p0, p1}, labels);
  const Vector fd = fd_gradient([&](const Vector& p) { return loss_mse({p, p1}, labels).value; }, p0);
  CHECK((fd - res.cotangents[0]).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("penalty loss") {
  DispatchCase c;
  c.u_min = vec({0.0, 0.0});
  c.u_max = vec({1.0, 2.0});
  c.cost_quadratic = vec({1.0, 1.0});
  c.cost_linear = vec({0.0, 0.0});
  c.loads_nominal = vec({1.5});

  const std::vector<Vector> feasible{vec({0.5, 1.0})};
  const std::vector<Vector> labels{vec({0.4, 1.1})};
  const std::vector<Vector> loads{vec({1.5})};
  CHECK(loss_penalty(feasible, labels, c, loads, 10.0).value ==
        loss_mse(feasible, labels).value);

  const std::vector<Vector> bad{vec({1.1, 0.4})};
  CHECK(loss_penalty(bad, labels, c, loads, 0.0).value == loss_mse(bad, labels).value);
  CHECK(loss_penalty(bad, labels, c, loads, 10.0).value ==
        doctest::Approx(loss_mse(bad, labels).value + 0.1));
  CHECK_THROWS_AS(loss_penalty(bad, labels, c, loads, -1.0), DomainError);

  std::mt19937_64 rng(43);
  for (int k = 0; k < 20; ++k) {
    const Vector p = random_vector(rng, 2, -0.5, 2.5);
    const auto res = loss_penalty({p}, labels, c, loads, 3.0);
    const Vector fd = fd_gradient(
        [&](const Vector& q) { return loss_penalty({q}, labels, c, loads, 3.0).value; }, p);
    REQUIRE((fd - res.cotangents[0]).cwiseAbs().maxCoeff() <= 1e-5);
  }
}

TEST_CASE("pipeline names") {
  CHECK_FALSE(PipelineSpec::parse("penalty").use_gauge);
  CHECK(PipelineSpec::parse("penalty").output_activation() == OutputActivation::none);
  CHECK(PipelineSpec::parse("generalized-gauge").output_activation() == OutputActivation::none);
  CHECK(PipelineSpec::parse("traditional-gauge").output_activation() == OutputActivation::tanh);
  CHECK(PipelineSpec::parse("variant:log").output_activation() == OutputActivation::tanh);
  for (const char* name : {"penalty", "traditional-gauge", "generalized-gauge", "variant:exp"}) {
    CHECK(PipelineSpec::parse(name).name() == name);
  }
  CHECK_THROWS_AS(PipelineSpec::parse("lagrangian"), DomainError);
}

TEST_CASE("end-to-end gradient matches finite differences") {
  std::mt19937_64 rng(44);
  for (const char* name :
       {"generalized-gauge", "traditional-gauge", "variant:power:2", "variant:exp", "penalty"}) {
    CAPTURE(name);
    const PipelineSpec spec = PipelineSpec::parse(name);
    const Toy t = random_problem(rng, 5, 3, 8, 2);
    MlpModel m = MlpModel::init(t.problem.input_dim(), t.problem.output_dim(),
                                spec.output_activation(), 7);
    const double rho = spec.use_gauge ? 0.0 : 5.0;
    const auto samples = sample_ptrs(t);
    const auto labels = label_ptrs(t);
    const BatchResult br = pipeline_loss_gradient(m, spec, t.problem, samples, labels, rho);
    std::uniform_int_distribution<Index> pick(0, m.parameter_count() - 1);
    int checked = 0;
    while (checked < 20) {
      const Index k = pick(rng);
      const double saved = m.parameter(k);
      const auto loss_at = [&](double w) {
        m.parameter(k) = w;
        const double l = pipeline_loss_gradient(m, spec, t.problem, samples, labels, rho).loss;
        m.parameter(k) = saved;
        return l;
      };
      const double h = 1e-6;
      const double fd = (loss_at(saved + h) - loss_at(saved - h)) / (2 * h);
      // a kink between the two probes (ReLU switch, argmax switch) makes the
      // one-sided slopes disagree; skip those coordinates
      const double right = (loss_at(saved + h) - loss_at(saved)) / h;
      const double left = (loss_at(saved) - loss_at(saved - h)) / h;
      if (std::abs(right - left) > 1e-3 * std::max(1.0, std::abs(fd))) continue;
      REQUIRE(std::abs(fd - br.gradient[k]) <= 1e-4 * std::max(1e-2, std::abs(fd)));
      ++checked;
    }
  }
}

TEST_CASE("zero learning rate leaves the model unchanged") {
  const Toy t = toy_problem();
  const PipelineSpec spec = PipelineSpec::parse("generalized-gauge");
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.learning_rate = 0.0;
  const TrainResult r = train(spec, t.problem, t.samples, t.labels, cfg);
  const MlpModel init = MlpModel::init(t.problem.input_dim(), t.problem.output_dim(),
                                       OutputActivation::none, cfg.seed);
  CHECK(r.model.w1 == init.w1);
  CHECK(r.model.b2 == init.b2);
  REQUIRE(r.trace.size() == 1);
  const BatchResult full =
      pipeline_loss_gradient(init, spec, t.problem, sample_ptrs(t), label_ptrs(t), 0.0);
  CHECK(r.trace[0] == doctest::Approx(full.loss).epsilon(1e-12));
}

TEST_CASE("generalized gauge learns the two-generator toy case") {
  const Toy t = toy_problem();
  const PipelineSpec spec = PipelineSpec::parse("generalized-gauge");
  TrainConfig cfg;
  cfg.epochs = 500;
  const TrainResult r = train(spec, t.problem, t.samples, t.labels, cfg);
  CHECK(dataset_gap(t, r.model, spec) < 1e-3);
}

TEST_CASE("training is deterministic") {
  const Toy t = toy_problem();
  for (const char* name : {"generalized-gauge", "traditional-gauge", "penalty"}) {
    const PipelineSpec spec = PipelineSpec::parse(name);
    TrainConfig cfg;
    cfg.epochs = 20;
    cfg.penalty_rho = spec.use_gauge ? 0.0 : 1.0;
    const TrainResult a = train(spec, t.problem, t.samples, t.labels, cfg);
    const TrainResult b = train(spec, t.problem, t.samples, t.labels, cfg);
    CHECK(a.trace == b.trace);
    CHECK(a.model.w1 == b.model.w1);
    CHECK(a.model.b2 == b.model.b2);
  }
}

TEST_CASE("generalized pipeline is feasible at every epoch") {
  std::mt19937_64 rng(45);
  const Toy t = random_problem(rng, 6, 4, 30, 0);
  const PipelineSpec spec = PipelineSpec::parse("generalized-gauge");
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.learning_rate = 1e-2;
  int epochs_seen = 0;
  double worst = 0.0;
  train(spec, t.problem, t.samples, t.labels, cfg, [&](int, const MlpModel& m) {
    ++epochs_seen;
    for (const auto& s : t.samples) {
      worst = std::max(worst, feasibility_gap(t.problem.dispatch, s.x,
                                              pipeline_predict(m, spec, t.problem, s)));
    }
  });
  CHECK(epochs_seen == 31);
  CHECK(worst <= 1e-9);
}

TEST_CASE("shifted gauge centers keep every epoch feasible") {
  for (const double shift : {-0.8, 0.6}) {
    CAPTURE(shift);
    std::mt19937_64 rng(46);
    const Toy t = random_problem(rng, 6, 4, 30, 1, shift);
    for (const char* method : {"generalized-gauge", "traditional-gauge"}) {
      PipelineSpec spec = PipelineSpec::parse(method);
      spec.center_shift = shift;
      TrainConfig cfg;
      cfg.epochs = 10;
      cfg.learning_rate = 1e-2;
      double worst = 0.0;
      double path_gap = 0.0;
      train(spec, t.problem, t.samples, t.labels, cfg, [&](int, const MlpModel& m) {
        for (const auto& s : t.samples) {
          const Vector u = pipeline_predict(m, spec, t.problem, s);
          worst = std::max(worst, feasibility_gap(t.problem.dispatch, s.x, u));
          path_gap = std::max(path_gap, (u - pipeline_predict(m, spec, t.problem, s.x)).norm());
        }
      });
      CHECK(worst <= 1e-9);
      CHECK(path_gap == 0.0);
    }
  }
}

TEST_CASE("full-batch descent decreases the generalized loss") {
  const Toy t = toy_problem();
  const PipelineSpec spec = PipelineSpec::parse("generalized-gauge");
  TrainConfig cfg;
  cfg.epochs = 100;
  cfg.learning_rate = 1e-4;
  cfg.batch_size = 0;
  cfg.optimizer = OptimizerKind::sgd;
  const TrainResult r = train(spec, t.problem, t.samples, t.labels, cfg);
  int increases = 0;
  for (std::size_t e = 1; e < r.trace.size(); ++e) increases += r.trace[e] > r.trace[e - 1];
  CHECK(increases <= 5);
  CHECK(r.trace.back() < r.trace.front());
}

TEST_CASE("input normalization") {
  const Toy t = toy_problem();
  const PipelineSpec spec = PipelineSpec::parse("penalty");
  TrainConfig cfg;
  cfg.epochs = 0;
  cfg.normalize_inputs = true;
  const TrainResult r = train(spec, t.problem, t.samples, t.labels, cfg);
  CHECK(r.trace.empty());
  Vector mean = Vector::Zero(r.model.input_dim());
  for (const auto& s : t.samples) {
    Vector z(r.model.input_dim());
    z << s.x, s.u_o;
    mean += z;
  }
  mean /= static_cast<double>(t.samples.size());
  CHECK((r.model.input_offset - mean).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(r.model.input_scale.minCoeff() > 0.0);
}

TEST_CASE("training rejects bad configurations") {
  const Toy t = toy_problem(4);
  const PipelineSpec spec = PipelineSpec::parse("generalized-gauge");
  TrainConfig cfg;
  cfg.epochs = -1;
  CHECK_THROWS_AS(train(spec, t.problem, t.samples, t.labels, cfg), DomainError);
  cfg.epochs = 1;
  CHECK_THROWS_AS(train(spec, t.problem, {}, {}, cfg), DomainError);
  const MlpModel tanh_model = MlpModel::init(t.problem.input_dim(), t.problem.output_dim(),
                                             OutputActivation::tanh, 1);
  CHECK_THROWS_AS(train_from(tanh_model, spec, t.problem, t.samples, t.labels, cfg), DomainError);
}

TEST_CASE("divergence aborts training") {
  const Toy t = toy_problem(8);
  const PipelineSpec spec = PipelineSpec::parse("penalty");
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.learning_rate = 1e3;
  cfg.optimizer = OptimizerKind::sgd;
  cfg.penalty_rho = 100.0;
  CHECK_THROWS_AS(train(spec, t.problem, t.samples, t.labels, cfg), ConvergenceError);
}
