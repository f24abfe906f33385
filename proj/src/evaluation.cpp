#include "looplc/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <thread>

#include "looplc/errors.hpp"
#include "looplc/oracle.hpp"

namespace looplc {

namespace {

using nlohmann::json;
using Predictor = std::function<Vector(const Vector&)>;

std::vector<Vector> predict_all(const Predictor& predict, const std::vector<const Vector*>& xs,
                                bool parallel) {
  std::vector<Vector> out(xs.size());
  const std::size_t workers =
      parallel ? std::max(1u, std::thread::hardware_concurrency()) : 1u;
  if (workers == 1 || xs.size() < 2) {
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = predict(*xs[i]);
    return out;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < xs.size(); i += workers) out[i] = predict(*xs[i]);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

double median(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

volatile double g_sink = 0.0;

// Methods take turns within every repetition so that slow drift of the
// machine state lands on all rows alike. Returns ms per method.
std::vector<double> time_round_robin(const std::vector<Predictor>& methods,
                                     const std::vector<const Vector*>& xs, int reps, int warmup) {
  using clock = std::chrono::steady_clock;
  const std::size_t n = methods.size();
  std::vector<double> total(n, 0.0);
  std::vector<std::vector<double>> samples(n, std::vector<double>(static_cast<std::size_t>(reps)));
  for (const Vector* x : xs) {
    for (int k = 0; k < warmup; ++k) {
      for (const Predictor& predict : methods) g_sink = g_sink + predict(*x)[0];
    }
    for (int k = 0; k < reps; ++k) {
      for (std::size_t m = 0; m < n; ++m) {
        const auto t0 = clock::now();
        const Vector u = methods[m](*x);
        const auto t1 = clock::now();
        g_sink = g_sink + u[0];
        samples[m][static_cast<std::size_t>(k)] =
            std::chrono::duration<double, std::milli>(t1 - t0).count();
      }
    }
    for (std::size_t m = 0; m < n; ++m) total[m] += median(samples[m]);
  }
  for (double& t : total) t /= static_cast<double>(xs.size());
  return total;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

const EvalRow* EvalReport::find(const std::string& method) const {
  for (const EvalRow& r : rows) {
    if (r.method == method) return &r;
  }
  return nullptr;
}

std::string row_label(const Checkpoint& ckpt) {
  if (ckpt.spec.use_gauge) {
    if (ckpt.spec.center_shift == 0.0) return ckpt.spec.name();
    return ckpt.spec.name() + " (center_shift=" + format_double(ckpt.spec.center_shift) + ")";
  }
  return "penalty (rho=" + format_double(ckpt.config.penalty_rho) + ")";
}

EvalReport evaluate(const Dataset& ds, const std::vector<Checkpoint>& models,
                    const EvalOptions& options) {
  if (ds.test.empty()) throw DomainError("dataset has an empty test split");
  if (options.reps < 1 || options.warmup < 0) throw DomainError("invalid timing repetitions");

  EvalReport report;
  report.case_name = ds.case_name;
  report.dataset_hash = dataset_hash(ds);
  report.seed = ds.seed;
  report.test_samples = ds.test.size();
  report.timing_reps = options.reps;
  report.timing_warmup = options.warmup;

  for (const Checkpoint& c : models) {
    if (c.dataset_hash != report.dataset_hash) {
      throw Error("model '" + row_label(c) + "' was trained on dataset " + c.dataset_hash +
                  ", not " + report.dataset_hash);
    }
  }

  // One problem per dependent unit in use.
  std::map<Index, Problem> problems;
  for (const Checkpoint& c : models) {
    if (c.dependent_unit < 0 || c.dependent_unit >= ds.dispatch.generators()) {
      throw DimensionError("model '" + row_label(c) + "' names dependent unit " +
                           std::to_string(c.dependent_unit) + " of a " +
                           std::to_string(ds.dispatch.generators()) + "-unit case");
    }
    if (!problems.contains(c.dependent_unit)) {
      problems.emplace(c.dependent_unit, Problem::make(ds.dispatch, c.dependent_unit));
    }
  }
  std::vector<const Vector*> xs;
  std::vector<Vector> labels;
  for (const std::size_t i : ds.test) {
    xs.push_back(&ds.samples[i].x);
    labels.push_back(ds.samples[i].u_star);
  }

  std::vector<Predictor> predictors;
  const auto add_row = [&](std::string name, Predictor predict) {
    const std::vector<Vector> preds = predict_all(predict, xs, options.parallel);
    EvalRow row;
    row.method = std::move(name);
    row.optimality_gap = optimality_gap(preds, labels);
    double feas = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      feas += feasibility_gap(ds.dispatch, *xs[i], preds[i]);
    }
    row.feasibility_gap = feas / static_cast<double>(preds.size());
    report.rows.push_back(std::move(row));
    predictors.push_back(std::move(predict));
  };

  const Checkpoint* raw_model = nullptr;
  for (const Checkpoint& c : models) {
    const Problem& problem = problems.at(c.dependent_unit);
    add_row(row_label(c), [&problem, &c](const Vector& x) {
      return pipeline_predict(c.model, c.spec, problem, x);
    });
    if (!c.spec.use_gauge &&
        (raw_model == nullptr || c.config.penalty_rho < raw_model->config.penalty_rho)) {
      raw_model = &c;
    }
  }

  if (options.include_projection && raw_model != nullptr) {
    const double tol = options.projection_tol;
    const Problem& problem = problems.at(raw_model->dependent_unit);
    add_row(kProjectionRow, [&problem, raw_model, tol](const Vector& x) {
      const Vector u_o = intuitive_solution(problem.dispatch, x);
      const Vector v = mlp_predict(raw_model->model, x, u_o);
      const Vector u_ind = project_onto_reduced_set(problem.reduced, x, v, tol);
      return equality_completion(problem.dispatch, problem.reduced.partition, x, u_ind);
    });
  }
  if (options.include_oracle) {
    const double tol = ds.label_tol;
    add_row(kOracleRow,
            [&ds, tol](const Vector& x) { return solve_dispatch_exact(ds.dispatch, x, tol); });
  }

  const std::vector<double> ms = time_round_robin(predictors, xs, options.reps, options.warmup);
  for (std::size_t m = 0; m < ms.size(); ++m) report.rows[m].time_ms = ms[m];
  return report;
}

json report_metrics_json(const EvalReport& r) {
  json rows = json::array();
  for (const EvalRow& row : r.rows) {
    rows.push_back(json{{"method", row.method},
                        {"optimality_gap", row.optimality_gap},
                        {"feasibility_gap", row.feasibility_gap}});
  }
  return json{{"case_name", r.case_name},
              {"dataset_hash", r.dataset_hash},
              {"seed", r.seed},
              {"test_samples", r.test_samples},
              {"rows", std::move(rows)}};
}

json report_to_json(const EvalReport& r) {
  json j = report_metrics_json(r);
  j["schema"] = kReportSchema;
  for (std::size_t i = 0; i < r.rows.size(); ++i) j["rows"][i]["time_ms"] = r.rows[i].time_ms;
  j["timing"] = json{{"statistic", "mean over test instances of the per-instance median, methods interleaved within each repetition"},
                     {"clock", "steady_clock"},
                     {"reps", r.timing_reps},
                     {"warmup", r.timing_warmup}};
  return j;
}

std::string report_markdown(const EvalReport& r) {
  std::string out = "| Method | Optimality gap | Feasibility gap | Search time (ms) |\n";
  out += "|---|---|---|---|\n";
  char buf[256];
  for (const EvalRow& row : r.rows) {
    std::snprintf(buf, sizeof buf, "| %s | %.3f | %.3f | %.4f |\n", row.method.c_str(),
                  row.optimality_gap, row.feasibility_gap, row.time_ms);
    out += buf;
  }
  return out;
}

}  // namespace looplc
