#include "looplc/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "looplc/case_file.hpp"
#include "looplc/checkpoint.hpp"
#include "looplc/dataset.hpp"
#include "looplc/errors.hpp"
#include "looplc/evaluation.hpp"
#include "looplc/gauge.hpp"
#include "looplc/mapviz.hpp"
#include "looplc/training.hpp"

namespace looplc {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Bad flags or inputs detected before any real work starts.
class ValidationFailure : public Error {
 public:
  using Error::Error;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationFailure(message);
}

void require_file(const std::string& path, const char* what) {
  require(!path.empty(), std::string("missing --") + what);
  require(fs::is_regular_file(path), std::string(what) + " file '" + path + "' does not exist");
}

std::string with_suffix(const std::string& path, const std::string& suffix) {
  const fs::path p(path);
  fs::path stem = p.parent_path() / p.stem();
  return stem.string() + suffix + p.extension().string();
}

std::string default_trace_path(const std::string& model_path) {
  const fs::path p(model_path);
  return ((p.parent_path() / p.stem()).string()) + ".trace.csv";
}

std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

struct GenDataFlags {
  std::string case_path;
  std::string out;
  long long count = 200;
  double fluct = 0.10;
  std::uint64_t seed = 7;
  double train_fraction = 0.5;
  double tol = 1e-9;
};

int cmd_gen_data(const GenDataFlags& f, std::ostream& out) {
  require(f.count > 0, "--count must be positive");
  require(f.fluct >= 0.0 && f.fluct < 1.0, "--fluct must lie in [0, 1)");
  require(f.train_fraction >= 0.0 && f.train_fraction <= 1.0,
          "--train-fraction must lie in [0, 1]");
  require(f.tol > 0.0, "--tol must be positive");
  require(!f.out.empty(), "missing --out");
  require_file(f.case_path, "case");

  const CaseFile file = load_case_file(f.case_path);
  const DispatchCase c = to_dispatch_case(file);
  const auto loads = sample_loads(c, static_cast<std::size_t>(f.count), f.fluct, f.seed);
  Dataset ds = build_dataset(file.name, c, loads, f.train_fraction, f.seed, f.tol);
  ds.fluctuation = f.fluct;
  save_dataset(ds, f.out);
  out << "wrote " << ds.samples.size() << " samples (" << ds.train.size() << " train, "
      << ds.test.size() << " test, " << c.generators() << " units, " << c.nodes()
      << " nodes) to " << f.out << "\n"
      << "dataset hash " << dataset_hash(ds) << "\n";
  return kExitOk;
}

struct TrainFlags {
  std::string dataset;
  std::string method;
  std::string out;
  std::string trace;
  std::string optimizer = "adam";
  std::string dependent = "first";
  double rho = 0.0;
  std::vector<double> rho_sweep;
  int epochs = 200;
  double lr = 1e-3;
  int batch = 20;
  std::uint64_t seed = 1;
  bool normalize = false;
  double center_shift = 0.0;
};

int cmd_train(const TrainFlags& f, std::ostream& out) {
  PipelineSpec spec;
  try {
    spec = PipelineSpec::parse(f.method);
  } catch (const Error& e) {
    throw ValidationFailure(e.what());
  }
  require(f.epochs >= 0, "--epochs must be nonnegative");
  require(f.lr > 0.0, "--lr must be positive");
  require(f.batch >= 0, "--batch must be nonnegative (0 means full batch)");
  require(f.optimizer == "adam" || f.optimizer == "sgd", "--optimizer must be adam or sgd");
  require(f.rho >= 0.0, "--rho must be nonnegative");
  for (const double r : f.rho_sweep) require(r >= 0.0, "--rho-sweep values must be nonnegative");
  require(f.rho_sweep.empty() || !spec.use_gauge, "--rho-sweep applies to the penalty method");
  require(std::abs(f.center_shift) < 1.0, "--center-shift must lie in (-1, 1)");
  require(f.center_shift == 0.0 || spec.use_gauge, "--center-shift applies to gauge methods");
  spec.center_shift = f.center_shift;
  require(!f.out.empty(), "missing --out");
  require_file(f.dataset, "dataset");

  const Dataset ds = load_dataset(f.dataset);
  require(!ds.train.empty(), "dataset has an empty train split");
  const std::string hash = dataset_hash(ds);
  Index dep = 0;
  if (f.dependent == "widest") {
    dep = widest_unit(ds.dispatch);
  } else if (f.dependent != "first") {
    try {
      std::size_t used = 0;
      dep = static_cast<Index>(std::stoll(f.dependent, &used));
      require(used == f.dependent.size(), "");
    } catch (const std::exception&) {
      throw ValidationFailure("--dependent must be first, widest or a unit index");
    }
    require(dep >= 0 && dep < ds.dispatch.generators(),
            "--dependent " + f.dependent + " is not a unit of this " +
                std::to_string(ds.dispatch.generators()) + "-unit case");
  }
  const Problem problem = Problem::make(ds.dispatch, dep);
  std::vector<PreparedSample> samples;
  std::vector<Vector> labels;
  for (const std::size_t i : ds.train) {
    samples.push_back(prepare_sample(problem, ds.samples[i].x, spec.center_shift));
    labels.push_back(ds.samples[i].u_star);
  }

  TrainConfig config;
  config.seed = f.seed;
  config.epochs = f.epochs;
  config.learning_rate = f.lr;
  config.batch_size = f.batch;
  config.optimizer = f.optimizer == "adam" ? OptimizerKind::adam : OptimizerKind::sgd;
  config.normalize_inputs = f.normalize;

  std::vector<std::pair<double, std::string>> runs;
  if (f.rho_sweep.empty()) {
    runs.emplace_back(f.rho, f.out);
  } else {
    for (const double r : f.rho_sweep) runs.emplace_back(r, with_suffix(f.out, ".rho" + fmt_g(r)));
  }

  for (const auto& [rho, path] : runs) {
    config.penalty_rho = spec.use_gauge ? 0.0 : rho;
    TrainResult result = train(spec, problem, samples, labels, config);
    Checkpoint ckpt;
    ckpt.model = std::move(result.model);
    ckpt.spec = spec;
    ckpt.config = config;
    ckpt.dependent_unit = dep;
    ckpt.case_name = ds.case_name;
    ckpt.dataset_hash = hash;
    ckpt.final_loss = result.trace.empty() ? 0.0 : result.trace.back();
    save_checkpoint(ckpt, path);
    const std::string trace_path =
        f.trace.empty() || !f.rho_sweep.empty()
            ? (f.trace.empty() ? default_trace_path(path)
                               : with_suffix(f.trace, ".rho" + fmt_g(rho)))
            : f.trace;
    write_text_file(trace_path, trace_to_csv(result.trace));
    out << row_label(ckpt) << ": " << config.epochs << " epochs, final loss "
        << fmt_g(ckpt.final_loss) << ", checkpoint " << path << ", trace " << trace_path
        << "\n";
  }
  return kExitOk;
}

struct EvalFlags {
  std::string dataset;
  std::vector<std::string> models;
  std::string out;
  std::string markdown;
  int reps = 100;
  int warmup = 10;
  bool parallel = false;
  bool no_projection = false;
};

int cmd_eval(const EvalFlags& f, std::ostream& out) {
  require(f.reps >= 100, "--reps must be at least 100");
  require(f.warmup >= 0, "--warmup must be nonnegative");
  require(!f.out.empty(), "missing --out");
  require_file(f.dataset, "dataset");
  for (const std::string& m : f.models) require_file(m, "model");

  const Dataset ds = load_dataset(f.dataset);
  const std::string hash = dataset_hash(ds);
  std::vector<Checkpoint> models;
  for (const std::string& m : f.models) {
    models.push_back(load_checkpoint(m));
    require(models.back().dataset_hash == hash,
            "model " + m + " was trained on dataset " + models.back().dataset_hash +
                " but " + f.dataset + " hashes to " + hash);
  }

  EvalOptions options;
  options.reps = f.reps;
  options.warmup = f.warmup;
  options.parallel = f.parallel;
  options.include_projection = !f.no_projection;
  const EvalReport report = evaluate(ds, models, options);

  write_text_file(f.out, report_to_json(report).dump(2) + "\n");
  const std::string table = report_markdown(report);
  if (!f.markdown.empty()) write_text_file(f.markdown, table);
  out << table;
  return kExitOk;
}

ShiftedSet load_set_spec(const std::string& spec) {
  if (spec == "triangle" || spec == "box" || spec == "dispatch3") return planar_preset(spec);
  require(fs::is_regular_file(spec),
          "--set must be triangle, box, dispatch3 or a JSON file; '" + spec + "' is neither");
  json j;
  try {
    j = json::parse(read_text_file(spec));
  } catch (const json::exception& e) {
    throw ValidationFailure("set file '" + spec + "' is not valid JSON: " + e.what());
  }
  try {
    const json& rows = j.at("a");
    const json& b = j.at("b");
    const json& center = j.at("center");
    require(rows.is_array() && !rows.empty(), "set file needs a nonempty \"a\" matrix");
    const auto m = static_cast<Index>(rows.size());
    const auto n = static_cast<Index>(rows[0].size());
    require(n == 2, "mapviz needs a 2-D set; '" + spec + "' has dimension " + std::to_string(n));
    require(static_cast<Index>(b.size()) == m, "set file: \"b\" must have one entry per row");
    require(center.size() == 2, "set file: \"center\" must have two entries");
    Matrix a(m, n);
    Vector bv(m);
    for (Index r = 0; r < m; ++r) {
      require(rows[static_cast<std::size_t>(r)].size() == 2, "set file: ragged \"a\" matrix");
      for (Index k = 0; k < n; ++k) {
        a(r, k) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)].get<double>();
      }
      bv[r] = b[static_cast<std::size_t>(r)].get<double>();
    }
    Vector c(2);
    c << center[0].get<double>(), center[1].get<double>();
    auto set = std::make_shared<const LinearInequalitySet>(a, Matrix(m, 0), bv);
    try {
      return ShiftedSet::around(std::move(set), Vector(0), c);
    } catch (const GeometryError& e) {
      throw ValidationFailure(std::string("set file: center is not strictly interior: ") +
                              e.what());
    }
  } catch (const json::exception& e) {
    throw ValidationFailure("set file '" + spec + "' is malformed: " + e.what());
  }
}

struct MapvizFlags {
  std::string set = "triangle";
  std::string layer = "generalized";
  std::string out;
  int res = 51;
  int bins = 10;
};

int cmd_mapviz(const MapvizFlags& f, std::ostream& out) {
  GaugeLayerConfig config;
  try {
    config = GaugeLayerConfig::parse(f.layer);
  } catch (const Error& e) {
    throw ValidationFailure(e.what());
  }
  require(f.res >= 2, "--res must be at least 2");
  require(f.bins >= 1, "--bins must be positive");
  require(!f.out.empty(), "missing --out");
  const ShiftedSet s = load_set_spec(f.set);
  require(s.dim() == 2, "mapviz needs a 2-D set");

  const auto pairs = sample_map_distribution(config, s, default_grid(config, s, f.res));
  std::string csv = "v1,v2,u1,u2\n";
  std::vector<Vector> mapped;
  mapped.reserve(pairs.size());
  char buf[128];
  for (const auto& [v, u] : pairs) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", v[0], v[1], u[0], u[1]);
    csv += buf;
    mapped.push_back(u);
  }
  write_text_file(f.out, csv);
  out << "wrote " << pairs.size() << " points to " << f.out << "\n"
      << "density_ratio " << fmt_g(binned_density_ratio(s, mapped, f.bins)) << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Feasible-by-construction neural economic dispatch", "looplc"};
  app.require_subcommand(1);

  GenDataFlags gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Sample loads from a MATPOWER case and label them");
  gen_cmd->add_option("--case", gen.case_path, "MATPOWER .m case file")->required();
  gen_cmd->add_option("--count", gen.count, "number of samples")->capture_default_str();
  gen_cmd->add_option("--fluct", gen.fluct, "relative load fluctuation")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "sampling and split seed")->capture_default_str();
  gen_cmd->add_option("--train-fraction", gen.train_fraction)->capture_default_str();
  gen_cmd->add_option("--tol", gen.tol, "oracle tolerance for labels")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "dataset JSON")->required();

  TrainFlags tr;
  auto* train_cmd = app.add_subcommand("train", "Train one method on a dataset");
  train_cmd->add_option("--dataset", tr.dataset)->required();
  train_cmd->add_option("--method", tr.method,
                        "penalty, traditional-gauge, generalized-gauge or variant:<name>")
      ->required();
  train_cmd->add_option("--rho", tr.rho, "penalty weight")->capture_default_str();
  train_cmd->add_option("--rho-sweep", tr.rho_sweep, "comma-separated penalty weights")
      ->delimiter(',');
  train_cmd->add_option("--epochs", tr.epochs)->capture_default_str();
  train_cmd->add_option("--lr", tr.lr)->capture_default_str();
  train_cmd->add_option("--batch", tr.batch, "mini-batch size, 0 for full batch")
      ->capture_default_str();
  train_cmd->add_option("--seed", tr.seed)->capture_default_str();
  train_cmd->add_option("--optimizer", tr.optimizer, "adam or sgd")->capture_default_str();
  train_cmd->add_option("--dependent", tr.dependent,
                        "unit whose output closes the balance: first, widest or an index")
      ->capture_default_str();
  train_cmd->add_flag("--normalize", tr.normalize, "standardize inputs over the train split");
  train_cmd->add_option("--center-shift", tr.center_shift,
                        "move the gauge center this fraction of the way to the boundary")
      ->capture_default_str();
  train_cmd->add_option("--out", tr.out, "checkpoint JSON")->required();
  train_cmd->add_option("--trace", tr.trace, "loss trace CSV (default <out>.trace.csv)");

  EvalFlags ev;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate checkpoints on the test split");
  eval_cmd->add_option("--dataset", ev.dataset)->required();
  eval_cmd->add_option("--model", ev.models, "checkpoint JSON (repeatable)")->required();
  eval_cmd->add_option("--out", ev.out, "report JSON")->required();
  eval_cmd->add_option("--markdown", ev.markdown, "also write the table here");
  eval_cmd->add_option("--reps", ev.reps, "timed passes per instance")->capture_default_str();
  eval_cmd->add_option("--warmup", ev.warmup, "discarded passes per instance")
      ->capture_default_str();
  eval_cmd->add_flag("--parallel", ev.parallel, "compute predictions on all cores");
  eval_cmd->add_flag("--no-projection", ev.no_projection, "skip the projection baseline");

  MapvizFlags mv;
  auto* map_cmd = app.add_subcommand("mapviz", "Map a 2-D grid through a layer");
  map_cmd->add_option("--set", mv.set, "triangle, box, dispatch3 or a JSON set file")
      ->capture_default_str();
  map_cmd->add_option("--layer", mv.layer, "generalized, traditional or variant:<name>")
      ->capture_default_str();
  map_cmd->add_option("--res", mv.res, "grid points per axis")->capture_default_str();
  map_cmd->add_option("--bins", mv.bins, "bins per axis for the density ratio")
      ->capture_default_str();
  map_cmd->add_option("--out", mv.out, "CSV with columns v1,v2,u1,u2")->required();

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.emplace_back("looplc");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const std::string& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*gen_cmd) return cmd_gen_data(gen, out);
    if (*train_cmd) return cmd_train(tr, out);
    if (*eval_cmd) return cmd_eval(ev, out);
    return cmd_mapviz(mv, out);
  } catch (const ValidationFailure& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace looplc
