#include "looplc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "looplc/errors.hpp"
#include "looplc/oracle.hpp"

namespace looplc {

namespace {

using nlohmann::json;

json to_json_array(const Vector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vector vector_from_json(const json& j, const char* what) {
  if (!j.is_array()) throw Error(std::string("dataset field '") + what + "' must be an array");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = j[i].get<double>();
  return v;
}

}  // namespace

std::vector<Vector> sample_loads(const DispatchCase& c, std::size_t count,
                                 double fluctuation, std::uint64_t seed) {
  if (!(fluctuation >= 0.0 && fluctuation < 1.0)) {
    throw DomainError("load fluctuation must lie in [0, 1)");
  }
  const double lo = c.u_min.sum();
  const double hi = c.u_max.sum();
  const auto feasible = [&](const Vector& x) {
    const double d = c.net_demand(x);
    return d > lo && d < hi;
  };

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<Vector> out;
  out.reserve(count);
  const std::size_t cap = 100 * std::max<std::size_t>(count, 1);
  std::size_t draws = 0;
  while (out.size() < count) {
    if (draws++ >= cap) {
      throw DomainError("case too tight: " + std::to_string(cap) +
                        " draws produced only " + std::to_string(out.size()) +
                        " feasible load vectors");
    }
    Vector x = c.loads_nominal;
    for (Index i = 0; i < x.size(); ++i) x[i] *= 1.0 + fluctuation * unit(rng);
    if (feasible(x)) out.push_back(std::move(x));
  }
  return out;
}

Dataset build_dataset(std::string case_name, const DispatchCase& c,
                      const std::vector<Vector>& loads, double train_fraction,
                      std::uint64_t seed, double label_tol) {
  if (!(train_fraction >= 0.0 && train_fraction <= 1.0)) {
    throw DomainError("train fraction must lie in [0, 1]");
  }
  Dataset ds;
  ds.case_name = std::move(case_name);
  ds.dispatch = c;
  ds.seed = seed;
  ds.label_tol = label_tol;
  ds.samples.reserve(loads.size());
  for (const Vector& x : loads) ds.samples.push_back({x, solve_dispatch_exact(c, x, label_tol)});

  std::vector<std::size_t> order(loads.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed ^ 0x5851f42d4c957f2dULL);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train =
      static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(loads.size())));
  ds.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  ds.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return ds;
}

json dispatch_to_json(const DispatchCase& c) {
  return json{{"u_min", to_json_array(c.u_min)},
              {"u_max", to_json_array(c.u_max)},
              {"cost_quadratic", to_json_array(c.cost_quadratic)},
              {"cost_linear", to_json_array(c.cost_linear)},
              {"loads_nominal", to_json_array(c.loads_nominal)},
              {"fixed_output", c.fixed_output}};
}

DispatchCase dispatch_from_json(const json& j) {
  DispatchCase c;
  c.u_min = vector_from_json(j.at("u_min"), "u_min");
  c.u_max = vector_from_json(j.at("u_max"), "u_max");
  c.cost_quadratic = vector_from_json(j.at("cost_quadratic"), "cost_quadratic");
  c.cost_linear = vector_from_json(j.at("cost_linear"), "cost_linear");
  c.loads_nominal = vector_from_json(j.at("loads_nominal"), "loads_nominal");
  c.fixed_output = j.at("fixed_output").get<double>();
  c.validate();
  return c;
}

json dataset_to_json(const Dataset& ds) {
  json samples = json::array();
  for (const Sample& s : ds.samples) {
    samples.push_back(json{{"x", to_json_array(s.x)}, {"u_star", to_json_array(s.u_star)}});
  }
  return json{{"schema", kDatasetSchema},
              {"case_name", ds.case_name},
              {"seed", ds.seed},
              {"fluctuation", ds.fluctuation},
              {"label_tol", ds.label_tol},
              {"units", "per-unit"},
              {"case", dispatch_to_json(ds.dispatch)},
              {"samples", std::move(samples)},
              {"split", json{{"train", ds.train}, {"test", ds.test}}}};
}

Dataset dataset_from_json(const json& j) {
  try {
    if (j.at("schema").get<std::string>() != kDatasetSchema) {
      throw Error("unsupported dataset schema '" + j.at("schema").get<std::string>() + "'");
    }
    Dataset ds;
    ds.case_name = j.at("case_name").get<std::string>();
    ds.seed = j.at("seed").get<std::uint64_t>();
    ds.fluctuation = j.at("fluctuation").get<double>();
    ds.label_tol = j.at("label_tol").get<double>();
    ds.dispatch = dispatch_from_json(j.at("case"));
    for (const json& s : j.at("samples")) {
      Sample sample{vector_from_json(s.at("x"), "x"), vector_from_json(s.at("u_star"), "u_star")};
      if (sample.x.size() != ds.dispatch.nodes() ||
          sample.u_star.size() != ds.dispatch.generators()) {
        throw DimensionError("dataset sample does not match the case dimensions");
      }
      ds.samples.push_back(std::move(sample));
    }
    ds.train = j.at("split").at("train").get<std::vector<std::size_t>>();
    ds.test = j.at("split").at("test").get<std::vector<std::size_t>>();

    std::vector<char> seen(ds.samples.size(), 0);
    for (const auto* part : {&ds.train, &ds.test}) {
      for (const std::size_t i : *part) {
        if (i >= ds.samples.size() || seen[i]) {
          throw Error("dataset split is not a partition of the samples");
        }
        seen[i] = 1;
      }
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
      throw Error("dataset split does not cover every sample");
    }
    return ds;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed dataset: ") + e.what());
  }
}

std::string serialize_dataset(const Dataset& ds) { return dataset_to_json(ds).dump(2) + "\n"; }

Dataset parse_dataset(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("dataset is not valid JSON: ") + e.what());
  }
  return dataset_from_json(j);
}

void save_dataset(const Dataset& ds, const std::string& path) {
  write_text_file(path, serialize_dataset(ds));
}

Dataset load_dataset(const std::string& path) { return parse_dataset(read_text_file(path)); }

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string dataset_hash(const Dataset& ds) { return fnv1a_hex(serialize_dataset(ds)); }

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace looplc
