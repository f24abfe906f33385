#include "looplc/case_file.hpp"

#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include "looplc/errors.hpp"

namespace looplc {

namespace {

struct RawRow {
  std::vector<std::string> tokens;
  std::size_t line = 0;
};

struct RawBlock {
  std::size_t line = 0;  // line of the opening bracket
  std::vector<RawRow> rows;
};

std::string strip_comment(const std::string& line) {
  bool in_quote = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '\'') in_quote = !in_quote;
    if (line[i] == '%' && !in_quote) return line.substr(0, i);
  }
  return line;
}

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Splits `body` into rows at ';' and tokens at whitespace or ','.
void append_rows(const std::string& body, std::size_t line, RawBlock& block,
                 RawRow& pending) {
  std::string token;
  const auto flush_token = [&]() {
    if (!token.empty()) pending.tokens.push_back(std::move(token));
    token.clear();
  };
  const auto flush_row = [&]() {
    flush_token();
    if (!pending.tokens.empty()) block.rows.push_back(std::move(pending));
    pending = RawRow{};
  };
  for (const char ch : body) {
    if (ch == ';') {
      flush_row();
    } else if (std::isspace(static_cast<unsigned char>(ch)) || ch == ',') {
      flush_token();
    } else {
      if (pending.tokens.empty() && token.empty()) pending.line = line;
      token.push_back(ch);
    }
  }
  flush_row();  // a newline also ends a row
}

std::optional<double> to_number(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    if (s == "Inf" || s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-Inf" || s == "-inf") return -std::numeric_limits<double>::infinity();
    return std::nullopt;
  }
  return v;
}

std::vector<double> numeric_row(const RawRow& row, std::size_t min_cols,
                                const std::string& block) {
  if (row.tokens.size() < min_cols) {
    throw ParseError("malformed row in mpc." + block + ": expected at least " +
                         std::to_string(min_cols) + " columns, found " +
                         std::to_string(row.tokens.size()),
                     row.line);
  }
  std::vector<double> values;
  values.reserve(row.tokens.size());
  for (const std::string& t : row.tokens) {
    const auto v = to_number(t);
    if (!v) throw ParseError("malformed row in mpc." + block + ": '" + t + "' is not a number", row.line);
    values.push_back(*v);
  }
  return values;
}

}  // namespace

CaseFile parse_case(const std::string& text) {
  std::map<std::string, RawBlock> blocks;
  std::optional<double> base_mva;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;

  std::string open_name;  // matrix block being read
  bool in_cell = false;   // skipping a cell array
  RawRow pending;

  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;

    if (in_cell) {
      if (line.find('}') != std::string::npos) in_cell = false;
      continue;
    }
    if (!open_name.empty()) {
      const std::size_t close = line.find(']');
      append_rows(line.substr(0, close), line_no, blocks[open_name], pending);
      if (close != std::string::npos) open_name.clear();
      continue;
    }
    if (line.rfind("mpc.", 0) != 0) continue;

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string name = trim(line.substr(4, eq - 4));
    const std::string rhs = trim(line.substr(eq + 1));
    if (!rhs.empty() && rhs.front() == '[') {
      RawBlock& block = blocks[name];
      block = RawBlock{line_no, {}};
      pending = RawRow{};
      const std::size_t close = rhs.find(']');
      append_rows(rhs.substr(1, close == std::string::npos ? std::string::npos : close - 1),
                  line_no, block, pending);
      if (close == std::string::npos) open_name = name;
    } else if (!rhs.empty() && rhs.front() == '{') {
      in_cell = rhs.find('}') == std::string::npos;
    } else if (name == "baseMVA") {
      std::string value = rhs;
      if (!value.empty() && value.back() == ';') value.pop_back();
      const auto v = to_number(trim(value));
      if (!v || !(*v > 0.0)) throw ParseError("baseMVA must be a positive number", line_no);
      base_mva = *v;
    }
  }
  if (!open_name.empty()) {
    throw ParseError("unterminated mpc." + open_name + " block", line_no);
  }

  const auto require = [&](const std::string& name) -> const RawBlock& {
    const auto it = blocks.find(name);
    if (it == blocks.end()) throw ParseError("missing mpc." + name + " block", line_no);
    if (it->second.rows.empty()) throw ParseError("empty mpc." + name + " block", it->second.line);
    return it->second;
  };
  const RawBlock& bus_block = require("bus");
  const RawBlock& gen_block = require("gen");
  const RawBlock& cost_block = require("gencost");

  CaseFile cf;
  cf.base_mva = base_mva.value_or(100.0);
  const double base = cf.base_mva;

  std::map<long, std::size_t> bus_index;
  for (const RawRow& row : bus_block.rows) {
    const auto v = numeric_row(row, 3, "bus");
    BusRecord b{static_cast<long>(v[0]), v[2] / base};
    if (!bus_index.emplace(b.id, cf.buses.size()).second) {
      throw ParseError("duplicate bus id " + std::to_string(b.id), row.line);
    }
    cf.buses.push_back(b);
  }

  for (const RawRow& row : gen_block.rows) {
    const auto v = numeric_row(row, 10, "gen");
    GenRecord g{static_cast<long>(v[0]), v[8] / base, v[9] / base, v[7]};
    if (!bus_index.count(g.bus)) {
      throw ParseError("generator references unknown bus " + std::to_string(g.bus), row.line);
    }
    cf.gens.push_back(g);
  }

  if (cost_block.rows.size() < cf.gens.size()) {
    throw ParseError("mpc.gencost has " + std::to_string(cost_block.rows.size()) +
                         " rows for " + std::to_string(cf.gens.size()) + " generators",
                     cost_block.line);
  }
  for (std::size_t i = 0; i < cf.gens.size(); ++i) {
    const RawRow& row = cost_block.rows[i];
    const auto v = numeric_row(row, 4, "gencost");
    if (v[0] != 2.0) {
      throw ParseError("unsupported cost model " + row.tokens[0] +
                           " (only polynomial model 2 is accepted)",
                       row.line);
    }
    const auto n = static_cast<long>(v[3]);
    if (n < 0 || static_cast<double>(n) != v[3]) {
      throw ParseError("gencost coefficient count must be a nonnegative integer", row.line);
    }
    if (n > 3) throw ParseError("unsupported cost model: polynomial degree above 2", row.line);
    if (v.size() < static_cast<std::size_t>(4 + n)) {
      throw ParseError("gencost row lists fewer than " + std::to_string(n) + " coefficients",
                       row.line);
    }
    // Coefficients are stored highest degree first.
    double coef[3] = {0.0, 0.0, 0.0};  // c0, c1, c2
    for (long k = 0; k < n; ++k) coef[n - 1 - k] = v[static_cast<std::size_t>(4 + k)];
    cf.costs.push_back(GenCost{coef[2] * base * base, coef[1] * base, coef[0]});
  }
  return cf;
}

CaseFile load_case_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open case file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  CaseFile cf = parse_case(buf.str());
  cf.name = std::filesystem::path(path).stem().string();
  return cf;
}

DispatchCase to_dispatch_case(const CaseFile& file) {
  std::vector<std::size_t> active;
  double fixed = 0.0;
  for (std::size_t i = 0; i < file.gens.size(); ++i) {
    const GenRecord& g = file.gens[i];
    if (!(g.status > 0.0)) continue;
    if (g.pmax == g.pmin) {
      fixed += g.pmax;
      continue;
    }
    active.push_back(i);
  }
  const auto g = static_cast<Index>(active.size());
  DispatchCase c;
  c.u_min.resize(g);
  c.u_max.resize(g);
  c.cost_quadratic.resize(g);
  c.cost_linear.resize(g);
  for (Index k = 0; k < g; ++k) {
    const std::size_t i = active[static_cast<std::size_t>(k)];
    c.u_min[k] = file.gens[i].pmin;
    c.u_max[k] = file.gens[i].pmax;
    c.cost_quadratic[k] = file.costs[i].c2;
    c.cost_linear[k] = file.costs[i].c1;
  }
  c.loads_nominal.resize(static_cast<Index>(file.buses.size()));
  for (std::size_t b = 0; b < file.buses.size(); ++b) {
    c.loads_nominal[static_cast<Index>(b)] = file.buses[b].pd;
  }
  c.fixed_output = fixed;
  c.validate();
  return c;
}

}  // namespace looplc
