#include "looplc/gauge.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "looplc/errors.hpp"

namespace looplc {

namespace {

constexpr double kBallGaugeFloor = 1e-12;
constexpr double kBallDomainSlack = 1e-9;

// Substitution g applied to the unit-ball gauge, and its derivative.
double substitute(GaugeKind kind, double p, double psi) {
  switch (kind) {
    case GaugeKind::variant_power: return std::pow(psi, p);
    case GaugeKind::variant_exp: return std::expm1(psi) / (std::numbers::e - 1.0);
    case GaugeKind::variant_log: return std::log1p(psi) / std::numbers::ln2;
    default: return psi;
  }
}

double substitute_derivative(GaugeKind kind, double p, double psi) {
  switch (kind) {
    case GaugeKind::variant_power: return p * std::pow(psi, p - 1.0);
    case GaugeKind::variant_exp: return std::exp(psi) / (std::numbers::e - 1.0);
    case GaugeKind::variant_log: return 1.0 / ((1.0 + psi) * std::numbers::ln2);
    default: return 1.0;
  }
}

Vector row_weights(const ShiftedSet& s, Index row) {
  return s.base().a().row(row).transpose() / s.slack()[row];
}

std::pair<Vector, LayerTape> ball_layer_forward(GaugeKind kind, double p,
                                                const ShiftedSet& s, const Vector& v) {
  if (v.size() != s.dim()) throw DimensionError("layer input does not match the set");
  LayerTape tape;
  tape.kind = kind;
  tape.power_p = p;
  tape.input = v;
  tape.psi_ball = unit_ball_gauge(v);
  if (tape.psi_ball > 1.0 + kBallDomainSlack) {
    throw DomainError("unit-ball gauge layer got an input with max |v| = " +
                      std::to_string(tape.psi_ball));
  }
  if (tape.psi_ball < kBallGaugeFloor) {
    tape.at_center = true;
    return {s.center(), std::move(tape)};
  }
  tape.ball_row = unit_ball_argmax(v);
  const GaugeValue psi = shifted_set_gauge_argmax(s, v);
  if (!(psi.value > kDenominatorFloor)) {
    throw GeometryError("set gauge vanishes for a nonzero direction; is the set bounded?",
                        psi.row);
  }
  tape.psi_set = psi.value;
  tape.set_row = psi.row;
  tape.set_row_weights = row_weights(s, psi.row);
  const double scale = substitute(kind, p, tape.psi_ball) / psi.value;
  return {scale * v + s.center(), std::move(tape)};
}

}  // namespace

GaugeLayerConfig GaugeLayerConfig::parse(const std::string& text) {
  if (text == "traditional" || text == "traditional-gauge") return {GaugeKind::traditional};
  if (text == "generalized" || text == "generalized-gauge") return {GaugeKind::generalized};
  if (text == "variant:exp") return {GaugeKind::variant_exp};
  if (text == "variant:log") return {GaugeKind::variant_log};
  const std::string power_prefix = "variant:power:";
  if (text.rfind(power_prefix, 0) == 0) {
    const std::string tail = text.substr(power_prefix.size());
    std::size_t used = 0;
    double p = 0.0;
    try {
      p = std::stod(tail, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tail.size() || tail.empty() || !(p > 0.0) || !std::isfinite(p)) {
      throw DomainError("variant power must be a positive number, got '" + tail + "'");
    }
    return {GaugeKind::variant_power, p};
  }
  throw DomainError("unknown gauge layer '" + text + "'");
}

std::string GaugeLayerConfig::name() const {
  switch (kind) {
    case GaugeKind::traditional: return "traditional";
    case GaugeKind::generalized: return "generalized";
    case GaugeKind::variant_exp: return "variant:exp";
    case GaugeKind::variant_log: return "variant:log";
    case GaugeKind::variant_power: {
      std::ostringstream os;
      os.precision(17);
      os << "variant:power:" << power_p;
      return os.str();
    }
  }
  return "unknown";
}

std::pair<Vector, LayerTape> traditional_gauge_forward(const ShiftedSet& s,
                                                       const Vector& v_hat) {
  return ball_layer_forward(GaugeKind::traditional, 1.0, s, v_hat);
}

std::pair<Vector, LayerTape> variant_gauge_forward(const GaugeLayerConfig& config,
                                                   const ShiftedSet& s,
                                                   const Vector& v_hat) {
  if (config.kind == GaugeKind::generalized) {
    throw DomainError("variant_gauge_forward called with the generalized layer");
  }
  if (config.kind == GaugeKind::variant_power && !(config.power_p > 0.0)) {
    throw DomainError("variant power must be positive");
  }
  return ball_layer_forward(config.kind, config.power_p, s, v_hat);
}

std::pair<Vector, LayerTape> generalized_gauge_forward(const ShiftedSet& s,
                                                       const Vector& v_hat) {
  if (v_hat.size() != s.dim()) throw DimensionError("layer input does not match the set");
  LayerTape tape;
  tape.kind = GaugeKind::generalized;
  tape.input = v_hat;
  const GaugeValue psi = shifted_set_gauge_argmax(s, v_hat);
  tape.psi_set = psi.value;
  tape.set_row = psi.row;
  if (psi.value <= 1.0) {
    tape.identity = true;
    return {v_hat + s.center(), std::move(tape)};
  }
  tape.set_row_weights = row_weights(s, psi.row);
  return {v_hat / psi.value + s.center(), std::move(tape)};
}

std::pair<Vector, LayerTape> gauge_forward(const GaugeLayerConfig& config,
                                           const ShiftedSet& s, const Vector& v_hat) {
  switch (config.kind) {
    case GaugeKind::generalized: return generalized_gauge_forward(s, v_hat);
    case GaugeKind::traditional: return traditional_gauge_forward(s, v_hat);
    default: return variant_gauge_forward(config, s, v_hat);
  }
}

Vector gauge_backward(LayerTape& tape, const Vector& upstream) {
  if (tape.consumed) throw DomainError("layer tape already consumed by a backward pass");
  if (upstream.size() != tape.input.size()) {
    throw DimensionError("cotangent does not match the layer input");
  }
  tape.consumed = true;
  const Vector& v = tape.input;

  if (tape.kind == GaugeKind::generalized) {
    if (tape.identity) return upstream;
    const double psi = tape.psi_set;
    return upstream / psi - (upstream.dot(v) / (psi * psi)) * tape.set_row_weights;
  }

  // No unique linearization at the center; use the zero subgradient.
  if (tape.at_center) return Vector::Zero(v.size());

  const double psi_b = tape.psi_ball;
  const double psi_s = tape.psi_set;
  const double h = substitute(tape.kind, tape.power_p, psi_b);
  const double dh = substitute_derivative(tape.kind, tape.power_p, psi_b);
  const double proj = upstream.dot(v);
  Vector grad = (h / psi_s) * upstream - (proj * h / (psi_s * psi_s)) * tape.set_row_weights;
  const double sign = v[tape.ball_row] >= 0.0 ? 1.0 : -1.0;
  grad[tape.ball_row] += proj * dh / psi_s * sign;
  return grad;
}

std::vector<std::pair<Vector, Vector>> sample_map_distribution(
    const GaugeLayerConfig& config, const ShiftedSet& s, const std::vector<Vector>& grid) {
  std::vector<std::pair<Vector, Vector>> out;
  out.reserve(grid.size());
  for (const Vector& v : grid) out.emplace_back(v, gauge_forward(config, s, v).first);
  return out;
}

}  // namespace looplc
