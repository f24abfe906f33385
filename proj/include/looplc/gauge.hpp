#pragma once

#include <string>
#include <utility>
#include <vector>

#include "looplc/linalg.hpp"
#include "looplc/polytope.hpp"

namespace looplc {

enum class GaugeKind { traditional, variant_power, variant_exp, variant_log, generalized };

/// Which feasibility layer to apply and its shape parameter.
struct GaugeLayerConfig {
  GaugeKind kind = GaugeKind::generalized;
  double power_p = 1.0;  // only read for variant_power

  /// True for layers whose domain is the l-infinity unit ball.
  bool needs_unit_ball() const noexcept { return kind != GaugeKind::generalized; }

  /// Parses "traditional", "generalized", "variant:power:<p>", "variant:exp"
  /// or "variant:log".
  static GaugeLayerConfig parse(const std::string& text);
  /// Inverse of parse.
  std::string name() const;
};

/// Forward intermediates needed by gauge_backward. Single use.
struct LayerTape {
  GaugeKind kind = GaugeKind::generalized;
  double power_p = 1.0;
  Vector input;
  Vector set_row_weights;  // A_r* / slack_r* for the active row
  double psi_ball = 0.0;
  Index ball_row = 0;
  double psi_set = 0.0;
  Index set_row = 0;
  bool identity = false;   // generalized map left the input untouched
  bool at_center = false;  // unit-ball layers saw a zero input
  bool consumed = false;
};

/// u = (psi_B(v) / psi_S(v)) v + center for v in the unit ball.
std::pair<Vector, LayerTape> traditional_gauge_forward(const ShiftedSet& s,
                                                       const Vector& v_hat);

/// Traditional map with psi_B in the numerator replaced by g(psi_B), where g
/// is psi^p, (e^psi - 1)/(e - 1) or log(psi + 1)/log 2.
std::pair<Vector, LayerTape> variant_gauge_forward(const GaugeLayerConfig& config,
                                                   const ShiftedSet& s,
                                                   const Vector& v_hat);

/// u = v / max(1, psi_S(v)) + center for any v.
std::pair<Vector, LayerTape> generalized_gauge_forward(const ShiftedSet& s,
                                                       const Vector& v_hat);

/// Dispatches on config.kind.
std::pair<Vector, LayerTape> gauge_forward(const GaugeLayerConfig& config,
                                           const ShiftedSet& s, const Vector& v_hat);

/// Vector-Jacobian product of the forward map recorded in `tape`. Marks the
/// tape consumed; a second call throws DomainError.
Vector gauge_backward(LayerTape& tape, const Vector& upstream);

/// Maps every grid point through the configured layer, returning
/// (v_hat, u) pairs.
std::vector<std::pair<Vector, Vector>> sample_map_distribution(
    const GaugeLayerConfig& config, const ShiftedSet& s, const std::vector<Vector>& grid);

}  // namespace looplc
