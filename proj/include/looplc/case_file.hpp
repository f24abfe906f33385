#pragma once

#include <string>
#include <vector>

#include "looplc/dispatch.hpp"

namespace looplc {

struct BusRecord {
  long id = 0;
  double pd = 0.0;  // per unit
};

struct GenRecord {
  long bus = 0;
  double pmax = 0.0;  // per unit
  double pmin = 0.0;  // per unit
  double status = 1.0;
};

/// Polynomial cost c2 P^2 + c1 P + c0 with P in per unit.
struct GenCost {
  double c2 = 0.0;
  double c1 = 0.0;
  double c0 = 0.0;
};

/// The subset of a MATPOWER case needed for economic dispatch. Powers are
/// converted to per unit on `base_mva` and the cost coefficients rescaled
/// so that costs are unchanged.
struct CaseFile {
  std::string name;
  double base_mva = 100.0;
  std::vector<BusRecord> buses;
  std::vector<GenRecord> gens;
  std::vector<GenCost> costs;
};

/// Parses MATPOWER .m text: mpc.baseMVA, mpc.bus, mpc.gen and mpc.gencost.
/// Throws ParseError with the offending line.
CaseFile parse_case(const std::string& text);

/// Reads and parses a file; the case name defaults to the file stem.
CaseFile load_case_file(const std::string& path);

/// Dispatch model of a case: in-service units only, units with PMIN == PMAX
/// folded into fixed_output, one load node per bus.
DispatchCase to_dispatch_case(const CaseFile& file);

}  // namespace looplc
