#pragma once

// The check battery behind `sslab verify` and the acceptance binary. Each
// check is deterministic given its seed; results carry no timings.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace sslab::battery {

struct CheckResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string summary;
  nlohmann::ordered_json data;
};

struct Check {
  int id;
  const char* name;
  CheckResult (*run)(std::uint64_t seed);
};

/// Checks 1..11 in order.
const std::vector<Check>& checks();
const Check& find_check(int id);

CheckResult band_structure(std::uint64_t seed);
CheckResult closed_forms(std::uint64_t seed);
CheckResult power_residual(std::uint64_t seed);
CheckResult construction_certificate(std::uint64_t seed);
CheckResult window_checks(std::uint64_t seed);
CheckResult direction_monotonicity(std::uint64_t seed);
CheckResult complexity_formulas(std::uint64_t seed);
CheckResult ids_oracles(std::uint64_t seed);
CheckResult poly_bounded_decay(std::uint64_t seed);
CheckResult gap_closing(std::uint64_t seed);
CheckResult continuity_probes(std::uint64_t seed);

}  // namespace sslab::battery
