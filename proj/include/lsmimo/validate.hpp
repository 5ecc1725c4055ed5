#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lsmimo {

struct CheckResult {
  std::string name;
  bool passed;
  std::string detail;
};

/// Invariant suite independent of any tuned scenario: fixed-point residuals, ordering and
/// collapse identities of the deterministic equivalents, random-matrix concentration,
/// linear-solve agreement, power-decomposition completeness and run-to-run determinism.
std::vector<CheckResult> run_property_suite(std::uint64_t seed);

}  // namespace lsmimo
