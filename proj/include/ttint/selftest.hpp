#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ttint/oracle.hpp"

namespace ttint {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0;
};

/// Oracle of a random tensor train with bond ranks `ranks` (Gaussian cores).
FunctionOracle random_tt_oracle(const std::vector<int>& modes, const std::vector<int>& ranks, std::uint64_t seed);

/// Invariant and closed-form checks at desk scale.
std::vector<CheckResult> run_selftest(int workers = 2);

}  // namespace ttint
