#pragma once

#include <string>
#include <vector>

namespace algnn::selftest {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Runs the in-library invariant suite (algebra axioms, kernel equivalence,
/// cost constants, a gradient spot check, schedule arithmetic). Used by the
/// `selftest` CLI command.
std::vector<CheckResult> run_all();

}  // namespace algnn::selftest
