#pragma once

#include <string>
#include <vector>

namespace holosense {

// One invariant check: passes when measured <= tolerance * scale.
struct CheckResult {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  bool all_passed() const;
  std::string render() const;
};

// Invariant and oracle checks of every module on small lattices (n <= 6).
ValidationReport run_validation(double tolerance_scale = 1.0);

}  // namespace holosense
