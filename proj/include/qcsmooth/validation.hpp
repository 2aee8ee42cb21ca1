#pragma once

// Property suite behind `qcsmooth validate`.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace qcsmooth {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationOptions {
  /// Adds the ensemble-scale checks (thousands of trajectories).
  bool full = false;
  std::uint64_t seed = 20190101;
  /// 0 selects the hardware concurrency.
  unsigned workers = 0;
};

/// Runs every check; `on_result` (if set) sees each result as soon as it is known.
std::vector<CheckResult> run_property_suite(const ValidationOptions& opts,
                                            const std::function<void(const CheckResult&)>& on_result = {});

}  // namespace qcsmooth
