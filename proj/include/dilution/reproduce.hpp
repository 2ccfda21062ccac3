#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dilution {

struct CheckResult {
  /// Acceptance criterion number.
  int criterion;
  std::string name;
  std::string target;
  std::string computed;
  std::string tolerance;
  bool passed;
  double seconds;
};

struct ReproduceOptions {
  /// Criteria to run; empty runs all desk-reproducible ones (1-8, 10).
  std::vector<int> only;
  std::size_t replicates = 100000;
  std::uint64_t seed = 20240601;
};

/// Runs the numerical reproduction checks. Sub-checks of a criterion share
/// its number; runtime limits are separate rows.
std::vector<CheckResult> run_reproduction(const ReproduceOptions& options = {});

/// Fixed-width table: criterion, check, target, computed, tolerance, status.
std::string format_table(const std::vector<CheckResult>& results);

}  // namespace dilution
