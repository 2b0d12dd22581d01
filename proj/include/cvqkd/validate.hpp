#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cvqkd/config.hpp"

namespace cvqkd {

enum class CheckStatus { pass, fail, skipped };

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::pass;
  std::string detail;
  double seconds = 0.0;
};

struct ValidationOptions {
  /// Optional extra check that reruns a CLI command and compares output bytes.
  std::function<CheckResult()> determinism_check;
  int threads = 1;
};

/// Oracle cross-checks and invariants for the scenario in `rs`, at reduced cutoffs.
std::vector<CheckResult> run_validation(const RunSettings& rs, const ValidationOptions& opt = {});

std::string to_string(CheckStatus s);

}  // namespace cvqkd
