#pragma once

#include <iosfwd>
#include <optional>
#include <string>

namespace cvqkd {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitNumeric = 2,
  kExitPartial = 3,
};

struct CommandOptions {
  std::string config_path;  // INI file or a manifest.json from an earlier run
  std::string out_dir = ".";
  std::optional<int> threads;
  bool seedless = false;
};

int cmd_rate_sweep(const CommandOptions& opt, std::ostream& out, std::ostream& err);
int cmd_boundary(const CommandOptions& opt, std::ostream& out, std::ostream& err);
int cmd_wigner(const CommandOptions& opt, std::ostream& out, std::ostream& err);
/// Runs the oracle cross-check suite; without a config the reference scenario
/// n = 0.3, mu = 0.6, r_E = 0.5 is used.
int cmd_validate(const CommandOptions& opt, std::ostream& out, std::ostream& err);

}  // namespace cvqkd
