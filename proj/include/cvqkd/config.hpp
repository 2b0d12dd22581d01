#pragma once

// Plain-text scenario configuration.
//
//   # comment
//   [scenario]
//   r_E2 = 0.01
//   omega_hz = 2e13
//
// Sections: scenario, constellation, sweep, output. Unknown sections or keys are errors
// reported with their line number.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cvqkd/boundary.hpp"
#include "cvqkd/fock.hpp"

namespace cvqkd {

class ConfigFile {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };
  using Section = std::map<std::string, Entry>;

  static ConfigFile parse(const std::string& text);
  static ConfigFile load(const std::string& path);
  /// Rebuilds a configuration from the "config" object of a run manifest.
  static ConfigFile from_manifest(const std::string& json_text);

  bool has(const std::string& section, const std::string& key) const;
  const Entry* find(const std::string& section, const std::string& key) const;

  std::optional<double> get_double(const std::string& section, const std::string& key) const;
  std::optional<int> get_int(const std::string& section, const std::string& key) const;
  std::optional<std::string> get_string(const std::string& section, const std::string& key) const;
  std::optional<cplx> get_complex(const std::string& section, const std::string& key) const;
  std::optional<std::vector<double>> get_doubles(const std::string& section,
                                                 const std::string& key) const;
  std::optional<std::vector<cplx>> get_complexes(const std::string& section,
                                                 const std::string& key) const;

  [[noreturn]] void fail(const std::string& section, const std::string& key,
                         const std::string& message) const;

  const std::map<std::string, Section>& sections() const { return sections_; }

 private:
  std::map<std::string, Section> sections_;
};

/// "1.5", "-2i", "0.3-0.4i", "i"
cplx parse_complex(const std::string& text);

struct SweepSettings {
  std::vector<double> s_grid;
  std::vector<double> omegas;
  std::string boundary_method = "both";  // weak | numeric | both
  BoundaryOptions boundary;
};

struct WignerSettings {
  double s = 1.0;
  int mode = 2;  // environment mode kept: 2 or 3
  std::optional<GridSpec> grid;
};

struct RunSettings {
  ScenarioConfig scenario;
  BoundaryScenario boundary_scenario;
  bool temperature_given = false;
  SweepSettings sweep;
  WignerSettings wigner;
  int threads = 1;
};

/// Validates and resolves every field; throws ConfigError naming line and field.
RunSettings resolve(const ConfigFile& cfg);

}  // namespace cvqkd
