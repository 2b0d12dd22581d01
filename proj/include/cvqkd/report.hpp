#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "cvqkd/boundary.hpp"
#include "cvqkd/config.hpp"

namespace cvqkd {

inline constexpr const char* kToolVersion = "1.0.0";

/// Shortest round-trip-safe rendering with 17 significant digits; locale independent.
std::string format_number(double x);

std::string rates_csv(const std::vector<RatePoint>& points);
std::string boundary_csv(const BoundaryCurve& curve);
std::string wigner_csv(const WignerGrid& grid);

/// Writes `content` to `path` via a temporary sibling and rename.
void write_atomic(const std::string& path, const std::string& content);

/// Resolved configuration as section -> key -> string, suitable for the manifest.
nlohmann::json config_to_json(const ConfigFile& cfg);

nlohmann::json make_manifest(const std::string& command, const ConfigFile& cfg,
                             const nlohmann::json& diagnostics,
                             const std::vector<std::string>& outputs);

}  // namespace cvqkd
