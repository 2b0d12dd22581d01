#include "cvqkd/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace cvqkd {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string rates_csv(const std::vector<RatePoint>& points) {
  std::string out = "s,I_nats,chi_nats,R_nats,cutoff,tail_mass,classicality\n";
  for (const auto& p : points) {
    out += format_number(p.s) + ',' + format_number(p.I) + ',' + format_number(p.chi) + ',' +
           format_number(p.R) + ',' + std::to_string(p.cutoff) + ',' + format_number(p.tail_mass) +
           ',' + format_number(p.classicality) + '\n';
  }
  return out;
}

std::string boundary_csv(const BoundaryCurve& curve) {
  std::string out = "omega_hz,r_e_star,method,bracket_lo,bracket_hi,status\n";
  for (const auto& p : curve) {
    out += format_number(p.omega) + ',' + (p.r_star ? format_number(*p.r_star) : std::string()) +
           ',' + to_string(p.method) + ',' + format_number(p.bracket_lo) + ',' +
           format_number(p.bracket_hi) + ',' + p.status + '\n';
  }
  return out;
}

std::string wigner_csv(const WignerGrid& grid) {
  std::string out = "x,p,w\n";
  for (std::size_t i = 0; i < grid.x_axis.size(); ++i)
    for (std::size_t j = 0; j < grid.p_axis.size(); ++j)
      out += format_number(grid.x_axis[i]) + ',' + format_number(grid.p_axis[j]) + ',' +
             format_number(grid.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) + '\n';
  return out;
}

void write_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open '" + tmp + "' for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw std::runtime_error("write to '" + tmp + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

nlohmann::json config_to_json(const ConfigFile& cfg) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [section, keys] : cfg.sections()) {
    j[section] = nlohmann::json::object();
    for (const auto& [key, entry] : keys) j[section][key] = entry.value;
  }
  return j;
}

nlohmann::json make_manifest(const std::string& command, const ConfigFile& cfg,
                             const nlohmann::json& diagnostics,
                             const std::vector<std::string>& outputs) {
  nlohmann::json j;
  j["command"] = command;
  j["tool"] = "cvqkd";
  j["version"] = kToolVersion;
  j["config"] = config_to_json(cfg);
  j["outputs"] = outputs;
  j["diagnostics"] = diagnostics;
  return j;
}

}  // namespace cvqkd
