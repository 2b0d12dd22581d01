#include "cvqkd/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace cvqkd {

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"scenario",
       {"n", "t_channel", "source_t", "source_r", "source_n0", "source_n_a", "r_E", "r_E2", "mu",
        "omega_hz", "temperature_k", "temperature_rule", "theta", "lambda"}},
      {"constellation", {"family", "scale", "order", "phase", "grid_nx", "grid_ny", "points", "probs"}},
      {"sweep",
       {"s_values", "s_min", "s_max", "s_count", "s_spacing", "omega_values", "omega_min",
        "omega_max", "omega_count", "method", "r_lo", "r_hi", "tolerance"}},
      {"output", {"threads", "wigner_s", "wigner_mode", "x_min", "x_max", "p_min", "p_max", "nx", "np"}},
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

double parse_double_strict(const std::string& text) {
  std::size_t used = 0;
  const double v = std::stod(text, &used);
  if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
  return v;
}

}  // namespace

cplx parse_complex(const std::string& raw) {
  std::string t;
  for (char c : raw)
    if (!std::isspace(static_cast<unsigned char>(c))) t.push_back(c);
  if (t.empty()) throw std::invalid_argument("empty complex literal");
  if (t.back() != 'i' && t.back() != 'j') return parse_double_strict(t);
  t.pop_back();
  // split at the last sign that is not an exponent sign or the leading sign
  std::size_t split = std::string::npos;
  for (std::size_t k = t.size(); k-- > 1;) {
    if ((t[k] == '+' || t[k] == '-') && t[k - 1] != 'e' && t[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  auto imag_part = [](const std::string& s) {
    if (s.empty() || s == "+") return 1.0;
    if (s == "-") return -1.0;
    return parse_double_strict(s);
  };
  if (split == std::string::npos) return {0.0, imag_part(t)};
  return {parse_double_strict(t.substr(0, split)), imag_part(t.substr(split))};
}

ConfigFile ConfigFile::parse(const std::string& text) {
  ConfigFile cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("malformed section header", lineno, line);
      section = trim(line.substr(1, line.size() - 2));
      if (!known_keys().count(section))
        throw ConfigError("unknown section [" + section + "]", lineno, section);
      cfg.sections_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value", lineno, line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) throw ConfigError("key outside of any section", lineno, key);
    if (!known_keys().at(section).count(key))
      throw ConfigError("unknown key '" + key + "' in [" + section + "]", lineno, section + "." + key);
    auto& sec = cfg.sections_[section];
    if (sec.count(key)) throw ConfigError("duplicate key", lineno, section + "." + key);
    sec[key] = Entry{value, lineno};
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  const std::string text = ss.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return from_manifest(text);
  return parse(text);
}

ConfigFile ConfigFile::from_manifest(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const std::exception& ex) {
    throw ConfigError(std::string("manifest is not valid JSON: ") + ex.what());
  }
  if (!j.contains("config") || !j["config"].is_object())
    throw ConfigError("manifest has no \"config\" object", 0, "config");
  std::ostringstream text;
  for (const auto& [section, keys] : j["config"].items()) {
    text << "[" << section << "]\n";
    for (const auto& [key, value] : keys.items()) {
      if (!value.is_string()) throw ConfigError("manifest config values must be strings", 0, section + "." + key);
      text << key << " = " << value.get<std::string>() << "\n";
    }
  }
  return parse(text.str());
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

const ConfigFile::Entry* ConfigFile::find(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return nullptr;
  const auto k = s->second.find(key);
  return k == s->second.end() ? nullptr : &k->second;
}

void ConfigFile::fail(const std::string& section, const std::string& key,
                      const std::string& message) const {
  const Entry* e = find(section, key);
  std::ostringstream os;
  os << section << "." << key << ": " << message;
  if (e) os << " (line " << e->line << ")";
  throw ConfigError(os.str(), e ? e->line : 0, section + "." + key);
}

std::optional<std::string> ConfigFile::get_string(const std::string& section,
                                                  const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e) return std::nullopt;
  return e->value;
}

std::optional<double> ConfigFile::get_double(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e) return std::nullopt;
  try {
    return parse_double_strict(e->value);
  } catch (const std::exception&) {
    fail(section, key, "expected a real number, got '" + e->value + "'");
  }
}

std::optional<int> ConfigFile::get_int(const std::string& section, const std::string& key) const {
  const auto v = get_double(section, key);
  if (!v) return std::nullopt;
  if (*v != std::floor(*v) || std::abs(*v) > 1e9) fail(section, key, "expected an integer");
  return static_cast<int>(*v);
}

std::optional<cplx> ConfigFile::get_complex(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e) return std::nullopt;
  try {
    return parse_complex(e->value);
  } catch (const std::exception&) {
    fail(section, key, "expected a complex number like 0.6-0.8i, got '" + e->value + "'");
  }
}

std::optional<std::vector<double>> ConfigFile::get_doubles(const std::string& section,
                                                           const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e) return std::nullopt;
  std::vector<double> out;
  for (const auto& item : split_list(e->value)) {
    try {
      out.push_back(parse_double_strict(item));
    } catch (const std::exception&) {
      fail(section, key, "cannot parse list element '" + item + "'");
    }
  }
  return out;
}

std::optional<std::vector<cplx>> ConfigFile::get_complexes(const std::string& section,
                                                           const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e) return std::nullopt;
  std::vector<cplx> out;
  for (const auto& item : split_list(e->value)) {
    try {
      out.push_back(parse_complex(item));
    } catch (const std::exception&) {
      fail(section, key, "cannot parse list element '" + item + "'");
    }
  }
  return out;
}

// -- resolution ---------------------------------------------------------------------------

namespace {

Constellation resolve_constellation(const ConfigFile& cfg) {
  ConstellationSpec spec;
  if (auto v = cfg.get_string("constellation", "family")) spec.family = *v;
  if (auto v = cfg.get_double("constellation", "scale")) spec.scale = *v;
  if (auto v = cfg.get_int("constellation", "order")) spec.order = *v;
  if (auto v = cfg.get_double("constellation", "phase")) spec.phase = *v;
  if (auto v = cfg.get_int("constellation", "grid_nx")) spec.grid_nx = *v;
  if (auto v = cfg.get_int("constellation", "grid_ny")) spec.grid_ny = *v;
  if (auto v = cfg.get_complexes("constellation", "points")) spec.points = *v;
  if (auto v = cfg.get_doubles("constellation", "probs")) spec.probs = *v;
  if (spec.family == "explicit" && spec.points.empty())
    cfg.fail("constellation", "points", "explicit family needs a point list");
  try {
    return build_constellation(spec);
  } catch (const ParameterError& ex) {
    const std::string field = std::string(ex.what()).find("probab") != std::string::npos ? "probs"
                              : spec.family == "explicit"                                ? "points"
                                                                                         : "family";
    cfg.fail("constellation", field, ex.what());
  }
}

std::vector<double> resolve_grid(const ConfigFile& cfg, const std::string& prefix,
                                 std::vector<double> fallback) {
  const std::string sec = "sweep";
  if (auto v = cfg.get_doubles(sec, prefix + "_values")) {
    for (std::size_t i = 0; i < v->size(); ++i) {
      if (!((*v)[i] > 0.0)) cfg.fail(sec, prefix + "_values", "values must be positive");
      if (i > 0 && !((*v)[i] > (*v)[i - 1])) cfg.fail(sec, prefix + "_values", "values must be increasing");
    }
    return *v;
  }
  const auto lo = cfg.get_double(sec, prefix + "_min");
  const auto hi = cfg.get_double(sec, prefix + "_max");
  const auto count = cfg.get_int(sec, prefix + "_count");
  if (!lo && !hi && !count) return fallback;
  if (!lo || !hi || !count)
    cfg.fail(sec, prefix + (lo ? (hi ? "_count" : "_max") : "_min"),
             "range needs " + prefix + "_min, " + prefix + "_max and " + prefix + "_count");
  if (*count < 0) cfg.fail(sec, prefix + "_count", "must be >= 0");
  if (!(*lo > 0.0)) cfg.fail(sec, prefix + "_min", "must be positive");
  if (*count > 1 && !(*hi > *lo)) cfg.fail(sec, prefix + "_max", "must exceed " + prefix + "_min");
  std::string spacing = "log";
  if (prefix == "s")
    if (auto v = cfg.get_string(sec, "s_spacing")) spacing = *v;
  if (spacing == "log") return log_grid(*lo, *hi, *count);
  if (spacing != "linear") cfg.fail(sec, "s_spacing", "expected log or linear");
  std::vector<double> g;
  for (int i = 0; i < *count; ++i)
    g.push_back(*count == 1 ? *lo : *lo + (*hi - *lo) * i / (*count - 1));
  return g;
}

}  // namespace

RunSettings resolve(const ConfigFile& cfg) {
  RunSettings rs;
  const std::string sc = "scenario";

  rs.scenario.constellation = resolve_constellation(cfg);

  // eavesdropper coupling
  if (cfg.has(sc, "r_E") && cfg.has(sc, "r_E2")) cfg.fail(sc, "r_E2", "give either r_E or r_E2, not both");
  double r_E = 0.0;
  if (auto v = cfg.get_double(sc, "r_E")) r_E = *v;
  if (auto v = cfg.get_double(sc, "r_E2")) {
    if (*v < 0.0) cfg.fail(sc, "r_E2", "must be >= 0");
    r_E = std::sqrt(*v);
  }
  if (!(r_E >= 0.0 && r_E <= 1.0)) cfg.fail(sc, cfg.has(sc, "r_E") ? "r_E" : "r_E2", "must lie in [0, 1]");

  // temperature
  TemperatureConstraint tc;
  if (auto v = cfg.get_double(sc, "temperature_k")) {
    if (!(*v > 0.0)) cfg.fail(sc, "temperature_k", "must be positive");
    tc.T = *v;
  }
  if (auto v = cfg.get_string(sc, "temperature_rule")) {
    try {
      tc.rule = temperature_rule_from_string(*v);
    } catch (const ParameterError& ex) {
      cfg.fail(sc, "temperature_rule", ex.what());
    }
  }
  const auto omega = cfg.get_double(sc, "omega_hz");
  if (omega && !(*omega > 0.0)) cfg.fail(sc, "omega_hz", "must be positive");
  rs.temperature_given = omega.has_value();

  // squeezing
  double mu = 0.0;
  if (auto v = cfg.get_double(sc, "mu")) {
    if (omega) cfg.fail(sc, "mu", "mu and omega_hz are mutually exclusive");
    if (!(*v >= 0.0)) cfg.fail(sc, "mu", "must be >= 0");
    mu = *v;
  } else if (omega) {
    if (r_E == 0.0 && tc.rule == TemperatureRule::fixed_untrusted_noise)
      mu = 0.0;
    else
      mu = mu_from_temperature(*omega, tc, r_E);
  }

  // trusted channel
  std::optional<double> n_fixed;
  cplx t_channel = 1.0;
  const bool source = cfg.has(sc, "source_t") || cfg.has(sc, "source_r") ||
                      cfg.has(sc, "source_n0") || cfg.has(sc, "source_n_a");
  if (source) {
    if (cfg.has(sc, "n")) cfg.fail(sc, "n", "give either n or the source_* parameters");
    if (cfg.has(sc, "t_channel")) cfg.fail(sc, "t_channel", "give either t_channel or source_t");
    SourceChannelParams p;
    p.t = cfg.get_complex(sc, "source_t").value_or(1.0);
    p.r = cfg.get_complex(sc, "source_r").value_or(std::sqrt(std::max(0.0, 1.0 - std::norm(p.t))));
    p.n0 = cfg.get_double(sc, "source_n0").value_or(0.0);
    p.n_a = cfg.get_double(sc, "source_n_a").value_or(0.0);
    if (std::abs(std::norm(p.t) + std::norm(p.r) - 1.0) > 1e-12)
      cfg.fail(sc, cfg.has(sc, "source_r") ? "source_r" : "source_t",
               "|source_t|^2 + |source_r|^2 must equal 1");
    if (p.n0 < 0.0) cfg.fail(sc, "source_n0", "must be >= 0");
    if (p.n_a < 0.0) cfg.fail(sc, "source_n_a", "must be >= 0");
    n_fixed = compose_source_channel(p).n;
    t_channel = p.t;
  } else {
    if (auto v = cfg.get_double(sc, "n")) {
      if (!(*v >= 0.0)) cfg.fail(sc, "n", "must be >= 0");
      n_fixed = *v;
    }
    if (auto v = cfg.get_complex(sc, "t_channel")) {
      if (std::abs(*v) > 1.0 + 1e-12) cfg.fail(sc, "t_channel", "|t_channel| must be <= 1");
      t_channel = *v;
    }
  }

  rs.scenario.t_channel = t_channel;
  rs.scenario.n = n_fixed ? *n_fixed : (omega ? bose_einstein_occupation(*omega, tc.T) : 0.0);
  rs.scenario.eve = {r_E, mu};
  rs.scenario.theta = cfg.get_double(sc, "theta").value_or(0.0);
  rs.scenario.lambda = cfg.get_double(sc, "lambda").value_or(1.0);
  if (!(rs.scenario.lambda > 0.0 && rs.scenario.lambda <= 1.0))
    cfg.fail(sc, "lambda", "must lie in (0, 1]");

  rs.boundary_scenario.constellation = rs.scenario.constellation;
  rs.boundary_scenario.temperature = tc;
  rs.boundary_scenario.channel.n = n_fixed;
  rs.boundary_scenario.channel.t_channel = t_channel;
  rs.boundary_scenario.theta = rs.scenario.theta;
  rs.boundary_scenario.lambda = rs.scenario.lambda;

  // sweep
  rs.sweep.s_grid = resolve_grid(cfg, "s", log_grid(1e-2, 30.0, 24));
  rs.sweep.omegas = resolve_grid(cfg, "omega", log_grid(5e12, 4e14, 8));
  if (auto v = cfg.get_string("sweep", "method")) {
    if (*v != "weak" && *v != "numeric" && *v != "both") cfg.fail("sweep", "method", "expected weak, numeric or both");
    rs.sweep.boundary_method = *v;
  }
  if (auto v = cfg.get_double("sweep", "r_lo")) rs.sweep.boundary.r_lo = *v;
  if (auto v = cfg.get_double("sweep", "r_hi")) rs.sweep.boundary.r_hi = *v;
  if (!(rs.sweep.boundary.r_lo > 0.0 && rs.sweep.boundary.r_hi <= 1.0 &&
        rs.sweep.boundary.r_lo < rs.sweep.boundary.r_hi))
    cfg.fail("sweep", cfg.has("sweep", "r_lo") ? "r_lo" : "r_hi", "need 0 < r_lo < r_hi <= 1");
  if (auto v = cfg.get_double("sweep", "tolerance")) {
    if (!(*v > 0.0)) cfg.fail("sweep", "tolerance", "must be positive");
    rs.sweep.boundary.tolerance = *v;
  }

  // output
  if (auto v = cfg.get_int("output", "threads")) {
    if (*v < 1) cfg.fail("output", "threads", "must be >= 1");
    rs.threads = *v;
  }
  if (auto v = cfg.get_double("output", "wigner_s")) {
    if (!(*v >= 0.0)) cfg.fail("output", "wigner_s", "must be >= 0");
    rs.wigner.s = *v;
  }
  if (auto v = cfg.get_int("output", "wigner_mode")) {
    if (*v != 2 && *v != 3) cfg.fail("output", "wigner_mode", "expected 2 or 3");
    rs.wigner.mode = *v;
  }
  const bool any_grid = cfg.has("output", "x_min") || cfg.has("output", "x_max") ||
                        cfg.has("output", "p_min") || cfg.has("output", "p_max") ||
                        cfg.has("output", "nx") || cfg.has("output", "np");
  if (any_grid) {
    GridSpec g;
    g.x_min = cfg.get_double("output", "x_min").value_or(g.x_min);
    g.x_max = cfg.get_double("output", "x_max").value_or(g.x_max);
    g.p_min = cfg.get_double("output", "p_min").value_or(g.p_min);
    g.p_max = cfg.get_double("output", "p_max").value_or(g.p_max);
    g.nx = cfg.get_int("output", "nx").value_or(g.nx);
    g.np = cfg.get_int("output", "np").value_or(g.np);
    if (g.nx < 2) cfg.fail("output", "nx", "must be >= 2");
    if (g.np < 2) cfg.fail("output", "np", "must be >= 2");
    if (!(g.x_max > g.x_min)) cfg.fail("output", "x_max", "must exceed x_min");
    if (!(g.p_max > g.p_min)) cfg.fail("output", "p_max", "must exceed p_min");
    rs.wigner.grid = g;
  }
  return rs;
}

}  // namespace cvqkd
