#include "cvqkd/commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "cvqkd/errors.hpp"
#include "cvqkd/report.hpp"
#include "cvqkd/validate.hpp"

namespace cvqkd {

namespace fs = std::filesystem;

namespace {

struct Loaded {
  ConfigFile cfg;
  RunSettings rs;
};

Loaded load(const CommandOptions& opt) {
  Loaded l;
  if (!opt.config_path.empty()) l.cfg = ConfigFile::load(opt.config_path);
  l.rs = resolve(l.cfg);
  if (opt.threads) {
    if (*opt.threads < 1) throw ConfigError("--threads must be >= 1", 0, "threads");
    l.rs.threads = *opt.threads;
  }
  l.rs.sweep.boundary.threads = l.rs.threads;
  return l;
}

void report_config_error(const ConfigError& e, std::ostream& err) {
  err << "config error";
  if (e.line() > 0) err << " at line " << e.line();
  if (!e.field().empty()) err << " (" << e.field() << ")";
  err << ": " << e.what() << '\n';
}

std::string output_path(const CommandOptions& opt, const std::string& name) {
  fs::create_directories(opt.out_dir);
  return (fs::path(opt.out_dir) / name).string();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

nlohmann::json numbers(const std::vector<double>& v) {
  nlohmann::json a = nlohmann::json::array();
  for (double x : v) a.push_back(format_number(x));
  return a;
}

// Shared error funnel: config problems -> 1, anything else -> 2.
template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    report_config_error(e, err);
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
}

}  // namespace

int cmd_rate_sweep(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto t0 = std::chrono::steady_clock::now();
    const Loaded l = load(opt);
    const auto& grid = l.rs.sweep.s_grid;
    const auto rows = rate_sweep(l.rs.scenario, grid, l.rs.threads, l.rs.sweep.boundary.holevo,
                                 l.rs.sweep.boundary.quadrature);

    std::size_t failed = 0;
    int max_cutoff = 0;
    nlohmann::json errors = nlohmann::json::array();
    for (const auto& r : rows) {
      max_cutoff = std::max(max_cutoff, r.cutoff);
      if (!r.ok) {
        ++failed;
        errors.push_back({{"s", format_number(r.s)}, {"error", r.error}});
      }
    }
    write_atomic(output_path(opt, "rates.csv"), rates_csv(rows));

    nlohmann::json diag;
    diag["s_grid"] = numbers(grid);
    diag["points"] = rows.size();
    diag["failed_points"] = failed;
    diag["row_errors"] = errors;
    diag["max_cutoff"] = max_cutoff;
    diag["holevo_initial_tail"] = format_number(l.rs.sweep.boundary.holevo.initial_tail);
    diag["holevo_change_tolerance"] = format_number(l.rs.sweep.boundary.holevo.change_tolerance);
    diag["quadrature_abs_tolerance"] = format_number(l.rs.sweep.boundary.quadrature.abs_tolerance);
    diag["weak_limit_C"] = format_number(weak_limit_coefficient(l.rs.scenario));
    diag["threads"] = l.rs.threads;
    diag["wall_time_s"] = seconds_since(t0);
    write_atomic(output_path(opt, "manifest.json"),
                 make_manifest("rate-sweep", l.cfg, diag, {"rates.csv"}).dump(2) + "\n");

    out << "rate-sweep: " << rows.size() << " points, " << failed << " failed -> "
        << output_path(opt, "rates.csv") << '\n';
    if (failed == 0) return int(kExitOk);
    return failed == rows.size() ? int(kExitNumeric) : int(kExitPartial);
  });
}

int cmd_boundary(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto t0 = std::chrono::steady_clock::now();
    const Loaded l = load(opt);
    const auto& sw = l.rs.sweep;
    BoundaryCurve curve;
    if (sw.boundary_method == "weak" || sw.boundary_method == "both") {
      const auto w = weak_boundary(sw.omegas, l.rs.boundary_scenario, sw.boundary);
      curve.insert(curve.end(), w.begin(), w.end());
    }
    if (sw.boundary_method == "numeric" || sw.boundary_method == "both") {
      const auto n = numeric_boundary(sw.omegas, l.rs.boundary_scenario, sw.s_grid, sw.boundary);
      curve.insert(curve.end(), n.begin(), n.end());
    }
    std::size_t failed = 0;
    nlohmann::json notes = nlohmann::json::array();
    for (const auto& p : curve) {
      if (p.status == "error") ++failed;
      if (!p.message.empty())
        notes.push_back({{"omega_hz", format_number(p.omega)}, {"method", to_string(p.method)},
                         {"message", p.message}});
    }
    write_atomic(output_path(opt, "boundary.csv"), boundary_csv(curve));

    nlohmann::json diag;
    diag["omega_grid"] = numbers(sw.omegas);
    diag["s_grid"] = numbers(sw.s_grid);
    diag["method"] = sw.boundary_method;
    diag["temperature_rule"] = to_string(l.rs.boundary_scenario.temperature.rule);
    diag["r_range"] = numbers({sw.boundary.r_lo, sw.boundary.r_hi});
    diag["tolerance"] = format_number(sw.boundary.tolerance);
    diag["failed_points"] = failed;
    diag["notes"] = notes;
    diag["threads"] = l.rs.threads;
    diag["wall_time_s"] = seconds_since(t0);
    write_atomic(output_path(opt, "manifest.json"),
                 make_manifest("boundary", l.cfg, diag, {"boundary.csv"}).dump(2) + "\n");

    out << "boundary: " << curve.size() << " points, " << failed << " failed -> "
        << output_path(opt, "boundary.csv") << '\n';
    if (failed == 0) return int(kExitOk);
    return failed == curve.size() ? int(kExitNumeric) : int(kExitPartial);
  });
}

int cmd_wigner(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto t0 = std::chrono::steady_clock::now();
    const Loaded l = load(opt);
    const auto& ws = l.rs.wigner;
    const DensityMatrix rho = environment_mode_state(l.rs.scenario, ws.s, ws.mode);
    const GridSpec spec = ws.grid ? *ws.grid : covering_grid(rho);
    const WignerGrid w = wigner_grid(rho, spec);
    write_atomic(output_path(opt, "wigner.csv"), wigner_csv(w));

    Eigen::Index ix = 0, ip = 0;
    const double peak = w.values.maxCoeff(&ix, &ip);
    nlohmann::json diag;
    diag["mode"] = ws.mode;
    diag["s"] = format_number(ws.s);
    diag["cutoff"] = rho.dim() - 1;
    diag["tail_mass"] = format_number(rho.tail_mass());
    diag["grid"] = {{"x_min", format_number(spec.x_min)}, {"x_max", format_number(spec.x_max)},
                    {"p_min", format_number(spec.p_min)}, {"p_max", format_number(spec.p_max)},
                    {"nx", spec.nx}, {"np", spec.np}};
    diag["normalization"] = format_number(w.normalization());
    diag["local_maxima_above_half"] = w.local_maxima(0.5);
    diag["peak"] = {{"x", format_number(w.x_axis[static_cast<std::size_t>(ix)])},
                    {"p", format_number(w.p_axis[static_cast<std::size_t>(ip)])},
                    {"w", format_number(peak)}};
    diag["coverage_ok"] = w.coverage_ok;
    if (!w.coverage_ok) diag["coverage_warning"] = w.warning;
    diag["wall_time_s"] = seconds_since(t0);
    write_atomic(output_path(opt, "manifest.json"),
                 make_manifest("wigner", l.cfg, diag, {"wigner.csv"}).dump(2) + "\n");

    if (!w.coverage_ok) err << "warning: " << w.warning << '\n';
    out << "wigner: " << spec.nx << "x" << spec.np << " grid, " << w.local_maxima(0.5)
        << " local maxima -> " << output_path(opt, "wigner.csv") << '\n';
    return int(kExitOk);
  });
}

namespace {

const char* kDefaultValidateConfig =
    "[scenario]\n"
    "n = 0.3\n"
    "mu = 0.6\n"
    "r_E = 0.5\n";

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Runs rate-sweep twice on a short grid and compares the CSV bytes.
CheckResult determinism(const ConfigFile& cfg, int threads) {
  CheckResult r;
  r.name = "cli_determinism";
  nlohmann::json manifest;
  manifest["config"] = config_to_json(cfg);
  auto& sweep = manifest["config"]["sweep"];
  if (!sweep.is_object()) sweep = nlohmann::json::object();
  for (const char* k : {"s_values", "s_min", "s_max", "s_count", "s_spacing"}) sweep.erase(k);
  sweep["s_values"] = "0.05, 0.5, 2";

  const fs::path dir = fs::temp_directory_path() /
                       ("cvqkd-determinism-" + std::to_string(std::chrono::steady_clock::now()
                                                                  .time_since_epoch()
                                                                  .count()));
  fs::create_directories(dir);
  const fs::path cfg_path = dir / "config.json";
  { std::ofstream(cfg_path, std::ios::binary) << manifest.dump(); }

  std::ostringstream sink;
  std::string first, second;
  int codes[2] = {0, 0};
  for (int k = 0; k < 2; ++k) {
    CommandOptions o;
    o.config_path = cfg_path.string();
    o.out_dir = (dir / ("run" + std::to_string(k))).string();
    o.threads = k == 0 ? 1 : std::max(2, threads);
    codes[k] = cmd_rate_sweep(o, sink, sink);
    (k == 0 ? first : second) = slurp(fs::path(o.out_dir) / "rates.csv");
  }
  // rerun from the first manifest
  CommandOptions o;
  o.config_path = (dir / "run0" / "manifest.json").string();
  o.out_dir = (dir / "run2").string();
  cmd_rate_sweep(o, sink, sink);
  const std::string third = slurp(fs::path(o.out_dir) / "rates.csv");
  fs::remove_all(dir);

  const bool same = !first.empty() && first == second && first == third;
  r.status = same && codes[0] == kExitOk ? CheckStatus::pass : CheckStatus::fail;
  r.detail = same ? "byte-identical rates.csv across reruns, thread counts and manifest replay"
                  : "rates.csv differs between reruns";
  return r;
}

}  // namespace

int cmd_validate(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    ConfigFile cfg = opt.config_path.empty() ? ConfigFile::parse(kDefaultValidateConfig)
                                             : ConfigFile::load(opt.config_path);
    RunSettings rs = resolve(cfg);
    if (opt.threads) rs.threads = *opt.threads;

    ValidationOptions vo;
    vo.threads = rs.threads;
    vo.determinism_check = [&] { return determinism(cfg, rs.threads); };
    const auto results = run_validation(rs, vo);

    int failures = 0;
    for (const auto& r : results) {
      if (r.status == CheckStatus::fail) ++failures;
      out << to_string(r.status) << "  " << r.name << "  " << r.detail << "  ["
          << std::fixed << std::setprecision(3) << r.seconds << std::defaultfloat << " s]\n";
    }
    out << (failures == 0 ? "validation passed" : "validation FAILED") << " (" << results.size()
        << " checks, " << failures << " failed)\n";
    return failures == 0 ? int(kExitOk) : int(kExitNumeric);
  });
}

}  // namespace cvqkd
