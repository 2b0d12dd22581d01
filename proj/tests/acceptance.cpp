// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "cvqkd/boundary.hpp"
#include "cvqkd/commands.hpp"
#include "cvqkd/oracles.hpp"

using namespace cvqkd;

namespace {

struct Verdict {
  bool ok = true;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& title, double budget_s, const std::function<Verdict()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& ex) {
    v = {false, std::string("exception: ") + ex.what()};
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (dt > budget_s) {
    v.ok = false;
    v.detail += " (over time budget)";
  }
  if (!v.ok) ++failures;
  std::printf("[%s] criterion %2d  %-44s %s  [%.2f s / %.0f s]\n", v.ok ? "PASS" : "FAIL", id, title.c_str(),
              v.detail.c_str(), dt, budget_s);
  std::fflush(stdout);
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

Eigen::VectorXd descending(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
  Eigen::VectorXd w = es.eigenvalues();
  std::sort(w.data(), w.data() + w.size(), std::greater<>());
  return w;
}

double spectrum_gap(const CMatrix& a, const CMatrix& b) {
  Eigen::VectorXd x = descending(a), y = descending(b);
  const Eigen::Index n = std::max(x.size(), y.size());
  x.conservativeResizeLike(Eigen::VectorXd::Zero(n));
  y.conservativeResizeLike(Eigen::VectorXd::Zero(n));
  return (x - y).cwiseAbs().maxCoeff();
}

ScenarioConfig reference_scenario() {
  ScenarioConfig sc;
  sc.constellation = build_constellation({});
  sc.n = 0.3;
  sc.eve = {0.5, 0.6};
  return sc;
}

BoundaryScenario room_temperature(const std::string& family = "four-point") {
  BoundaryScenario b;
  ConstellationSpec spec;
  spec.family = family;
  b.constellation = build_constellation(spec);
  b.temperature.T = 300.0;
  return b;
}

const std::vector<double> kSGrid = log_grid(1e-2, 30.0, 24);

}  // namespace

int main() {
  criterion(1, "thermal entropy closed form", 1.0, [] {
    double worst = 0.0;
    for (double n : {0.1, 0.5, 1.0, 2.0}) {
      const int n_max = static_cast<int>(std::ceil(std::log(1e-14) / std::log(n / (1.0 + n))));
      worst = std::max(worst, std::abs(von_neumann_entropy(thermal_density(n, FockCutoff(n_max), 1e-12)) -
                                       thermal_entropy_g(n)));
    }
    return Verdict{worst < 1e-8, "max |H - g| = " + num(worst)};
  });

  criterion(2, "normal form vs three-mode purification", 60.0, [] {
    const ScenarioConfig sc = reference_scenario();
    const auto nf = environment_normal_form(sc.eve, sc.n);
    const FockCutoff cut(12);
    double env = 0.0, rec = 0.0;
    for (double s : {0.25, 0.5, 1.0 / std::sqrt(2.0)}) {
      for (std::size_t j = 0; j < sc.constellation.size(); ++j) {
        const cplx zeta = sc.channel_point(j);
        const auto o = three_mode_purification_oracle(sc.n, sc.eve.r_E, sc.eve.mu, zeta, s, cut, 1e-6);
        const auto a = environment_component(nf, environment_displacement(zeta, s, sc.eve, nf.gamma), FockCutoff(24));
        env = std::max(env, spectrum_gap(o.rho_E.matrix(), a.matrix()));
        const auto b = receiver_state(sc.n, sc.eve, zeta, s, FockCutoff(o.rho_B.dim() - 1));
        rec = std::max(rec, (o.rho_B.matrix() - b.matrix()).cwiseAbs().maxCoeff());
      }
    }
    return Verdict{env < 1e-6 && rec < 1e-6, "rho_E eigenvalues " + num(env) + ", rho_B entries " + num(rec)};
  });

  criterion(3, "symplectic eigenvalues, 100 draws", 1.0, [] {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> un(0.0, 3.0), ur(0.01, 0.99), um(0.0, 2.0);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const double n = un(rng), r = ur(rng), mu = um(rng);
      const auto nf = environment_normal_form({r, mu}, n);
      const auto nu = oracle::environment_symplectic_eigenvalues(n, r, mu);
      worst = std::max({worst, std::abs(2.0 * std::min(nf.n2, nf.n3) + 1.0 - nu[0]),
                        std::abs(2.0 * std::max(nf.n2, nf.n3) + 1.0 - nu[1])});
    }
    return Verdict{worst < 1e-10, "max deviation " + num(worst)};
  });

  criterion(4, "Holevo saturation at ln 4", 300.0, [] {
    std::string detail;
    bool ok = true;
    std::vector<ScenarioConfig> cases{reference_scenario(), room_temperature().at(2e13, 0.3)};
    for (const auto& sc : cases) {
      const auto nf = environment_normal_form(sc.eve, sc.n);
      const double need = 6.0 * std::sqrt(std::max(nf.n2, nf.n3) + 1.0);
      // |dz|^2 = s^2 |d zeta|^2 r_E^2 cosh(2 gamma) >= (2 s r_E)^2 for this set
      const double s = need / (2.0 * sc.eve.r_E);
      const double chi = holevo_bound(sc, s).chi;
      const double rel = std::abs(chi - std::log(4.0)) / std::log(4.0);
      ok = ok && rel < 0.02;
      detail += "chi=" + num(chi) + " (rel " + num(rel) + ") ";
    }
    return Verdict{ok, detail};
  });

  criterion(5, "mutual information saturation at ln 2", 60.0, [] {
    const ScenarioConfig sc = reference_scenario();
    const auto k1 = quadrature_kernel(sc, 1.0);
    const double spread = std::abs(k1.means.front() - k1.means.back());
    const double s = 10.0 * std::sqrt(k1.sigma2) / spread;
    const double I = mutual_information(sc, s);
    return Verdict{std::abs(I - std::log(2.0)) < 1e-3 && I < std::log(4.0),
                   "I = " + num(I) + " at s = " + num(s) + ", |I - ln 2| = " + num(std::abs(I - std::log(2.0)))};
  });

  criterion(6, "weak-limit curvature vs Richardson", 600.0, [] {
    const BoundaryScenario room = room_temperature();
    std::vector<std::pair<std::string, ScenarioConfig>> cases{
        {"strong", room.at(2e13, 0.1)}, {"weak", room.at(3e14, std::sqrt(0.22))}, {"r_E=0", room.at(2e13, 0.0)}};
    bool ok = true;
    std::string detail;
    for (const auto& [name, sc] : cases) {
      const double c = weak_limit_coefficient(sc);
      const double r = oracle::curvature_richardson([&](double s) { return key_rate(sc, s).R; }, 1e-2, 4);
      const double rel = std::abs(r - c) / std::abs(c);
      ok = ok && rel < 1e-3;
      detail += name + ": C=" + num(c) + " rel " + num(rel) + "; ";
    }
    return Verdict{ok, detail};
  });

  criterion(7, "strong-noise rate profile", 120.0, [] {
    const ScenarioConfig sc = room_temperature().at(2e13, 0.1);
    const auto rows = rate_sweep(sc, kSGrid, 4);
    double best = -1.0;
    std::size_t at = 0;
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (rows[i].R > best) {
        best = rows[i].R;
        at = i;
      }
    const double c = weak_limit_coefficient(sc);
    const bool sign_ok = (rows.front().R > 0.0) == (c > 0.0);
    const bool ok = best > 0.0 && at > 0 && at + 1 < rows.size() && rows.back().R < 0.0 && sign_ok;
    return Verdict{ok, "n_bar=" + num(sc.n) + " max R=" + num(best) + " at s=" + num(rows[at].s) +
                           ", R(s_max)=" + num(rows.back().R) + ", C=" + num(c)};
  });

  criterion(8, "weak-noise critical amplitude", 120.0, [] {
    const ScenarioConfig sc = room_temperature("bpsk").at(3e14, std::sqrt(0.22));
    const auto rows = rate_sweep(sc, kSGrid, 4);
    std::size_t first_pos = rows.size();
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (rows[i].R > 0.0) {
        first_pos = i;
        break;
      }
    bool below_negative = first_pos > 0 && first_pos < rows.size();
    for (std::size_t i = 0; i < first_pos && i < rows.size(); ++i) below_negative = below_negative && rows[i].R < 0.0;
    double best = -1.0;
    for (const auto& r : rows) best = std::max(best, r.R);
    const std::string where = first_pos < rows.size() ? num(rows[first_pos].s) : "none";
    return Verdict{below_negative && best > 0.0, "n_bar=" + num(sc.n) + " R<0 below s=" + where +
                                                      ", max R=" + num(best) + ", C=" + num(weak_limit_coefficient(sc))};
  });

  criterion(9, "boundary: weak vs numeric", 1800.0, [] {
    const BoundaryScenario base = room_temperature();
    const auto omegas = log_grid(5e12, 4e14, 8);
    BoundaryOptions opt;
    opt.threads = 8;
    const auto weak = weak_boundary(omegas, base, opt);
    const auto numeric = numeric_boundary(omegas, base, kSGrid, opt);
    bool strong_ok = true, diverged = false, secure_where_c_negative = false;
    int strong_points = 0;
    std::string detail;
    for (std::size_t i = 0; i < omegas.size(); ++i) {
      if (!weak[i].r_star || !numeric[i].r_star) {
        strong_ok = false;
        continue;
      }
      const double w = *weak[i].r_star, n = *numeric[i].r_star;
      if (weak[i].n_bar > 1.0) {
        ++strong_points;
        strong_ok = strong_ok && std::abs(w - n) <= 0.05;
      } else if (n - w > 0.05) {
        diverged = true;
        const ScenarioConfig mid = base.at(omegas[i], 0.5 * (w + n));
        if (weak_limit_coefficient(mid) < 0.0 && max_rate(mid, kSGrid, true) > 0.0) secure_where_c_negative = true;
      }
      detail += num(w) + "/" + num(n) + " ";
    }
    return Verdict{strong_ok && strong_points > 0 && diverged && secure_where_c_negative,
                   "r* weak/numeric: " + detail};
  });

  criterion(10, "environment Wigner function", 120.0, [] {
    const ScenarioConfig sc = reference_scenario();
    const DensityMatrix weak = environment_mode_state(sc, 0.2, 2);
    const DensityMatrix strong = environment_mode_state(sc, 4.0, 2);
    const WignerGrid ww = wigner_grid(weak, covering_grid(weak, 101));
    const WignerGrid ws = wigner_grid(strong, covering_grid(strong, 121));
    const int mw = ww.local_maxima(0.5), ms = ws.local_maxima(0.5);
    const double nw = ww.normalization(), ns = ws.normalization();
    const bool ok = mw == 1 && ms == 4 && std::abs(nw - 1.0) < 1e-3 && std::abs(ns - 1.0) < 1e-3;
    return Verdict{ok, "maxima weak/strong " + std::to_string(mw) + "/" + std::to_string(ms) + ", normalization " +
                           num(nw) + "/" + num(ns)};
  });

  criterion(11, "validate suite incl. CLI determinism", 300.0, [] {
    std::ostringstream out, err;
    const int code = cmd_validate(CommandOptions{}, out, err);
    const std::string text = out.str();
    const auto passes = std::count(text.begin(), text.end(), '\n');
    const bool ok = code == kExitOk && text.find("FAIL") == std::string::npos &&
                    text.find("PASS  cli_determinism") != std::string::npos;
    return Verdict{ok, std::to_string(passes - 1) + " checks, exit " + std::to_string(code)};
  });

  std::printf("%s: %d criterion(s) failed\n", failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED", failures);
  return failures == 0 ? 0 : 1;
}
