#include "cvqkd/validate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "cvqkd/oracles.hpp"

namespace cvqkd {

std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "PASS";
    case CheckStatus::fail: return "FAIL";
    case CheckStatus::skipped: return "SKIP";
  }
  return "?";
}

namespace {

struct Outcome {
  CheckStatus status;
  std::string detail;
};

Outcome verdict(bool ok, const std::string& detail) {
  return {ok ? CheckStatus::pass : CheckStatus::fail, detail};
}

Outcome skip(const std::string& why) { return {CheckStatus::skipped, "skipped (" + why + ")"}; }

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(3);
  os << x;
  return os.str();
}

// low-discrepancy draws in [0,1): deterministic, no RNG involved
double weyl(int k, double alpha) { return std::fmod(0.5 + k * alpha, 1.0); }

// Largest difference between two spectra sorted in descending order, the shorter one
// padded with zeros.
double max_abs(Eigen::VectorXd a, Eigen::VectorXd b) {
  std::sort(a.data(), a.data() + a.size(), std::greater<>());
  std::sort(b.data(), b.data() + b.size(), std::greater<>());
  const Eigen::Index n = std::max(a.size(), b.size());
  a.conservativeResizeLike(Eigen::VectorXd::Zero(n));
  b.conservativeResizeLike(Eigen::VectorXd::Zero(n));
  return (a - b).cwiseAbs().maxCoeff();
}

Eigen::VectorXd spectrum(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double max_point_amplitude(const ScenarioConfig& sc) {
  double a = 0.0;
  for (std::size_t j = 0; j < sc.constellation.size(); ++j) a = std::max(a, std::abs(sc.channel_point(j)));
  return a;
}

// Smallest cutoff (at least 12) at which every truncated distribution feeding the
// three-mode oracle drops below 1e-7; -1 if that needs more than `limit`.
int oracle_cutoff(const ScenarioConfig& sc, double s, int limit) {
  const double tau2 = std::tanh(sc.eve.mu) * std::tanh(sc.eve.mu);
  const double q = sc.n / (1.0 + sc.n);
  const double amp2 = std::pow(s * max_point_amplitude(sc), 2);
  for (int n_max = 12; n_max <= limit; ++n_max) {
    const double tail_th = sc.n == 0.0 ? 0.0 : std::pow(q, n_max + 1);
    const double tail_sq = std::pow(tau2, n_max + 1);
    double term = std::exp(-amp2), cdf = term;
    for (int k = 1; k <= n_max; ++k) {
      term *= amp2 / k;
      cdf += term;
    }
    if (tail_th < 1e-7 && tail_sq < 1e-7 && 1.0 - cdf < 1e-7) return n_max;
  }
  return -1;
}

}  // namespace

std::vector<CheckResult> run_validation(const RunSettings& rs, const ValidationOptions& opt) {
  const ScenarioConfig& sc = rs.scenario;
  const bool noiseless = sc.eve.r_E == 0.0;
  std::vector<CheckResult> results;

  auto run = [&](const std::string& name, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    CheckResult r;
    r.name = name;
    try {
      const Outcome o = body();
      r.status = o.status;
      r.detail = o.detail;
    } catch (const std::exception& ex) {
      r.status = CheckStatus::fail;
      r.detail = std::string("exception: ") + ex.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    results.push_back(r);
  };

  run("thermal_entropy_closed_form", [] {
    double worst = 0.0;
    for (double n : {0.1, 0.5, 1.0, 2.0}) {
      const int n_max = static_cast<int>(std::ceil(std::log(1e-14) / std::log(n / (1.0 + n))));
      const double h = von_neumann_entropy(thermal_density(n, FockCutoff(n_max), 1e-12));
      worst = std::max(worst, std::abs(h - thermal_entropy_g(n)));
    }
    return verdict(worst < 1e-8, "max |H - g(n)| = " + fmt(worst));
  });

  run("operator_unitarity", [] {
    const FockCutoff c(24);
    const double rd = displacement_matrix({0.5, 0.3}, c, 1.0).unitarity_residual(12);
    const double rf = two_mode_squeeze_matrix(0.5, FockCutoff(30), 1.0).unitarity_residual(4);
    const double rb = beam_splitter_matrix(0.8, 0.6, FockCutoff(20)).unitarity_residual(10);
    const CMatrix dd = displacement_matrix({0.5, 0.3}, c, 1.0).entries *
                       displacement_matrix({-0.5, -0.3}, c, 1.0).entries;
    const double inv = (dd.topLeftCorner(12, 12) - CMatrix::Identity(12, 12)).cwiseAbs().maxCoeff();
    const double worst = std::max({rd, rf, rb, inv});
    return verdict(worst < 1e-8, "D " + fmt(rd) + ", F " + fmt(rf) + ", S " + fmt(rb) +
                                     ", D(a)D(-a) " + fmt(inv));
  });

  run("displacement_vs_exponential", [] {
    double worst = 0.0;
    for (cplx a : {cplx(1.0, 0.0), cplx(0.5, 0.3), cplx(-1.2, 0.7)}) {
      const CMatrix ref = oracle::displacement_by_exponential(a, 20, 80);
      worst = std::max(worst, (ref - displacement_block(a, 20, 20)).cwiseAbs().maxCoeff());
    }
    const double vac = std::abs(displacement_element(1.0, 0, 0)) - std::exp(-0.5);
    return verdict(worst < 1e-10 && std::abs(vac) < 1e-14, "max deviation " + fmt(worst));
  });

  run("squeeze_vs_series", [] {
    const CMatrix ref = oracle::squeeze_by_series(0.5, 6, 22);
    const double d = (ref - two_mode_squeeze_matrix(0.5, FockCutoff(5), 1.0).entries).cwiseAbs().maxCoeff();
    return verdict(d < 1e-10, "max deviation " + fmt(d));
  });

  run("density_matrix_invariants", [&] {
    const FockCutoff c(20);
    thermal_density(0.5, c).validate();
    displaced_thermal(0.4, {0.6, -0.2}, c).validate();
    tensor(thermal_density(0.2, FockCutoff(12)), displaced_thermal(0.1, 0.5, FockCutoff(12))).validate();
    conjugate(tensor(thermal_density(0.3, FockCutoff(10)), thermal_density(0.1, FockCutoff(10))),
              beam_splitter_matrix(0.6, 0.8, FockCutoff(10)))
        .validate();
    const auto o = three_mode_purification_oracle(0.3, 0.5, 0.6, {0.5, 0.5}, 1.0, FockCutoff(12), 1e-5);
    o.rho_B.validate(1e-5);
    o.rho_E.validate(1e-5);
    return verdict(true, "Hermitian, trace and PSD checks hold");
  });

  run("entropy_additivity_and_unitary_invariance", [] {
    const DensityMatrix a = thermal_density(0.3, FockCutoff(14));
    const DensityMatrix b = displaced_thermal(0.2, {0.4, 0.1}, FockCutoff(14));
    const double add = std::abs(von_neumann_entropy(tensor(a, b)) - von_neumann_entropy(a) - von_neumann_entropy(b));
    double inv = 0.0;
    const FockCutoff big(40);
    const DensityMatrix th = thermal_density(0.05, big, 1e-12);
    for (int k = 0; k < 3; ++k) {
      const cplx alpha(0.6 * weyl(k, 0.618) - 0.3, 0.6 * weyl(k, 0.414) - 0.3);
      const CMatrix u = displacement_matrix(alpha, big, 1.0).entries;
      const Eigen::VectorXd w = spectrum(u * th.matrix() * u.adjoint());
      const double h = entropy_of_spectrum(std::vector<double>(w.data(), w.data() + w.size()));
      inv = std::max(inv, std::abs(h - von_neumann_entropy(th)));
    }
    const FockCutoff c2(14);
    const DensityMatrix pair = tensor(thermal_density(0.02, c2, 1e-12), thermal_density(0.03, c2, 1e-12));
    for (const CMatrix& u : {two_mode_squeeze_matrix(0.15, c2, 1e-6).entries,
                             beam_splitter_matrix(0.8, cplx(0.36, 0.48), c2).entries}) {
      const Eigen::VectorXd w = spectrum(u * pair.matrix() * u.adjoint());
      const double h = entropy_of_spectrum(std::vector<double>(w.data(), w.data() + w.size()));
      inv = std::max(inv, std::abs(h - von_neumann_entropy(pair)));
    }
    return verdict(add < 1e-9 && inv < 1e-7,
                   "additivity " + fmt(add) + ", unitary invariance " + fmt(inv));
  });

  run("normal_form_covariance", [&] {
    double worst = 0.0;
    double ident = 0.0;
    auto check = [&](double n, double r, double mu) {
      const auto nf = environment_normal_form({r, mu}, n);
      const auto nu = oracle::environment_symplectic_eigenvalues(n, r, mu);
      const double lo = 2.0 * std::min(nf.n2, nf.n3) + 1.0;
      const double hi = 2.0 * std::max(nf.n2, nf.n3) + 1.0;
      worst = std::max({worst, std::abs(lo - nu[0]), std::abs(hi - nu[1])});
      ident = std::max(ident, std::abs(std::tanh(2.0 * nf.gamma) * (nf.Y + 2.0) - 2.0 * nf.tau_t));
    };
    for (int k = 0; k < 100; ++k)
      check(3.0 * weyl(k, 0.7548776662), 0.02 + 0.96 * weyl(k, 0.5698402910), 2.0 * weyl(k, 0.3141592654));
    if (!noiseless) check(sc.n, sc.eve.r_E, sc.eve.mu);
    return verdict(worst < 1e-10 && ident < 1e-12,
                   "symplectic eigenvalue deviation " + fmt(worst) + ", tanh identity " + fmt(ident));
  });

  const double s_unit = max_point_amplitude(sc) > 0.0 ? 1.0 / max_point_amplitude(sc) : 0.0;
  const int cut = oracle_cutoff(sc, s_unit, 16);

  run("purification_oracle_environment", [&]() -> Outcome {
    if (noiseless) return skip("noiseless");
    if (cut < 0) return skip("scenario too large for reduced cutoffs");
    const FockCutoff c(cut);
    const FockCutoff wide(2 * cut);
    const auto nf = environment_normal_form(sc.eve, sc.n);
    CMatrix avg_o, avg_a;
    double worst = 0.0;
    const auto& p = sc.constellation.probs();
    for (std::size_t j = 0; j < p.size(); ++j) {
      const auto o = three_mode_purification_oracle(sc.n, sc.eve.r_E, sc.eve.mu, sc.channel_point(j), s_unit, c, 1e-6);
      const auto z = environment_displacement(sc.channel_point(j), s_unit, sc.eve, nf.gamma);
      const DensityMatrix a = environment_component(nf, z, wide, 1e-6);
      if (j == 0) {
        avg_o = CMatrix::Zero(o.rho_E.dim(), o.rho_E.dim());
        avg_a = CMatrix::Zero(a.dim(), a.dim());
      }
      worst = std::max(worst, max_abs(spectrum(o.rho_E.matrix()), spectrum(a.matrix())));
      avg_o += p[j] * o.rho_E.matrix();
      avg_a += p[j] * a.matrix();
    }
    worst = std::max(worst, max_abs(spectrum(avg_o), spectrum(avg_a)));
    return verdict(worst < 1e-6, "max eigenvalue deviation " + fmt(worst) + " at n_max=" + std::to_string(cut));
  });

  run("purification_oracle_receiver", [&]() -> Outcome {
    if (cut < 0) return skip("scenario too large for reduced cutoffs");
    const FockCutoff c(cut);
    double worst = 0.0;
    for (std::size_t j = 0; j < sc.constellation.size(); ++j) {
      const auto o = three_mode_purification_oracle(sc.n, sc.eve.r_E, sc.eve.mu, sc.channel_point(j), s_unit, c, 1e-6);
      const DensityMatrix b = receiver_state(sc.n, sc.eve, sc.channel_point(j), s_unit, FockCutoff(3 * cut), 1e-6);
      worst = std::max(worst, (o.rho_B.matrix() - b.matrix()).cwiseAbs().maxCoeff());
    }
    return verdict(worst < 1e-6, "max entry deviation " + fmt(worst));
  });

  run("holevo_gram_vs_fock", [&]() -> Outcome {
    if (noiseless) return skip("noiseless");
    const double s = 0.5 * s_unit;
    const auto nf = environment_normal_form(sc.eve, sc.n);
    if (std::max(nf.n2, nf.n3) > 1.5) return skip("scenario too large for reduced cutoffs");
    const double g = holevo_bound(sc, s).chi;
    const double f = holevo_bound_fock(sc, s, 0, 1e-8, 40).chi;
    return verdict(std::abs(g - f) < 1e-6, "Gram " + fmt(g) + " vs Fock " + fmt(f));
  });

  run("holevo_vs_purification_oracle", [&]() -> Outcome {
    if (noiseless) return skip("noiseless");
    if (cut < 0) return skip("scenario too large for reduced cutoffs");
    const FockCutoff c(cut);
    std::vector<CMatrix> states;
    for (std::size_t j = 0; j < sc.constellation.size(); ++j)
      states.push_back(three_mode_purification_oracle(sc.n, sc.eve.r_E, sc.eve.mu, sc.channel_point(j), s_unit, c, 1e-6)
                           .rho_E.matrix());
    const double o = holevo_quantity(sc.constellation.probs(), states);
    const double g = holevo_bound(sc, s_unit).chi;
    return verdict(std::abs(o - g) < 1e-5, "oracle " + fmt(o) + " vs Gram " + fmt(g));
  });

  run("weak_limit_curvature", [&]() -> Outcome {
    const double c = weak_limit_coefficient(sc);
    if (!std::isfinite(c)) return skip("curvature unbounded (pure environment mode)");
    const double num = oracle::curvature_richardson([&](double s) { return key_rate(sc, s).R; }, 1e-2, 4);
    const double rel = std::abs(num - c) / std::max(std::abs(c), 1e-12);
    return verdict(rel < 1e-3, "C = " + fmt(c) + ", Richardson " + fmt(num) + ", rel " + fmt(rel));
  });

  run("holevo_curvature", [&]() -> Outcome {
    if (noiseless) return skip("noiseless");
    const double leak = weak_limit_terms(sc).leak;
    if (!std::isfinite(leak)) return skip("curvature unbounded (pure environment mode)");
    const double num = oracle::curvature_richardson([&](double s) { return holevo_bound(sc, s).chi; }, 1e-2, 4);
    const double rel = std::abs(num - leak) / std::max(leak, 1e-12);
    return verdict(rel < 1e-3, "analytic " + fmt(leak) + ", Richardson " + fmt(num) + ", rel " + fmt(rel));
  });

  run("mutual_information_vs_trapezoid", [] {
    QuadratureKernel k;
    k.sigma2 = 1.7;
    const double a = std::sqrt(k.sigma2);  // separation sqrt2 s a = sigma with s = 1/sqrt2
    k.means = {-a, a};
    k.probs = {0.5, 0.5};
    const double gl = mutual_information(k);
    const double tr = oracle::mutual_information_trapezoid(k, 10);
    return verdict(std::abs(gl - tr) < 1e-8, "Gauss-Legendre " + fmt(gl) + " vs trapezoid " + fmt(tr));
  });

  std::vector<double> grid;
  {
    const auto& g = rs.sweep.s_grid;
    const std::size_t stride = std::max<std::size_t>(1, g.size() / 8);
    for (std::size_t i = 0; i < g.size(); i += stride) grid.push_back(g[i]);
  }

  run("information_ceilings", [&]() -> Outcome {
    if (grid.empty()) return skip("empty s grid");
    const double h0 = shannon_entropy(sc.constellation);
    const cplx phase = sc.eve.t_E() * sc.t_channel * std::polar(1.0, sc.theta);
    double worst_i = -1.0, worst_c = -1.0;
    for (double s : grid) {
      const RatePoint p = key_rate(sc, s);
      const double hp = shannon_entropy(project_quadrature(sc.constellation, phase, s));
      worst_i = std::max({worst_i, p.I - hp - 1e-9, -p.I});
      worst_c = std::max({worst_c, p.chi - h0 - 1e-6, -p.chi});
    }
    return verdict(worst_i <= 0.0 && worst_c <= 0.0,
                   "0 <= I <= H(projected), 0 <= chi <= H(constellation) on " + std::to_string(grid.size()) + " points");
  });

  run("holevo_phase_invariance", [&]() -> Outcome {
    if (noiseless) return skip("noiseless");
    ScenarioConfig rot = sc;
    rot.constellation = sc.constellation.rotated(0.7);
    const double a = holevo_bound(sc, 1.0).chi;
    const double b = holevo_bound(rot, 1.0).chi;
    return verdict(std::abs(a - b) < 1e-8, "difference " + fmt(std::abs(a - b)));
  });

  run("holevo_recentering_invariance", [&]() -> Outcome {
    if (noiseless) return skip("noiseless");
    std::vector<cplx> shifted = sc.constellation.points();
    for (auto& z : shifted) z += cplx(0.7, -0.2);
    ScenarioConfig moved = sc;
    moved.constellation = Constellation(shifted, sc.constellation.probs());
    const double a = holevo_bound(sc, 1.0).chi;
    const double b = holevo_bound(moved, 1.0).chi;
    return verdict(std::abs(a - b) < 1e-8, "difference " + fmt(std::abs(a - b)));
  });

  run("classicality_monotone", [&]() -> Outcome {
    if (noiseless) return skip("noiseless");
    if (sc.constellation.size() < 2) return skip("single point");
    const auto nf = environment_normal_form(sc.eve, sc.n);
    if (nf.n2 == 0.0 || nf.n3 == 0.0) return skip("pure environment mode");
    double prev = 1.0 + 1e-12;
    bool mono = true;
    double resid = 0.0;
    const double a1 = -std::log(classicality_diagnostic(sc, 1.0).max_overlap);
    for (double s : log_grid(0.05, 3.0, 12)) {
      const double m = classicality_diagnostic(sc, s).max_overlap;
      if (!(m < prev)) mono = false;
      prev = m;
      if (m > 0.0) resid = std::max(resid, std::abs(-std::log(m) - a1 * s * s) / std::max(1.0, a1 * s * s));
    }
    return verdict(mono && resid < 1e-10, std::string(mono ? "strictly decreasing" : "NOT decreasing") +
                                              ", quadratic-fit residual " + fmt(resid));
  });

  run("wigner_normalization", [&] {
    const DensityMatrix m = environment_mode_state(sc, rs.wigner.s, rs.wigner.mode);
    const WignerGrid w = wigner_grid(m, covering_grid(m, 81));
    const double norm = w.normalization();
    return verdict(std::abs(norm - 1.0) < 1e-3 && w.coverage_ok, "normalization " + fmt(norm));
  });

  if (opt.determinism_check) {
    const auto t0 = std::chrono::steady_clock::now();
    CheckResult r;
    try {
      r = opt.determinism_check();
    } catch (const std::exception& ex) {
      r.name = "cli_determinism";
      r.status = CheckStatus::fail;
      r.detail = ex.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    results.push_back(r);
  }
  return results;
}

}  // namespace cvqkd
