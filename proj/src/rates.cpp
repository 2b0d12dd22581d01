#include "cvqkd/rates.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include <boost/math/quadrature/gauss.hpp>

namespace cvqkd {

void ScenarioConfig::validate() const {
  eve.validate();
  if (!(n >= 0.0) || !std::isfinite(n)) throw ParameterError("scenario: channel occupation n must be >= 0");
  if (std::abs(t_channel) > 1.0 + 1e-12) throw ParameterError("scenario: |t_channel| must be <= 1");
  if (!(lambda > 0.0 && lambda <= 1.0)) throw ParameterError("scenario: lambda must lie in (0, 1]");
}

double ScenarioConfig::receiver_occupation() const {
  const double t = eve.t_E();
  return n * t * t + untrusted_noise(eve);
}

QuadratureKernel quadrature_kernel(const ScenarioConfig& sc, double s) {
  const cplx phase = sc.eve.t_E() * sc.t_channel * std::polar(1.0, sc.theta);
  const ProjectedDistribution d = project_quadrature(sc.constellation, phase, s);
  return {2.0 * sc.receiver_occupation() + 1.0, d.values, d.probs};
}

namespace {

// Integrand -sum_j p_j Q_j(x) ln(f(x)/Q_j(x)) with f the mixture. The log-ratio is
// evaluated through log1p/expm1 when the components are close, so that the tiny
// differences at weak modulation are not lost to cancellation.
double mi_integrand(const QuadratureKernel& k, double x, std::vector<double>& d) {
  const std::size_t m = k.means.size();
  const double norm = 1.0 / std::sqrt(std::numbers::pi * k.sigma2);
  for (std::size_t i = 0; i < m; ++i) {
    const double u = x - k.means[i];
    d[i] = u * u / k.sigma2;
  }
  double total = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    if (d[j] > 120.0) continue;
    const double qj = norm * std::exp(-d[j]);
    double emax = -std::numeric_limits<double>::infinity();
    double emin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      emax = std::max(emax, d[j] - d[i]);
      emin = std::min(emin, d[j] - d[i]);
    }
    double log_ratio;
    if (emax < 1.0 && emin > -1.0) {
      double acc = 0.0;
      for (std::size_t i = 0; i < m; ++i) acc += k.probs[i] * std::expm1(d[j] - d[i]);
      log_ratio = std::log1p(acc);
    } else {
      double acc = 0.0;
      for (std::size_t i = 0; i < m; ++i) acc += k.probs[i] * std::exp(d[j] - d[i] - emax);
      log_ratio = emax + std::log(acc);
    }
    total -= k.probs[j] * qj * log_ratio;
  }
  return total;
}

double mi_composite(const QuadratureKernel& k, double panels_per_sigma, double half_width) {
  const double sigma = std::sqrt(k.sigma2);
  const auto [lo_it, hi_it] = std::minmax_element(k.means.begin(), k.means.end());
  const double lo = *lo_it - half_width * sigma;
  const double hi = *hi_it + half_width * sigma;
  const double width = sigma / panels_per_sigma;
  const int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / width)));
  const double h = (hi - lo) / panels;
  std::vector<double> scratch(k.means.size());
  auto f = [&](double x) { return mi_integrand(k, x, scratch); };
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double a = lo + p * h;
    const double b = a + h;
    // skip panels far from every component
    bool near = false;
    for (double mval : k.means)
      if (mval > a - 9.0 * sigma && mval < b + 9.0 * sigma) {
        near = true;
        break;
      }
    if (!near) continue;
    sum += boost::math::quadrature::gauss<double, 16>::integrate(f, a, b);
  }
  return sum;
}

}  // namespace

double mutual_information(const QuadratureKernel& k, const QuadratureOptions& opt) {
  if (!(k.sigma2 >= 1.0 - 1e-12)) throw ParameterError("mutual_information: sigma^2 below vacuum floor");
  if (k.means.size() != k.probs.size()) throw ParameterError("mutual_information: size mismatch");
  if (k.means.size() < 2) return 0.0;
  const double fine = mi_composite(k, opt.panels_per_sigma, opt.half_width_sigmas);
  const double coarse = mi_composite(k, 0.5 * opt.panels_per_sigma, opt.half_width_sigmas);
  if (std::abs(fine - coarse) > opt.abs_tolerance) {
    std::ostringstream os;
    os << "mutual_information: quadrature did not converge (panel halving changed the result by "
       << std::abs(fine - coarse) << ")";
    throw NumericError(os.str());
  }
  return std::max(0.0, fine);
}

double mutual_information(const ScenarioConfig& sc, double s, const QuadratureOptions& opt) {
  return mutual_information(quadrature_kernel(sc, s), opt);
}

CurvatureTerms weak_limit_terms(const ScenarioConfig& sc) {
  sc.validate();
  CurvatureTerms out;
  const QuadratureKernel k = quadrature_kernel(sc, 1.0);
  double mean = 0.0;
  for (std::size_t i = 0; i < k.means.size(); ++i) mean += k.probs[i] * k.means[i];
  double var = 0.0;
  for (std::size_t i = 0; i < k.means.size(); ++i)
    var += k.probs[i] * (k.means[i] - mean) * (k.means[i] - mean);
  out.info = 2.0 * sc.lambda * var / k.sigma2;

  if (sc.eve.r_E == 0.0) return out;
  const EnvironmentNormalForm nf = environment_normal_form(sc.eve, sc.n);
  cplx zbar = 0.0;
  const auto& p = sc.constellation.probs();
  for (std::size_t j = 0; j < p.size(); ++j) zbar += p[j] * sc.channel_point(j);
  double spread = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) spread += p[j] * std::norm(sc.channel_point(j) - zbar);
  if (spread == 0.0) return out;
  const double c2 = std::cosh(nf.gamma) * std::cosh(nf.gamma);
  const double s2 = std::sinh(nf.gamma) * std::sinh(nf.gamma);
  double bracket = nf.beta2 * c2;
  if (s2 > 0.0) bracket += nf.beta3 * s2;
  out.leak = 2.0 * spread * sc.eve.r_E * sc.eve.r_E * bracket;
  return out;
}

double weak_limit_coefficient(const ScenarioConfig& sc) {
  const CurvatureTerms t = weak_limit_terms(sc);
  return t.info - t.leak;
}

Classicality classicality_diagnostic(const ScenarioConfig& sc, double s) {
  Classicality out;
  const std::size_t m = sc.constellation.size();
  if (m < 2) return out;
  if (sc.eve.r_E == 0.0) {
    out.max_overlap = s == 0.0 ? 1.0 : 0.0;
    return out;
  }
  const EnvironmentNormalForm nf = environment_normal_form(sc.eve, sc.n);
  std::vector<EnvironmentDisplacement> z;
  for (std::size_t j = 0; j < m; ++j)
    z.push_back(environment_displacement(sc.channel_point(j), s, sc.eve, nf.gamma));
  auto ratio = [](double num, double den) {
    if (num == 0.0) return 0.0;
    return den > 0.0 ? num / den : std::numeric_limits<double>::infinity();
  };
  out.max_overlap = 0.0;
  out.min_distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const double d2 = std::norm(z[i].z2 - z[j].z2);
      const double d3 = std::norm(z[i].z3 - z[j].z3);
      const double e = ratio(d2, nf.n2) + ratio(d3, nf.n3);
      out.max_overlap = std::max(out.max_overlap, std::exp(-e));
      out.min_distance = std::min(out.min_distance, std::sqrt(d2 + d3));
    }
  return out;
}

RatePoint key_rate(const ScenarioConfig& sc, double s, const HolevoOptions& hopt,
                   const QuadratureOptions& qopt) {
  sc.validate();
  RatePoint pt;
  pt.s = s;
  pt.I = mutual_information(sc, s, qopt);
  if (sc.eve.r_E > 0.0) {
    const HolevoResult h = holevo_bound(sc, s, hopt);
    pt.chi = h.chi;
    pt.cutoff = h.levels;
    pt.tail_mass = h.tail_mass;
    const Classicality c = classicality_diagnostic(sc, s);
    pt.classicality = c.max_overlap;
    pt.min_separation = c.min_distance;
  }
  pt.R = sc.lambda * pt.I - pt.chi;
  return pt;
}

DensityMatrix environment_mode_state(const ScenarioConfig& sc, double s, int mode,
                                     double tail_tolerance) {
  sc.validate();
  if (mode != 2 && mode != 3) throw ParameterError("environment_mode_state: mode must be 2 or 3");
  double occ;
  std::vector<cplx> disp;
  if (sc.eve.r_E == 0.0) {
    const double sh = std::sinh(sc.eve.mu);
    occ = sh * sh;
    disp.assign(sc.constellation.size(), 0.0);
  } else {
    const EnvironmentNormalForm nf = environment_normal_form(sc.eve, sc.n);
    occ = mode == 2 ? nf.n2 : nf.n3;
    for (std::size_t j = 0; j < sc.constellation.size(); ++j) {
      const auto z = environment_displacement(sc.channel_point(j), s, sc.eve, nf.gamma);
      disp.push_back(mode == 2 ? z.z2 : z.z3);
    }
  }
  double zmax = 0.0;
  for (const cplx& z : disp) zmax = std::max(zmax, std::norm(z));
  int n_max = static_cast<int>(std::ceil(4.0 * (occ + zmax) + 10.0));
  if (occ > 0.0) {
    const double q = occ / (1.0 + occ);
    n_max = std::max(n_max, static_cast<int>(std::ceil(std::log(tail_tolerance * 1e-2) / std::log(q))));
  }
  const FockCutoff cutoff(n_max);
  const int d = cutoff.dim();
  CMatrix avg = CMatrix::Zero(d, d);
  double tail = 0.0;
  const auto& p = sc.constellation.probs();
  for (std::size_t j = 0; j < disp.size(); ++j) {
    const DensityMatrix c = displaced_thermal(occ, disp[j], cutoff, tail_tolerance);
    avg += p[j] * c.matrix();
    tail += p[j] * (1.0 - c.trace());
  }
  avg = 0.5 * (avg + avg.adjoint()).eval();
  return DensityMatrix(std::move(avg), {d}, std::max(0.0, tail), std::max(1e-6, 10 * tail_tolerance));
}

std::vector<RatePoint> rate_sweep(const ScenarioConfig& sc, const std::vector<double>& s_grid,
                                  int threads, const HolevoOptions& hopt,
                                  const QuadratureOptions& qopt) {
  std::vector<RatePoint> out(s_grid.size());
  if (s_grid.empty()) return out;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < s_grid.size(); i = next++) {
      try {
        out[i] = key_rate(sc, s_grid[i], hopt, qopt);
      } catch (const std::exception& ex) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        out[i] = RatePoint{s_grid[i], nan, nan, nan, 0, nan, nan, nan, false, ex.what()};
      }
    }
  };
  const int n = std::clamp(threads, 1, static_cast<int>(s_grid.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace cvqkd
