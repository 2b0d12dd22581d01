#include "cvqkd/boundary.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <thread>

namespace cvqkd {

std::string to_string(TemperatureRule rule) {
  return rule == TemperatureRule::ambient_purification ? "ambient_purification"
                                                       : "fixed_untrusted_noise";
}

TemperatureRule temperature_rule_from_string(const std::string& name) {
  if (name == "ambient_purification") return TemperatureRule::ambient_purification;
  if (name == "fixed_untrusted_noise") return TemperatureRule::fixed_untrusted_noise;
  throw ParameterError("unknown temperature rule '" + name + "'");
}

std::string to_string(BoundaryMethod m) { return m == BoundaryMethod::weak ? "weak" : "numeric"; }

double mu_from_temperature(double omega, const TemperatureConstraint& tc, double r_E) {
  if (!(r_E >= 0.0 && r_E <= 1.0)) throw ParameterError("mu_from_temperature: r_E outside [0, 1]");
  const double nb = tc.target_occupation(omega);
  if (tc.rule == TemperatureRule::ambient_purification) return std::asinh(std::sqrt(nb));
  if (r_E == 0.0)
    throw ParameterError("mu_from_temperature: r_E = 0 cannot carry a fixed untrusted noise");
  return std::asinh(std::sqrt(nb) / r_E);
}

ScenarioConfig BoundaryScenario::at(double omega, double r_E) const {
  ScenarioConfig sc;
  sc.constellation = constellation;
  sc.t_channel = channel.t_channel;
  sc.n = channel.n ? *channel.n : bose_einstein_occupation(omega, temperature.T);
  sc.eve.r_E = r_E;
  sc.eve.mu = r_E == 0.0 && temperature.rule == TemperatureRule::fixed_untrusted_noise
                  ? 0.0
                  : mu_from_temperature(omega, temperature, r_E);
  sc.theta = theta;
  sc.lambda = lambda;
  return sc;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g;
  if (n <= 0) return g;
  if (n == 1) return {lo};
  if (!(lo > 0.0 && hi > lo)) throw ParameterError("log_grid: need 0 < lo < hi");
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < n; ++i) g.push_back(std::exp(a + (b - a) * i / (n - 1)));
  g.front() = lo;
  g.back() = hi;
  return g;
}

namespace {

using SecureFn = std::function<bool(double)>;

// Bisection on a predicate that holds at lo and fails at hi.
void bisect(const SecureFn& secure, double lo, double hi, double tol, BoundaryPoint& pt) {
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (secure(mid))
      lo = mid;
    else
      hi = mid;
  }
  pt.bracket_lo = lo;
  pt.bracket_hi = hi;
  pt.r_star = 0.5 * (lo + hi);
  pt.status = "root";
}

void solve_plain(const SecureFn& secure, const BoundaryOptions& opt, BoundaryPoint& pt) {
  pt.bracket_lo = opt.r_lo;
  pt.bracket_hi = opt.r_hi;
  if (!secure(opt.r_lo)) {
    pt.status = "insecure_throughout";
    return;
  }
  if (secure(opt.r_hi)) {
    pt.status = "secure_throughout";
    return;
  }
  bisect(secure, opt.r_lo, opt.r_hi, opt.tolerance, pt);
}

template <typename Solve>
BoundaryCurve scan(const std::vector<double>& omegas, const BoundaryScenario& base,
                   BoundaryMethod method, int threads, Solve solve) {
  BoundaryCurve out(omegas.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < omegas.size(); i = next++) {
      BoundaryPoint& pt = out[i];
      pt.omega = omegas[i];
      pt.method = method;
      try {
        pt.n_bar = base.temperature.target_occupation(omegas[i]);
        solve(omegas[i], pt);
      } catch (const std::exception& ex) {
        pt.r_star.reset();
        pt.status = "error";
        pt.message = ex.what();
      }
    }
  };
  const int n = std::clamp(threads, 1, std::max<int>(1, static_cast<int>(omegas.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace

BoundaryCurve weak_boundary(const std::vector<double>& omegas, const BoundaryScenario& base,
                            const BoundaryOptions& opt) {
  return scan(omegas, base, BoundaryMethod::weak, opt.threads, [&](double omega, BoundaryPoint& pt) {
    auto secure = [&](double r) { return weak_limit_coefficient(base.at(omega, r)) > 0.0; };
    solve_plain(secure, opt, pt);
  });
}

double max_rate(const ScenarioConfig& sc, const std::vector<double>& s_grid, bool early_exit,
                const HolevoOptions& hopt, const QuadratureOptions& qopt) {
  double best = -std::numeric_limits<double>::infinity();
  for (double s : s_grid) {
    const double r = key_rate(sc, s, hopt, qopt).R;
    best = std::max(best, r);
    if (early_exit && best > 0.0) break;
  }
  return best;
}

BoundaryCurve numeric_boundary(const std::vector<double>& omegas, const BoundaryScenario& base,
                               const std::vector<double>& s_grid, const BoundaryOptions& opt) {
  if (s_grid.empty()) throw ParameterError("numeric_boundary: empty s grid");
  BoundaryOptions inner = opt;
  inner.threads = 1;
  return scan(omegas, base, BoundaryMethod::numeric, opt.threads, [&](double omega, BoundaryPoint& pt) {
    auto secure = [&](double r) {
      return max_rate(base.at(omega, r), s_grid, true, opt.holevo, opt.quadrature) > 0.0;
    };
    // Seed the bracket around the weak-limit root, then widen until the sign flips.
    const BoundaryCurve weak = weak_boundary({omega}, base, inner);
    if (!weak[0].r_star) {
      solve_plain(secure, opt, pt);
      return;
    }
    const double seed = *weak[0].r_star;
    double step = 0.02;
    double lo = std::max(opt.r_lo, seed - step);
    while (!secure(lo)) {
      if (lo <= opt.r_lo) {
        pt.bracket_lo = opt.r_lo;
        pt.bracket_hi = opt.r_hi;
        pt.status = "insecure_throughout";
        return;
      }
      step *= 2.0;
      lo = std::max(opt.r_lo, seed - step);
    }
    step = 0.02;
    double hi = std::min(opt.r_hi, seed + step);
    while (secure(hi)) {
      if (hi >= opt.r_hi) {
        pt.bracket_lo = opt.r_lo;
        pt.bracket_hi = opt.r_hi;
        pt.status = "secure_throughout";
        return;
      }
      lo = hi;
      step *= 2.0;
      hi = std::min(opt.r_hi, seed + step);
    }
    bisect(secure, lo, hi, opt.tolerance, pt);
  });
}

OptimalSignal optimal_signal(const ScenarioConfig& sc, const std::vector<double>& s_grid,
                             const HolevoOptions& hopt, const QuadratureOptions& qopt) {
  if (s_grid.empty()) throw ParameterError("optimal_signal: empty grid");
  auto rate = [&](double s) { return key_rate(sc, s, hopt, qopt).R; };
  OptimalSignal best;
  best.R = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    const double r = rate(s_grid[i]);
    if (r > best.R) {
      best.R = r;
      best.s = s_grid[i];
      best.grid_index = i;
    }
  }
  if (s_grid.size() >= 3) {
    const std::size_t i = best.grid_index;
    double a = s_grid[i == 0 ? 0 : i - 1];
    double b = s_grid[std::min(i + 1, s_grid.size() - 1)];
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a);
    double d = a + g * (b - a);
    double fc = rate(c);
    double fd = rate(d);
    for (int it = 0; it < 40 && b - a > 1e-8 * std::max(1.0, b); ++it) {
      if (fc > fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - g * (b - a);
        fc = rate(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + g * (b - a);
        fd = rate(d);
      }
    }
    const double sm = fc > fd ? c : d;
    const double rm = std::max(fc, fd);
    if (rm > best.R) {
      best.R = rm;
      best.s = sm;
    }
  }
  best.secure = best.R > 0.0;
  return best;
}

}  // namespace cvqkd
