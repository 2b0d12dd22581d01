#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cvqkd/rates.hpp"

namespace cvqkd {

/// How the environment temperature fixes the squeezing mu at given (omega, r_E).
enum class TemperatureRule {
  /// sinh^2(mu) = n_bar(omega, T): the eavesdropper's two-mode squeezed state purifies the
  /// ambient thermal field, so n_E = r_E^2 n_bar.
  ambient_purification,
  /// n_E = r_E^2 sinh^2(mu) = n_bar(omega, T) independent of r_E.
  fixed_untrusted_noise,
};

std::string to_string(TemperatureRule rule);
TemperatureRule temperature_rule_from_string(const std::string& name);

struct TemperatureConstraint {
  double T = 300.0;
  TemperatureRule rule = TemperatureRule::ambient_purification;

  /// The occupation the rule pins: n_E for fixed_untrusted_noise, sinh^2(mu) otherwise.
  double target_occupation(double omega) const { return bose_einstein_occupation(omega, T); }
};

/// mu for the given rule. Throws ParameterError for r_E = 0 under fixed_untrusted_noise.
double mu_from_temperature(double omega, const TemperatureConstraint& tc, double r_E);

/// Trusted channel settings; n defaults to n_bar(omega, T) when unset.
struct ChannelProfile {
  std::optional<double> n;
  cplx t_channel = 1.0;
};

/// Scenario template for a boundary scan: everything except r_E and omega.
struct BoundaryScenario {
  Constellation constellation{{cplx(1.0, 1.0), cplx(1.0, -1.0), cplx(-1.0, 1.0), cplx(-1.0, -1.0)},
                              {}};
  TemperatureConstraint temperature;
  ChannelProfile channel;
  double theta = 0.0;
  double lambda = 1.0;

  ScenarioConfig at(double omega, double r_E) const;
};

enum class BoundaryMethod { weak, numeric };
std::string to_string(BoundaryMethod m);

struct BoundaryPoint {
  double omega = 0.0;
  double n_bar = 0.0;
  BoundaryMethod method = BoundaryMethod::weak;
  std::optional<double> r_star;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  std::string status;  // root | secure_throughout | insecure_throughout | error
  std::string message;
};

struct BoundaryOptions {
  double r_lo = 1e-6;
  double r_hi = 1.0;
  double tolerance = 1e-4;
  int threads = 1;
  HolevoOptions holevo;
  QuadratureOptions quadrature;
};

using BoundaryCurve = std::vector<BoundaryPoint>;

/// Root of r_E -> C(scenario(omega, r_E)) per omega.
BoundaryCurve weak_boundary(const std::vector<double>& omegas, const BoundaryScenario& base,
                            const BoundaryOptions& opt = {});

/// Root of r_E -> max_s R(s) per omega, bracket seeded from the weak boundary.
BoundaryCurve numeric_boundary(const std::vector<double>& omegas, const BoundaryScenario& base,
                               const std::vector<double>& s_grid, const BoundaryOptions& opt = {});

/// Largest R over s_grid; stops at the first strictly positive value when early_exit is set.
double max_rate(const ScenarioConfig& sc, const std::vector<double>& s_grid, bool early_exit,
                const HolevoOptions& hopt = {}, const QuadratureOptions& qopt = {});

struct OptimalSignal {
  double s = 0.0;
  double R = 0.0;
  std::size_t grid_index = 0;
  bool secure = false;
};

/// Grid argmax of R refined by golden-section search between the neighbouring grid points.
OptimalSignal optimal_signal(const ScenarioConfig& sc, const std::vector<double>& s_grid,
                             const HolevoOptions& hopt = {}, const QuadratureOptions& qopt = {});

/// n points logarithmically spaced over [lo, hi].
std::vector<double> log_grid(double lo, double hi, int n);

}  // namespace cvqkd
