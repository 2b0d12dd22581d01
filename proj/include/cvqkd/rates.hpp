#pragma once

// Mutual information, Holevo bound and key rate for a discretely modulated
// displaced-thermal source observed through a homodyne receiver.

#include <string>
#include <vector>

#include "cvqkd/constellation.hpp"
#include "cvqkd/gaussian.hpp"

namespace cvqkd {

/// Fully resolved physical scenario. Constellation points are source amplitudes;
/// the channel multiplies them by t_channel before the eavesdropper's beam splitter.
struct ScenarioConfig {
  Constellation constellation{{cplx(0.0)}, {1.0}};
  cplx t_channel = 1.0;
  double n = 0.0;  // trusted channel occupation
  EavesdropperParams eve;
  double theta = 0.0;
  double lambda = 1.0;

  void validate() const;
  /// Amplitude zeta_j = t_channel * zeta~_j arriving at the eavesdropper's beam splitter.
  cplx channel_point(std::size_t j) const { return t_channel * constellation.points()[j]; }
  double receiver_occupation() const;
};

struct QuadratureKernel {
  double sigma2 = 1.0;
  std::vector<double> means;
  std::vector<double> probs;
};

/// sigma^2 = 2 (n t_E^2 + n_E) + 1, means sqrt(2) Re(t_E t_channel s zeta e^{i theta}).
QuadratureKernel quadrature_kernel(const ScenarioConfig& sc, double s);

struct QuadratureOptions {
  double panels_per_sigma = 4.0;
  double half_width_sigmas = 8.0;
  double abs_tolerance = 1e-9;
};

/// I = h(sum_j p_j Q_j) - h(Q) for Gaussian conditionals of variance sigma^2/2, via
/// composite Gauss-Legendre. Throws NumericError when halving the panel count
/// changes the result by more than abs_tolerance.
double mutual_information(const QuadratureKernel& k, const QuadratureOptions& opt = {});
double mutual_information(const ScenarioConfig& sc, double s, const QuadratureOptions& opt = {});

struct HolevoOptions {
  double initial_tail = 1e-8;   // discarded reference-state weight, first attempt
  double min_tail = 1e-14;
  double change_tolerance = 1e-6;
  int max_dimension = 6000;
};

struct HolevoResult {
  double chi = 0.0;
  int levels = 0;         // highest thermal level retained in either mode
  int dimension = 0;      // size of the diagonalized matrix
  double tail_mass = 0.0; // discarded weight of the reference state
};

/// chi = H(sum_j p_j D(z_j) rho_ref D(z_j)^dagger) - H(rho_ref). The averaged state's
/// spectrum is obtained exactly from the Gram matrix of its purified components, so no
/// Fock cutoff enters; only the thermal spectrum of rho_ref is truncated, adaptively.
HolevoResult holevo_bound(const ScenarioConfig& sc, double s, const HolevoOptions& opt = {});

/// Same quantity through a dense two-mode Fock-space eigendecomposition. Doubles n_max
/// (capped at max_n_max) until chi changes by less than change_tolerance. A non-positive
/// start_n_max selects ceil(4 (n_eff + |z|_max^2) + 10).
HolevoResult holevo_bound_fock(const ScenarioConfig& sc, double s, int start_n_max = 0,
                               double change_tolerance = 1e-6, int max_n_max = 40);

/// Holevo quantity of an arbitrary ensemble of states.
double holevo_quantity(const std::vector<double>& probs, const std::vector<CMatrix>& states);

struct RatePoint {
  double s = 0.0;
  double I = 0.0;
  double chi = 0.0;
  double R = 0.0;
  int cutoff = 0;
  double tail_mass = 0.0;
  double classicality = 0.0;
  double min_separation = 0.0;
  bool ok = true;
  std::string error;
};

RatePoint key_rate(const ScenarioConfig& sc, double s, const HolevoOptions& hopt = {},
                   const QuadratureOptions& qopt = {});

/// Analytic curvature C with [lambda I - chi](s) = C s^2 / 2 + O(s^4).
double weak_limit_coefficient(const ScenarioConfig& sc);

/// Parts of C: the information term and the leakage term (C = info - leak).
struct CurvatureTerms {
  double info = 0.0;
  double leak = 0.0;
};
CurvatureTerms weak_limit_terms(const ScenarioConfig& sc);

struct Classicality {
  double max_overlap = 1.0;
  double min_distance = 0.0;
};

/// max over pairs of exp[-(|dz2|^2/n2 + |dz3|^2/n3)] and the smallest |dz|.
Classicality classicality_diagnostic(const ScenarioConfig& sc, double s);

/// Single-mode marginal (mode 2 or 3) of the averaged environment state in the normal-mode
/// frame: sum_j p_j D(z_m(zeta_j)) rho_th(n_m) D^dagger. For r_E = 0 the environment is the
/// undisturbed two-mode squeezed vacuum, whose marginal is thermal with sinh^2(mu).
DensityMatrix environment_mode_state(const ScenarioConfig& sc, double s, int mode,
                                     double tail_tolerance = 1e-8);

/// Evaluates key_rate on every grid point using up to `threads` workers; the output is in
/// grid order and per-point failures are recorded rather than thrown.
std::vector<RatePoint> rate_sweep(const ScenarioConfig& sc, const std::vector<double>& s_grid,
                                  int threads = 1, const HolevoOptions& hopt = {},
                                  const QuadratureOptions& qopt = {});

}  // namespace cvqkd
