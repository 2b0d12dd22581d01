#pragma once

// Closed-form Gaussian layer: source/channel composition, untrusted noise and the
// normal form of the eavesdropper's two-mode state.

#include <complex>

#include "cvqkd/fock.hpp"

namespace cvqkd {

inline constexpr double kHbar = 1.054571817e-34;       // J s
inline constexpr double kBoltzmann = 1.380649e-23;     // J / K

struct SourceChannelParams {
  cplx t = 1.0;
  cplx r = 0.0;
  cplx zeta_tilde = 0.0;
  double n0 = 0.0;
  double n_a = 0.0;

  void validate() const;
};

struct ChannelOutput {
  cplx zeta;
  double n;
};

struct EavesdropperParams {
  double r_E = 0.0;
  double mu = 0.0;

  double t_E() const { return std::sqrt(1.0 - r_E * r_E); }
  void validate() const;
};

/// Parameters of the eavesdropper's averaged state written as
/// S(gamma) [rho_th(n2) (x) rho_th(n3)] S(gamma)^dagger, plus displacements per point.
///
/// gamma is the total two-mode squeezing angle of the environment covariance.
/// X = r_E^2 n / cosh^2(mu) so that tanh(2 gamma) (Y + 2) = 2 tau_t holds exactly.
struct EnvironmentNormalForm {
  double tau_t = 0.0;
  double n_r = 0.0;
  double X = 0.0;
  double Y = 0.0;
  double gamma = 0.0;
  double n2 = 0.0;
  double n3 = 0.0;
  double beta2 = 0.0;  // +inf when n2 == 0
  double beta3 = 0.0;  // +inf when n3 == 0
  double n_E = 0.0;
};

struct EnvironmentDisplacement {
  cplx z2;
  cplx z3;
};

/// zeta = t * zeta_tilde, n = |t|^2 n0 + |r|^2 n_a.
ChannelOutput compose_source_channel(const SourceChannelParams& p);

/// n_E = r_E^2 sinh^2(mu).
double untrusted_noise(const EavesdropperParams& e);

/// Throws DegenerateScenarioError when r_E == 0 (the environment is decoupled).
EnvironmentNormalForm environment_normal_form(const EavesdropperParams& e, double n);

/// z2 = -s zeta r_E cosh(gamma), z3 = s conj(zeta) r_E sinh(gamma).
EnvironmentDisplacement environment_displacement(cplx zeta, double s,
                                                 const EavesdropperParams& e, double gamma);

/// g(n) = (n+1) ln(n+1) - n ln n, g(0) = 0.
double thermal_entropy_g(double n);

/// 1 / (exp(hbar omega / k_B T) - 1); returns 0 when the exponent overflows.
double bose_einstein_occupation(double omega, double temperature);

/// D(z2) (x) D(z3) [rho_th(n2) (x) rho_th(n3)] D^dagger in the two-mode truncated basis.
DensityMatrix environment_component(const EnvironmentNormalForm& nf,
                                    const EnvironmentDisplacement& z, FockCutoff cutoff,
                                    double tail_tolerance = kDefaultTailTolerance);

/// Receiver-side state: displaced thermal with amplitude t_E s zeta and
/// occupation n t_E^2 + n_E.
DensityMatrix receiver_state(double n, const EavesdropperParams& e, cplx zeta, double s,
                             FockCutoff cutoff, double tail_tolerance = kDefaultTailTolerance);

/// Displaced thermal state D(alpha) rho_th(n) D(alpha)^dagger.
DensityMatrix displaced_thermal(double n, cplx alpha, FockCutoff cutoff,
                                double tail_tolerance = kDefaultTailTolerance);

}  // namespace cvqkd
