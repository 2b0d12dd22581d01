#include "cvqkd/gaussian.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace cvqkd {

void SourceChannelParams::validate() const {
  if (std::abs(std::norm(t) + std::norm(r) - 1.0) > 1e-12)
    throw ParameterError("source channel: |t|^2 + |r|^2 must equal 1");
  if (n0 < 0.0 || n_a < 0.0) throw ParameterError("source channel: occupations must be >= 0");
}

void EavesdropperParams::validate() const {
  if (!(r_E >= 0.0 && r_E <= 1.0)) throw ParameterError("eavesdropper: r_E must lie in [0, 1]");
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw ParameterError("eavesdropper: mu must be >= 0");
}

ChannelOutput compose_source_channel(const SourceChannelParams& p) {
  p.validate();
  return {p.t * p.zeta_tilde, std::norm(p.t) * p.n0 + std::norm(p.r) * p.n_a};
}

double untrusted_noise(const EavesdropperParams& e) {
  e.validate();
  const double sh = std::sinh(e.mu);
  return e.r_E * e.r_E * sh * sh;
}

EnvironmentNormalForm environment_normal_form(const EavesdropperParams& e, double n) {
  e.validate();
  if (n < 0.0) throw ParameterError("environment_normal_form: channel occupation must be >= 0");
  if (e.r_E == 0.0)
    throw DegenerateScenarioError("environment_normal_form: r_E = 0, environment decoupled");

  const double r = e.r_E;
  const double r2 = r * r;
  const double t = e.t_E();
  const double sh = std::sinh(e.mu);
  const double ch = std::cosh(e.mu);
  const double u = sh * sh;

  EnvironmentNormalForm nf;
  nf.n_E = r2 * u;
  nf.tau_t = t * std::tanh(e.mu);
  nf.n_r = r2 * n / (1.0 - nf.tau_t * nf.tau_t);
  nf.X = r2 * n / (ch * ch);
  nf.Y = nf.X + nf.tau_t * nf.tau_t - 1.0;
  nf.gamma = 0.5 * std::atanh(2.0 * nf.tau_t / (nf.Y + 2.0));

  // n2 + n3 + 1 = S = sqrt((A+B+1)^2 - 4K^2), evaluated through S^2 - 1 to keep small
  // occupations accurate; n2 - n3 = A - B.
  const double q = r2 * n * n + 2.0 * n * (1.0 + t * t) * u + r2 * u * u + 2.0 * (n + u);
  const double s_total = std::sqrt(1.0 + r2 * q);
  const double sum = r2 * q / (s_total + 1.0);
  const double diff = r2 * (n - u);
  nf.n2 = std::max(0.0, 0.5 * (sum + diff));
  nf.n3 = std::max(0.0, 0.5 * (sum - diff));
  constexpr double inf = std::numeric_limits<double>::infinity();
  nf.beta2 = nf.n2 > 0.0 ? std::log1p(1.0 / nf.n2) : inf;
  nf.beta3 = nf.n3 > 0.0 ? std::log1p(1.0 / nf.n3) : inf;
  return nf;
}

EnvironmentDisplacement environment_displacement(cplx zeta, double s,
                                                 const EavesdropperParams& e, double gamma) {
  const double a = s * e.r_E;
  return {-a * zeta * std::cosh(gamma), a * std::conj(zeta) * std::sinh(gamma)};
}

double thermal_entropy_g(double n) {
  if (n < 0.0) throw ParameterError("thermal_entropy_g: occupation must be >= 0");
  if (n == 0.0) return 0.0;
  return (n + 1.0) * std::log1p(n) - n * std::log(n);
}

double bose_einstein_occupation(double omega, double temperature) {
  if (!(omega > 0.0) || !(temperature > 0.0))
    throw ParameterError("bose_einstein_occupation: omega and T must be positive");
  const double x = kHbar * omega / (kBoltzmann * temperature);
  if (x > 700.0) return 0.0;
  return 1.0 / std::expm1(x);
}

DensityMatrix displaced_thermal(double n, cplx alpha, FockCutoff cutoff, double tail_tolerance) {
  const DensityMatrix th = thermal_density(n, cutoff, tail_tolerance);
  if (alpha == cplx(0.0)) return th;
  return conjugate(th, displacement_matrix(alpha, cutoff, tail_tolerance));
}

DensityMatrix environment_component(const EnvironmentNormalForm& nf,
                                    const EnvironmentDisplacement& z, FockCutoff cutoff,
                                    double tail_tolerance) {
  const DensityMatrix a = displaced_thermal(nf.n2, z.z2, cutoff, tail_tolerance);
  const DensityMatrix b = displaced_thermal(nf.n3, z.z3, cutoff, tail_tolerance);
  return tensor(a, b);
}

DensityMatrix receiver_state(double n, const EavesdropperParams& e, cplx zeta, double s,
                             FockCutoff cutoff, double tail_tolerance) {
  const double t = e.t_E();
  return displaced_thermal(n * t * t + untrusted_noise(e), t * s * zeta, cutoff, tail_tolerance);
}

}  // namespace cvqkd
