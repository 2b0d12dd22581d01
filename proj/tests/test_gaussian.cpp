#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "cvqkd/errors.hpp"
#include "cvqkd/gaussian.hpp"
#include "cvqkd/oracles.hpp"

using namespace cvqkd;

namespace {

Eigen::VectorXd sorted_spectrum(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
  Eigen::VectorXd w = es.eigenvalues();
  std::sort(w.data(), w.data() + w.size(), std::greater<>());
  return w;
}

double spectrum_gap(const CMatrix& a, const CMatrix& b) {
  Eigen::VectorXd x = sorted_spectrum(a), y = sorted_spectrum(b);
  const Eigen::Index n = std::max(x.size(), y.size());
  x.conservativeResizeLike(Eigen::VectorXd::Zero(n));
  y.conservativeResizeLike(Eigen::VectorXd::Zero(n));
  return (x - y).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("source and channel composition") {
  SourceChannelParams p;
  p.zeta_tilde = {0.3, -0.2};
  p.n0 = 0.7;
  auto out = compose_source_channel(p);
  CHECK(out.zeta == p.zeta_tilde);
  CHECK(out.n == 0.7);

  p.t = 0.0;
  p.r = 1.0;
  p.n_a = 2.0;
  out = compose_source_channel(p);
  CHECK(out.zeta == cplx(0.0));
  CHECK(out.n == 2.0);

  p.t = 0.8;
  p.r = 0.6;
  p.n0 = 1.0;
  out = compose_source_channel(p);
  CHECK(out.n == doctest::Approx(1.36).epsilon(1e-14));

  p.r = 0.7;
  CHECK_THROWS_AS(compose_source_channel(p), ParameterError);
}

TEST_CASE("untrusted noise") {
  CHECK(untrusted_noise({0.0, 1.0}) == 0.0);
  CHECK(untrusted_noise({0.5, 0.0}) == 0.0);
  CHECK(untrusted_noise({0.5, 1.0}) == doctest::Approx(0.34527446138545387).epsilon(1e-14));
  CHECK_THROWS_AS(untrusted_noise({1.2, 0.1}), ParameterError);
}

TEST_CASE("thermal occupation from frequency and temperature") {
  const double omega_one = std::log(2.0) * kBoltzmann * 300.0 / kHbar;
  CHECK(bose_einstein_occupation(omega_one, 300.0) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(bose_einstein_occupation(2e13, 300.0) == doctest::Approx(1.506057449844657).epsilon(1e-12));
  CHECK(bose_einstein_occupation(3e14, 300.0) == doctest::Approx(0.000481911156989013).epsilon(1e-10));
  CHECK(bose_einstein_occupation(1e20, 1.0) == 0.0);
}

TEST_CASE("normal form at the reference scenario") {
  // independent covariance-matrix values
  const auto nf = environment_normal_form({0.5, 0.6}, 0.3);
  CHECK(nf.n2 == doctest::Approx(0.09407277710381623).epsilon(1e-12));
  CHECK(nf.n3 == doctest::Approx(0.12040472301936345).epsilon(1e-12));
  CHECK(thermal_entropy_g(nf.n2) + thermal_entropy_g(nf.n3) == doctest::Approx(0.702986737510278).epsilon(1e-12));
  CHECK(nf.n_E == doctest::Approx(0.25 * std::sinh(0.6) * std::sinh(0.6)).epsilon(1e-14));
  CHECK(std::tanh(2.0 * nf.gamma) * (nf.Y + 2.0) == doctest::Approx(2.0 * nf.tau_t).epsilon(1e-13));
  CHECK(nf.n2 - nf.n3 == doctest::Approx(0.25 * (0.3 - std::sinh(0.6) * std::sinh(0.6))).epsilon(1e-12));
}

TEST_CASE("normal form agrees with symplectic eigenvalues on a parameter sweep") {
  for (int k = 0; k < 100; ++k) {
    const double n = 3.0 * std::fmod(0.5 + k * 0.7548776662, 1.0);
    const double r = 0.02 + 0.96 * std::fmod(0.5 + k * 0.5698402910, 1.0);
    const double mu = 2.0 * std::fmod(0.5 + k * 0.3141592654, 1.0);
    const auto nf = environment_normal_form({r, mu}, n);
    const auto nu = oracle::environment_symplectic_eigenvalues(n, r, mu);
    CHECK(std::abs(2.0 * std::min(nf.n2, nf.n3) + 1.0 - nu[0]) < 1e-10);
    CHECK(std::abs(2.0 * std::max(nf.n2, nf.n3) + 1.0 - nu[1]) < 1e-10);
  }
}

TEST_CASE("normal form limits") {
  SUBCASE("no squeezing leaves only the leaked channel noise") {
    const auto nf = environment_normal_form({0.5, 0.0}, 0.3);
    CHECK(nf.gamma == 0.0);
    CHECK(nf.n3 == 0.0);
    CHECK(nf.n2 == doctest::Approx(0.25 * 0.3).epsilon(1e-14));
    CHECK(std::isinf(nf.beta3));
  }
  SUBCASE("vacuum channel and tiny squeezing give a near-vacuum environment") {
    const auto nf = environment_normal_form({0.5, 1e-6}, 0.0);
    CHECK(nf.n2 < 1e-12);
    CHECK(nf.n3 < 1e-12);
    CHECK(std::abs(nf.gamma) < 1e-5);
  }
  SUBCASE("decoupled eavesdropper is reported as degenerate") {
    CHECK_THROWS_AS(environment_normal_form({0.0, 0.6}, 0.3), DegenerateScenarioError);
  }
}

TEST_CASE("environment displacements") {
  const EavesdropperParams e{0.5, 0.6};
  const auto nf = environment_normal_form(e, 0.3);
  const auto zero = environment_displacement({0.4, 0.2}, 0.0, e, nf.gamma);
  CHECK(zero.z2 == cplx(0.0));
  CHECK(zero.z3 == cplx(0.0));
  const cplx zeta(0.4, -0.7);
  const double s = 1.3;
  const auto z = environment_displacement(zeta, s, e, nf.gamma);
  CHECK(std::norm(z.z2) - std::norm(z.z3) == doctest::Approx(s * s * std::norm(zeta) * 0.25).epsilon(1e-13));
}

TEST_CASE("analytic environment state reproduces the purification spectrum") {
  const EavesdropperParams e{0.5, 0.6};
  const auto nf = environment_normal_form(e, 0.3);
  for (cplx zeta : {cplx(0.0), cplx(0.7071067811865476, 0.7071067811865476), cplx(-1.0, 0.0)}) {
    const auto o = three_mode_purification_oracle(0.3, 0.5, 0.6, zeta, 1.0, FockCutoff(12), 1e-6);
    const auto a = environment_component(nf, environment_displacement(zeta, 1.0, e, nf.gamma), FockCutoff(24));
    CHECK(spectrum_gap(o.rho_E.matrix(), a.matrix()) < 1e-6);
  }
}

TEST_CASE("environment entropy at zero signal") {
  const auto nf = environment_normal_form({0.5, 0.6}, 0.3);
  const auto o = three_mode_purification_oracle(0.3, 0.5, 0.6, 0.0, 0.0, FockCutoff(16), 1e-6);
  CHECK(std::abs(von_neumann_entropy(o.rho_E) - thermal_entropy_g(nf.n2) - thermal_entropy_g(nf.n3)) < 1e-6);
}

TEST_CASE("round trip holds up to s|zeta| = 1.5 in a second scenario") {
  const EavesdropperParams e{0.3, 0.4};
  const double n = 0.2;
  const auto nf = environment_normal_form(e, n);
  const cplx zeta(1.2, 0.9);
  const auto o = three_mode_purification_oracle(n, e.r_E, e.mu, zeta, 1.0, FockCutoff(14), 1e-6);
  const auto a = environment_component(nf, environment_displacement(zeta, 1.0, e, nf.gamma), FockCutoff(24));
  CHECK(spectrum_gap(o.rho_E.matrix(), a.matrix()) < 1e-6);
}

TEST_CASE("receiver state") {
  const EavesdropperParams e{0.5, 0.6};
  const DensityMatrix b = receiver_state(0.3, e, {0.5, 0.2}, 1.0, FockCutoff(30));
  const double occ = 0.3 * 0.75 + untrusted_noise(e);
  const DensityMatrix ref = displaced_thermal(occ, std::sqrt(0.75) * cplx(0.5, 0.2), FockCutoff(30));
  CHECK((b.matrix() - ref.matrix()).cwiseAbs().maxCoeff() < 1e-14);
}
