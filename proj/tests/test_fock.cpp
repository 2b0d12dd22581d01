#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "cvqkd/errors.hpp"
#include "cvqkd/fock.hpp"
#include "cvqkd/gaussian.hpp"
#include "cvqkd/oracles.hpp"

using namespace cvqkd;

namespace {

double max_dev(const CMatrix& a, const CMatrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

// Coherent state |alpha> on the first `dim` levels.
CVector coherent(cplx alpha, int dim) {
  CVector v(dim);
  cplx c = std::exp(-0.5 * std::norm(alpha));
  for (int k = 0; k < dim; ++k) {
    v(k) = c;
    c *= alpha / std::sqrt(k + 1.0);
  }
  return v;
}

}  // namespace

TEST_CASE("thermal density at zero temperature is the vacuum") {
  const DensityMatrix rho = thermal_density(0.0, FockCutoff(4));
  CMatrix expect = CMatrix::Zero(5, 5);
  expect(0, 0) = 1.0;
  CHECK(max_dev(rho.matrix(), expect) == 0.0);
}

TEST_CASE("thermal populations follow the geometric law") {
  const DensityMatrix rho = thermal_density(1.0, FockCutoff(60), 1e-15);
  for (int k = 0; k < 6; ++k) CHECK(rho.matrix()(k, k).real() == doctest::Approx(std::pow(0.5, k + 1)).epsilon(1e-12));
  CHECK(von_neumann_entropy(rho) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-10));
}

TEST_CASE("thermal density rejects negative occupation and an undersized cutoff") {
  CHECK_THROWS_AS(thermal_density(-0.1, FockCutoff(5)), ParameterError);
  CHECK_THROWS_AS(thermal_density(2.0, FockCutoff(5)), TruncationError);
  CHECK_THROWS_AS(FockCutoff(-1), ParameterError);
}

TEST_CASE("entropy closed form for thermal states") {
  // g(0.5) = 1.5 ln 1.5 - 0.5 ln 0.5
  const double g05 = 0.9547712524422192;
  CHECK(thermal_entropy_g(0.5) == doctest::Approx(g05).epsilon(1e-14));
  for (double n : {0.1, 0.5, 1.0, 2.0}) {
    const int n_max = static_cast<int>(std::ceil(std::log(1e-14) / std::log(n / (1.0 + n))));
    const double h = von_neumann_entropy(thermal_density(n, FockCutoff(n_max), 1e-12));
    CHECK(std::abs(h - thermal_entropy_g(n)) < 1e-8);
  }
}

TEST_CASE("entropy edge cases") {
  CMatrix pure = CMatrix::Zero(3, 3);
  pure(1, 1) = 1.0;
  CHECK(std::abs(von_neumann_entropy(DensityMatrix(pure, {3}))) < 1e-10);
  const CMatrix mixed = CMatrix::Identity(4, 4) / 4.0;
  CHECK(von_neumann_entropy(DensityMatrix(mixed, {4})) == doctest::Approx(std::log(4.0)).epsilon(1e-12));

  const std::vector<double> noisy{1.0, -5e-9};
  CHECK(entropy_of_spectrum(noisy) == 0.0);
  const std::vector<double> broken{1.0, -1e-6};
  CHECK_THROWS_AS(entropy_of_spectrum(broken), StateValidityError);
}

TEST_CASE("density matrix constructor enforces its invariants") {
  CMatrix m = CMatrix::Identity(2, 2) * 0.5;
  m(0, 1) = 0.1;
  CHECK_THROWS_AS(DensityMatrix(m, {2}), StateValidityError);
  CHECK_THROWS_AS(DensityMatrix(CMatrix::Identity(2, 2), {2}), StateValidityError);
  CHECK_THROWS_AS(DensityMatrix(CMatrix::Identity(4, 4) / 4.0, {3}), StateValidityError);
  CMatrix neg = CMatrix::Zero(2, 2);
  neg(0, 0) = 1.2;
  neg(1, 1) = -0.2;
  const DensityMatrix d(neg, {2});
  CHECK_THROWS_AS(d.validate(), StateValidityError);
}

TEST_CASE("displacement matrix elements") {
  CHECK(max_dev(displacement_matrix(0.0, FockCutoff(6)).entries, CMatrix::Identity(7, 7)) < 1e-15);
  CHECK(std::abs(displacement_element(1.0, 0, 0)) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
  CHECK(std::abs(displacement_element(1.0, 0, 0)) == doctest::Approx(0.6065306597126334).epsilon(1e-14));

  const CMatrix ref = oracle::displacement_by_exponential({0.5, 0.3}, 20, 80);
  CHECK(max_dev(ref, displacement_block({0.5, 0.3}, 20, 20)) < 1e-10);

  // far off-diagonal elements stay finite for large amplitudes
  const CMatrix big = displacement_block({12.0, -5.0}, 300, 300);
  CHECK(big.allFinite());
}

TEST_CASE("displacement composes to the identity on the lower basis half") {
  const FockCutoff c(40);
  const CMatrix prod = displacement_matrix({0.5, 0.3}, c, 1.0).entries *
                       displacement_matrix({-0.5, -0.3}, c, 1.0).entries;
  CHECK(max_dev(prod.topLeftCorner(20, 20), CMatrix::Identity(20, 20)) < 1e-8);
}

TEST_CASE("displacement refuses a cutoff that clips the coherent amplitude") {
  CHECK_THROWS_AS(displacement_matrix({3.0, 0.0}, FockCutoff(5)), TruncationError);
}

TEST_CASE("two-mode squeezer") {
  CHECK(max_dev(two_mode_squeeze_matrix(0.0, FockCutoff(3)).entries, CMatrix::Identity(16, 16)) < 1e-15);
  const OperatorMatrix f = two_mode_squeeze_matrix(0.5, FockCutoff(5), 1.0);
  // <1,1|F|0,0> = tanh(mu) / cosh(mu)
  CHECK(std::abs(f.entries(1 * 6 + 1, 0) - std::tanh(0.5) / std::cosh(0.5)) < 1e-14);
  CHECK(max_dev(oracle::squeeze_by_series(0.5, 6, 22), f.entries) < 1e-10);
  CHECK(two_mode_squeeze_matrix(0.5, FockCutoff(30), 1.0).unitarity_residual(4) < 1e-8);
}

TEST_CASE("partial trace of the squeezed vacuum is thermal") {
  const double mu = 0.6;
  const FockCutoff c(40);
  const CVector psi = two_mode_squeeze_matrix(mu, c, 1e-6).entries.col(0);
  const DensityMatrix pair(psi * psi.adjoint(), {41, 41}, 0.0, 1e-9);
  const std::vector<int> keep{0};
  const DensityMatrix one = partial_trace(pair, keep);
  const DensityMatrix th = thermal_density(std::sinh(mu) * std::sinh(mu), c, 1e-9);
  CHECK(max_dev(one.matrix(), th.matrix()) < 1e-10);
  CHECK(one.trace() == doctest::Approx(pair.trace()).epsilon(1e-14));
}

TEST_CASE("partial trace of a product returns the factor") {
  const DensityMatrix a = displaced_thermal(0.2, {0.3, 0.1}, FockCutoff(10));
  const DensityMatrix b = thermal_density(0.4, FockCutoff(8), 1e-3);
  const std::vector<int> first{0}, second{1};
  CHECK(max_dev(partial_trace(tensor(a, b), first).matrix(), a.matrix() * b.trace()) < 1e-14);
  CHECK(max_dev(partial_trace(tensor(a, b), second).matrix(), b.matrix() * a.trace()) < 1e-14);
}

TEST_CASE("beam splitter") {
  CHECK(max_dev(beam_splitter_matrix(1.0, 0.0, FockCutoff(4)).entries, CMatrix::Identity(25, 25)) < 1e-15);
  CHECK(beam_splitter_matrix(0.8, 0.6, FockCutoff(20)).unitarity_residual(10) < 1e-10);
  CHECK_THROWS_AS(beam_splitter_matrix(0.8, 0.7, FockCutoff(3)), ParameterError);

  // coherent input (alpha, 0) leaves as (t alpha, -r alpha)
  const cplx alpha(0.7, -0.4);
  const int d = 31;
  const OperatorMatrix bs = beam_splitter_matrix(0.8, 0.6, FockCutoff(d - 1));
  CVector in = CVector::Zero(d * d);
  const CVector ca = coherent(alpha, d);
  for (int i = 0; i < d; ++i) in(i * d) = ca(i);
  const CVector out = bs.entries * in;
  const CVector c1 = coherent(0.8 * alpha, d);
  const CVector c2 = coherent(-0.6 * alpha, d);
  CVector expect(d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) expect(i * d + j) = c1(i) * c2(j);
  CHECK(std::norm(expect.dot(out)) > 1.0 - 1e-8);
}

TEST_CASE("unitary conjugation preserves trace and entropy") {
  const FockCutoff c(14);
  const DensityMatrix pair = tensor(thermal_density(0.02, c, 1e-12), thermal_density(0.03, c, 1e-12));
  const DensityMatrix out = conjugate(pair, beam_splitter_matrix(0.8, cplx(0.36, 0.48), c));
  CHECK(out.trace() == doctest::Approx(pair.trace()).epsilon(1e-12));
  CHECK(von_neumann_entropy(out) == doctest::Approx(von_neumann_entropy(pair)).epsilon(1e-10));
  CHECK_THROWS_AS(conjugate(thermal_density(0.1, FockCutoff(5), 1e-3), beam_splitter_matrix(0.8, 0.6, FockCutoff(5))),
                  ParameterError);
}

TEST_CASE("entropy is additive over tensor products") {
  const DensityMatrix a = thermal_density(0.3, FockCutoff(14));
  const DensityMatrix b = displaced_thermal(0.2, {0.4, 0.1}, FockCutoff(14));
  CHECK(von_neumann_entropy(tensor(a, b)) ==
        doctest::Approx(von_neumann_entropy(a) + von_neumann_entropy(b)).epsilon(1e-10));
}

TEST_CASE("Wigner function of the vacuum") {
  const DensityMatrix vac = thermal_density(0.0, FockCutoff(6));
  GridSpec g;
  g.x_min = g.p_min = -5.0;
  g.x_max = g.p_max = 5.0;
  g.nx = g.np = 101;
  const WignerGrid w = wigner_grid(vac, g);
  CHECK(w.values(50, 50) == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-12));
  CHECK(std::abs(w.normalization() - 1.0) < 1e-3);
  CHECK(w.local_maxima() == 1);
  CHECK(w.coverage_ok);
}

TEST_CASE("Wigner grid too small for the state raises a coverage warning") {
  const DensityMatrix rho = displaced_thermal(0.5, {3.0, 0.0}, FockCutoff(40));
  GridSpec g;
  g.x_min = g.p_min = -1.0;
  g.x_max = g.p_max = 1.0;
  g.nx = g.np = 11;
  const WignerGrid w = wigner_grid(rho, g);
  CHECK_FALSE(w.coverage_ok);
  CHECK_FALSE(w.warning.empty());
}

TEST_CASE("covering grid encloses a displaced state") {
  const DensityMatrix rho = displaced_thermal(0.2, {2.0, -1.0}, FockCutoff(40));
  const GridSpec g = covering_grid(rho, 81);
  CHECK(g.nx % 2 == 1);
  const WignerGrid w = wigner_grid(rho, g);
  CHECK(w.coverage_ok);
  CHECK(std::abs(w.normalization() - 1.0) < 1e-3);
  CHECK(w.local_maxima() == 1);
}

TEST_CASE("purification oracle: trivial scenario") {
  const auto o = three_mode_purification_oracle(0.4, 0.0, 0.0, 0.0, 0.0, FockCutoff(12), 1e-4);
  // populations above n_max are absent from the oracle input, everything below is exact
  const auto pops = thermal_populations(0.4, 13);
  for (int k = 0; k < 13; ++k) CHECK(std::abs(o.rho_B.matrix()(k, k).real() - pops[k]) < 1e-15);
  CHECK(o.rho_B.matrix().bottomRightCorner(24, 24).cwiseAbs().maxCoeff() == 0.0);
  CHECK(std::abs(o.rho_E.matrix()(0, 0) - o.rho_B.trace()) < 1e-14);
}

TEST_CASE("purification oracle matches the receiver state") {
  const EavesdropperParams e{0.5, 0.6};
  const cplx z(0.6, -0.5);
  const auto o = three_mode_purification_oracle(0.3, 0.5, 0.6, z, 1.0, FockCutoff(12), 1e-6);
  const DensityMatrix b = receiver_state(0.3, e, z, 1.0, FockCutoff(o.rho_B.dim() - 1));
  CHECK(max_dev(o.rho_B.matrix(), b.matrix()) < 1e-6);
  o.rho_B.validate();
  o.rho_E.validate();
}
