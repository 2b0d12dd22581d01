#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cvqkd/constellation.hpp"
#include "cvqkd/errors.hpp"

using namespace cvqkd;

TEST_CASE("four-point family") {
  const Constellation c = build_constellation({});
  REQUIRE(c.size() == 4);
  for (const cplx z : {cplx(1, 1), cplx(1, -1), cplx(-1, 1), cplx(-1, -1)}) {
    bool found = false;
    for (std::size_t j = 0; j < c.size(); ++j)
      if (std::abs(c.points()[j] - z) < 1e-15) {
        found = true;
        CHECK(c.probs()[j] == 0.25);
      }
    CHECK(found);
  }
  CHECK(c.mean_energy() == doctest::Approx(2.0));
  CHECK(c.min_separation() == doctest::Approx(2.0));
}

TEST_CASE("recentering") {
  const Constellation single({cplx(3.0, -1.0)}, {1.0});
  CHECK(std::abs(single.points()[0]) == 0.0);
  CHECK(shannon_entropy(single) == 0.0);

  const Constellation pair({0.0, 2.0}, {0.5, 0.5});
  CHECK(pair.points()[0] == cplx(-1.0));
  CHECK(pair.points()[1] == cplx(1.0));
}

TEST_CASE("invalid constellations are rejected") {
  CHECK_THROWS_AS(Constellation({}, {}), ParameterError);
  CHECK_THROWS_AS(Constellation({0.0, 1.0}, {0.5}), ParameterError);
  CHECK_THROWS_AS(Constellation({0.0, 1.0}, {1.2, -0.2}), ParameterError);
  CHECK_THROWS_AS(Constellation({1.0, 1.0}, {0.5, 0.5}), ParameterError);
  ConstellationSpec bad;
  bad.family = "hexagon";
  CHECK_THROWS_AS(build_constellation(bad), ParameterError);
}

TEST_CASE("other families") {
  ConstellationSpec psk;
  psk.family = "psk";
  psk.order = 8;
  const Constellation p = build_constellation(psk);
  CHECK(p.size() == 8);
  CHECK(p.min_separation() == doctest::Approx(2.0 * std::sin(std::numbers::pi / 8.0)));

  ConstellationSpec grid;
  grid.family = "grid";
  grid.grid_nx = 3;
  grid.grid_ny = 2;
  CHECK(build_constellation(grid).size() == 6);

  ConstellationSpec bpsk;
  bpsk.family = "bpsk";
  const Constellation b = build_constellation(bpsk);
  CHECK(b.size() == 2);
  CHECK(std::abs(b.points()[0].imag()) == 0.0);
}

TEST_CASE("Shannon entropy") {
  CHECK(shannon_entropy(std::vector<double>{0.25, 0.25, 0.25, 0.25}) == doctest::Approx(std::log(4.0)).epsilon(1e-15));
  CHECK(shannon_entropy(std::vector<double>{1.0}) == 0.0);
  CHECK(shannon_entropy(std::vector<double>{0.5, 0.25, 0.25}) == doctest::Approx(1.5 * std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("quadrature projection") {
  const Constellation c = build_constellation({});
  SUBCASE("aligned projection merges pairs") {
    const auto d = project_quadrature(c, 1.0, 1.0);
    REQUIRE(d.values.size() == 2);
    CHECK(d.values[0] == doctest::Approx(-std::sqrt(2.0)));
    CHECK(d.values[1] == doctest::Approx(std::sqrt(2.0)));
    CHECK(d.probs[0] == 0.5);
    CHECK(shannon_entropy(d) == doctest::Approx(std::log(2.0)));
  }
  SUBCASE("rotation by pi/4 gives three levels") {
    const auto d = project_quadrature(c, std::polar(1.0, std::numbers::pi / 4.0), 1.0);
    REQUIRE(d.values.size() == 3);
    CHECK(d.probs[0] == doctest::Approx(0.25));
    CHECK(d.probs[1] == doctest::Approx(0.5));
    CHECK(std::abs(d.values[1]) < 1e-12);
    CHECK(shannon_entropy(d) == doctest::Approx(1.5 * std::log(2.0)));
  }
  SUBCASE("zero amplitude collapses to one value") {
    const auto d = project_quadrature(c, 1.0, 0.0);
    REQUIRE(d.values.size() == 1);
    CHECK(d.values[0] == 0.0);
    CHECK(shannon_entropy(d) == 0.0);
  }
}

TEST_CASE("projection never increases entropy") {
  ConstellationSpec spec;
  spec.family = "psk";
  spec.order = 6;
  spec.phase = 0.3;
  const Constellation c = build_constellation(spec);
  for (int k = 0; k < 64; ++k) {
    const auto d = project_quadrature(c, std::polar(1.0, 0.1 * k), 0.8);
    CHECK(shannon_entropy(d) <= shannon_entropy(c) + 1e-12);
  }
}
