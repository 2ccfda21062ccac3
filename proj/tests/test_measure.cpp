#include <doctest.h>

#include <random>

#include "dilution/errors.hpp"
#include "dilution/measure.hpp"

using namespace dilution;

TEST_CASE("total mass and volume") {
  const auto mu = DesignMeasure::single(1.0 / 30, 30);
  CHECK(total_mass(mu) == doctest::Approx(30.0));
  CHECK(total_volume(mu) == doctest::Approx(1.0));
  CHECK(total_mass(DesignMeasure{}) == 0.0);
  CHECK(total_volume(DesignMeasure{}) == 0.0);

  DesignMeasure two({{0.019, 18.98}, {0.058, 11.02}});
  CHECK(total_mass(two) == doctest::Approx(30.0).epsilon(1e-14));
  CHECK(total_volume(DesignMeasure::single(0.0159362, 30)) == doctest::Approx(0.478086).epsilon(1e-12));
}

TEST_CASE("linearity of the constraint functionals") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> loc(1e-3, 1.0), mass(0.0, 5.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Atom> a, b;
    for (int i = 0; i < 4; ++i) a.push_back({loc(rng), mass(rng)});
    for (int i = 0; i < 3; ++i) b.push_back({loc(rng), mass(rng)});
    DesignMeasure m1(a), m2(b);
    const double t = mass(rng);
    CHECK(total_mass(m1 + m2) == doctest::Approx(total_mass(m1) + total_mass(m2)));
    CHECK(total_volume(m1 + m2) == doctest::Approx(total_volume(m1) + total_volume(m2)));
    CHECK(total_mass(m1.scaled(t)) == doctest::Approx(t * total_mass(m1)));
    CHECK(total_volume(m1.scaled(t)) == doctest::Approx(t * total_volume(m1)));
  }
}

TEST_CASE("construction rejects bad atoms") {
  CHECK_THROWS_AS(DesignMeasure({{0.0, 1.0}}), Error);
  CHECK_THROWS_AS(DesignMeasure({{1.5, 1.0}}), Error);
  CHECK_THROWS_AS(DesignMeasure({{0.5, -1.0}}), Error);
  CHECK_NOTHROW(DesignMeasure({{1.0, 0.0}}));
}

TEST_CASE("normalize merges, drops and sorts") {
  CHECK(normalize(DesignMeasure({{0.5, 2}, {0.5, 3}})) == DesignMeasure({{0.5, 5}}));
  CHECK(normalize(DesignMeasure({{0.3, 1e-12}, {0.4, 30}}), 1e-9) == DesignMeasure({{0.4, 30}}));
  CHECK(normalize(DesignMeasure({{0.7, 1}, {0.2, 2}})) == DesignMeasure({{0.2, 2}, {0.7, 1}}));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> loc(1e-3, 1.0), mass(0.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Atom> a;
    for (int i = 0; i < 6; ++i) a.push_back({loc(rng), mass(rng)});
    a.push_back(a.front());
    const auto once = normalize(DesignMeasure(a));
    CHECK(normalize(once) == once);
    for (std::size_t i = 1; i < once.size(); ++i) CHECK(once.atoms()[i - 1].x < once.atoms()[i].x);
  }
}

TEST_CASE("rounding to an integer design") {
  const auto r = round_to_integer_design(DesignMeasure({{0.019, 18.98}, {0.058, 11.02}}), 1.0);
  CHECK(r == DesignMeasure({{0.019, 19}, {0.058, 11}}));

  const auto same = DesignMeasure::single(1.0 / 30, 30);
  CHECK(round_to_integer_design(same) == same);

  const auto grid_artifact =
      round_to_integer_design(DesignMeasure({{0.025, 29.97}, {0.026, 0.03}}));
  CHECK(grid_artifact == DesignMeasure({{0.025, 30}}));

  CHECK_THROWS_AS(round_to_integer_design(DesignMeasure({{0.1, 2.5}})), Error);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> loc(1e-3, 0.05), frac(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Atom> a;
    double left = 30.0;
    for (int i = 0; i < 3; ++i) {
      const double m = frac(rng) * left;
      a.push_back({loc(rng), m});
      left -= m;
    }
    a.push_back({loc(rng), left});
    const auto mu = normalize(DesignMeasure(a), 0.0);
    const auto rounded = round_to_integer_design(mu, 10.0);
    CHECK(total_mass(rounded) == 30.0);
    CHECK(rounded.size() <= mu.size());
    for (const auto& at : rounded.atoms()) CHECK(at.m == std::round(at.m));
  }
}
