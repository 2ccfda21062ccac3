#include <doctest.h>

#include <cmath>
#include <vector>

#include "dilution/errors.hpp"
#include "dilution/one_atom.hpp"

using namespace dilution;

TEST_CASE("one atom G1 matches the kernel argmax") {
  const auto s = solve_one_atom(Criterion::g1(100), 30);
  CHECK(s.x_unconstrained == doctest::Approx(r_kernel_argmax() / 100).epsilon(1e-7));
  CHECK_FALSE(s.at_boundary);
}

TEST_CASE("clipping law") {
  for (double lambda : {5.0, 20.0, 47.0, 48.5, 100.0, 400.0}) {
    const auto s = solve_one_atom(Criterion::g1(lambda), 30);
    CHECK(s.x_star == doctest::Approx(std::min(s.x_unconstrained, 1.0 / 30)));
    CHECK(s.at_boundary == (s.x_unconstrained > 1.0 / 30));
  }
}

TEST_CASE("one atom objective agrees with evaluate") {
  const std::vector<Criterion> cs{
      Criterion::make(CriterionKind::G2, Prior::uniform(120)),
      Criterion::make(CriterionKind::G3, Prior::gamma(30)),
      Criterion::make(CriterionKind::G4, Prior::uniform(60)),
      Criterion::make(CriterionKind::G4, Prior::gamma(50)),
      Criterion::make(CriterionKind::G4Cost, Prior::gamma(50)),
  };
  for (const auto& c : cs)
    for (double x : {0.005, 0.02, 0.03}) {
      const double a = one_atom_objective(c, 30, x);
      const double b = evaluate(c, DesignMeasure::single(x, 30)).value;
      CHECK(a == doctest::Approx(b).epsilon(1e-8));
    }
}

TEST_CASE("G1 thresholds") {
  CHECK(threshold(ThresholdFamily::G1, 30) == doctest::Approx(47.81).epsilon(2e-4));
  const double cost = threshold(ThresholdFamily::G1Cost, 30);
  CHECK(cost < 47.8);
  CHECK(cost > 30);
}

TEST_CASE("thresholds grow with n in the opposite direction") {
  // Fewer mice allow larger doses, so the threshold moves down as n decreases.
  const double t30 = threshold(ThresholdFamily::G1, 30);
  const double t20 = threshold(ThresholdFamily::G1, 20);
  CHECK(t20 < t30);
  CHECK(t30 == doctest::Approx(30 * r_kernel_argmax()).epsilon(1e-4));
}

TEST_CASE("unconstrained dose decreases along the G3 uniform family") {
  double prev = 1e300;
  for (double u : {60.0, 90.0, 120.0, 200.0}) {
    const auto s = solve_one_atom(family_criterion(ThresholdFamily::G3Uniform, u), 30);
    CHECK(s.x_unconstrained < prev);
    prev = s.x_unconstrained;
  }
}

TEST_CASE("G2 uniform has no threshold") {
  CHECK_THROWS_AS(threshold(ThresholdFamily::G2Uniform, 30), Error);
}

TEST_CASE("sweep rows follow parameters") {
  const std::vector<double> p{30, 50, 100};
  const auto rows = sweep(ThresholdFamily::G1, 30, p);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].x_star == doctest::Approx(1.0 / 30));
  CHECK(rows[2].x_star == doctest::Approx(r_kernel_argmax() / 100).epsilon(1e-7));
}

TEST_CASE("family names round trip") {
  for (auto f : {ThresholdFamily::G1, ThresholdFamily::G1Cost, ThresholdFamily::G2Uniform,
                 ThresholdFamily::G2Gamma, ThresholdFamily::G3Uniform, ThresholdFamily::G3Gamma,
                 ThresholdFamily::G4Uniform, ThresholdFamily::G4Gamma, ThresholdFamily::G4CostGamma})
    CHECK(threshold_family_from_string(to_string(f)) == f);
  CHECK_THROWS_AS(threshold_family_from_string("G7"), Error);
}

TEST_CASE("cross check one atom against the full optimizer") {
  OptimizerConfig cfg;
  cfg.grid_points = 400;
  cfg.budget_scan_points = 20;
  const auto g1 = cross_check(Criterion::g1(100), 30, cfg);
  CHECK(g1.agree);
  CHECK(g1.x_difference < 1e-5);
  const auto g3 = cross_check(Criterion::make(CriterionKind::G3, Prior::uniform(120)), 30, cfg);
  CHECK(g3.agree);
  CHECK(g3.x_difference < 1e-4);
  // Two atoms beat any single atom here.
  const auto mix = cross_check(Criterion::mixture(25, 150, 0.05), 30, cfg);
  CHECK_FALSE(mix.agree);
  CHECK(mix.objective_gap > 0);
}
