#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "dilution/errors.hpp"
#include "dilution/io.hpp"

using namespace dilution;

TEST_CASE("measure JSON round trip is exact") {
  const DesignMeasure mu({{0.0188748123456789, 18.8641}, {0.0578251, 11.1359}});
  CHECK(measure_from_json(Json::parse(to_json(mu).dump())) == mu);
  CHECK(measure_from_csv(measure_csv(mu)) == mu);
}

TEST_CASE("prior JSON and text form round trips") {
  for (const Prior& p : {Prior::point(100), Prior::uniform(120), Prior::uniform(80, 5),
                         Prior::gamma(50), Prior::gamma(3.5, 0.25), Prior::two_point(25, 150, 0.05)}) {
    CHECK(prior_from_json(Json::parse(to_json(p).dump())) == p);
    CHECK(parse_prior(prior_spec(p)) == p);
  }
  CHECK_THROWS_AS(parse_prior("beta:1,2"), Error);
  CHECK_THROWS_AS(parse_prior("gamma:"), Error);
}

TEST_CASE("criterion JSON round trip") {
  for (const Criterion& c : {Criterion::g1(100), Criterion::mixture(25, 150, 0.05),
                             Criterion::make(CriterionKind::G4Cost, Prior::gamma(50), CostWeights{0.5, 3}),
                             Criterion::make(CriterionKind::G3, Prior::uniform(120))})
    CHECK(criterion_from_json(Json::parse(to_json(c).dump())) == c);
}

TEST_CASE("certificate JSON round trip") {
  OptimalityCertificate c;
  c.u1 = 1.5;
  c.u2 = 0.25;
  c.volume_active = true;
  c.passed = true;
  c.diagnostic = "ok";
  const auto d = certificate_from_json(to_json(c));
  CHECK(d.u1 == c.u1);
  CHECK(d.u2 == c.u2);
  CHECK(d.volume_active);
  CHECK(d.diagnostic == "ok");
}

TEST_CASE("numbers format for round trip") {
  for (double v : {0.1, 1.0 / 3, 1e-300, 123456789.125})
    CHECK(std::stod(format_number(v)) == v);
}

TEST_CASE("CSV writers are deterministic") {
  const std::vector<TraceRow> t{{0.1, 2.0, 3, true}, {0.2, 2.5, 4, false}};
  CHECK(trace_csv(t) == trace_csv(t));
  CHECK(trace_csv(t).rfind("budget,objective,iterations,certified\n", 0) == 0);
  const std::vector<SweepRow> s{{50, 0.03, 0.03, 1.0}};
  CHECK(sweep_csv(s).rfind("parameter,x_star,x_unconstrained,objective\n", 0) == 0);
}

TEST_CASE("non-finite values serialize as null") {
  VarianceReport r;
  r.empirical_var = std::numeric_limits<double>::quiet_NaN();
  CHECK(to_json(r)["empirical_var"].is_null());
}

TEST_CASE("file helpers report IO errors") {
  CHECK_THROWS_AS(read_file("/nonexistent/dir/file.json"), Error);
  const auto p = (std::filesystem::temp_directory_path() / "dilution_io_test.txt").string();
  write_file(p, "abc");
  CHECK(read_file(p) == "abc");
  std::filesystem::remove(p);
}
