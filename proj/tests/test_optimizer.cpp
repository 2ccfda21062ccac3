#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "dilution/errors.hpp"
#include "dilution/optimizer.hpp"

using namespace dilution;

namespace {

OptimizerConfig small_config() {
  OptimizerConfig c;
  c.grid_points = 400;
  c.budget_scan_points = 20;
  return c;
}

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace

TEST_CASE("grid contains 1/n and is sorted") {
  OptimizerConfig c;
  const auto g = make_grid(c, 30);
  CHECK(std::is_sorted(g.begin(), g.end()));
  CHECK(g.front() == doctest::Approx(1e-4));
  CHECK(g.back() == doctest::Approx(1.0));
  CHECK(std::find_if(g.begin(), g.end(), [](double x) { return std::abs(x - 1.0 / 30) < 1e-15; }) != g.end());
}

TEST_CASE("projection lands on the slice") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> z(0.0, 5.0);
  OptimizerConfig c;
  c.grid_points = 300;
  const auto x = make_grid(c, 30);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(x.size());
    for (auto& e : v) e = z(rng);
    const double b = 30 * 1e-4 + (1.0 - 30e-4) * (trial + 0.5) / 200;
    const auto p = project_to_slice(v, x, 30, b);
    CHECK(*std::min_element(p.begin(), p.end()) >= 0.0);
    CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(30).epsilon(1e-10));
    CHECK(dot(p, x) == doctest::Approx(b).epsilon(1e-9));
  }
}

TEST_CASE("projection is a closest point") {
  // Against random feasible points: <v - p, q - p> <= 0 for all q on the slice.
  std::mt19937_64 rng(11);
  std::normal_distribution<double> z(0.0, 2.0);
  const std::vector<double> x{0.01, 0.02, 0.05, 0.1, 0.3};
  const double n = 4, b = 0.3;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(x.size());
    for (auto& e : v) e = z(rng);
    const auto p = project_to_slice(v, x, n, b);
    for (int k = 0; k < 50; ++k) {
      std::vector<double> w(x.size());
      for (auto& e : w) e = std::abs(z(rng));
      const auto q = project_to_slice(w, x, n, b);
      double s = 0;
      for (std::size_t i = 0; i < x.size(); ++i) s += (v[i] - p[i]) * (q[i] - p[i]);
      CHECK(s <= 1e-9);
    }
  }
}

TEST_CASE("projection at the corner budget") {
  OptimizerConfig c;
  c.grid_points = 200;
  const auto x = make_grid(c, 30);
  std::vector<double> v(x.size(), 1.0);
  const auto p = project_to_slice(v, x, 30, 30 * x.front());
  CHECK(p.front() == doctest::Approx(30));
  CHECK(std::accumulate(p.begin() + 1, p.end(), 0.0) == doctest::Approx(0).epsilon(1e-9));
}

TEST_CASE("linear inner problem matches LP vertex enumeration") {
  // For G1 the objective is linear; the LP optimum sits on at most two atoms.
  const Criterion c = Criterion::g1(40);
  OptimizerConfig cfg;
  cfg.grid_points = 120;
  const auto x = make_grid(cfg, 30);
  const GridCriterion gc(c, x);
  std::vector<double> g(x.size());
  std::vector<double> zero(x.size(), 0.0);
  gc.value_and_gradient(zero, g);
  for (double b : {0.1, 0.5, 0.9}) {
    double best = -1e300;
    for (std::size_t i = 0; i < x.size(); ++i)
      for (std::size_t j = i; j < x.size(); ++j) {
        double mi, mj;
        if (i == j) {
          if (std::abs(30 * x[i] - b) > 1e-12) continue;
          mi = 30, mj = 0;
        } else {
          mj = (b - 30 * x[i]) / (x[j] - x[i]);
          mi = 30 - mj;
          if (mi < 0 || mj < 0) continue;
        }
        best = std::max(best, mi * g[i] + mj * g[j]);
      }
    std::vector<double> start(x.size(), 0.0);
    const auto r = inner_solve(gc, 30, b, start, cfg);
    CHECK(r.objective == doctest::Approx(best).epsilon(1e-9));
  }
}

TEST_CASE("optimize G1 point mass, inactive volume") {
  const auto r = optimize(Criterion::g1(100), 30, small_config());
  REQUIRE(r.measure.size() == 1);
  CHECK(r.measure.atoms()[0].x == doctest::Approx(0.0159362).epsilon(1e-4));
  CHECK(r.measure.atoms()[0].m == doctest::Approx(30));
  CHECK(r.certificate.passed);
  CHECK_FALSE(r.certificate.volume_active);
}

TEST_CASE("optimize G1 point mass, active volume") {
  const auto r = optimize(Criterion::g1(20), 30, small_config());
  REQUIRE(r.measure.size() == 1);
  CHECK(r.measure.atoms()[0].x == doctest::Approx(1.0 / 30).epsilon(1e-9));
  CHECK(r.certificate.passed);
  CHECK(r.certificate.volume_active);
  CHECK(r.certificate.u2 > 0);
}

TEST_CASE("optimize mixture gives two atoms") {
  const auto r = optimize(Criterion::mixture(25, 150, 0.05), 30, small_config());
  REQUIRE(r.measure.size() == 2);
  CHECK(r.certificate.passed);
  CHECK(total_volume(r.measure) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(r.measure.atoms()[0].x == doctest::Approx(0.0188748).epsilon(2e-3));
  CHECK(r.measure.atoms()[1].x == doctest::Approx(0.0578251).epsilon(2e-3));
  CHECK(r.measure.atoms()[0].m == doctest::Approx(18.864).epsilon(2e-3));
}

TEST_CASE("optimize rejects infeasible mouse counts") {
  OptimizerConfig c = small_config();
  CHECK_THROWS_AS(optimize(Criterion::g1(100), 20000, c), Error);
}

TEST_CASE("certify accepts the optimum and rejects a bad design") {
  const auto grid = make_grid(OptimizerConfig{}, 30);
  const auto good = certify(Criterion::g1(100), DesignMeasure::single(0.0159362426004004, 30), 1e-6, grid);
  CHECK(good.passed);
  const auto bad = certify(Criterion::g1(20), DesignMeasure::single(0.02, 30), 1e-6, grid);
  CHECK_FALSE(bad.passed);
  CHECK(bad.max_violation > 0);
}

TEST_CASE("certify rejects perturbed optima") {
  const auto grid = make_grid(OptimizerConfig{}, 30);
  const Criterion c = Criterion::mixture(25, 150, 0.05);
  const DesignMeasure shifted({{0.0188748 * 0.8, 18.864}, {0.0578251 * 1.05, 11.136}});
  CHECK_FALSE(certify(c, shifted, 1e-6, grid).passed);
}

TEST_CASE("refine merges nearby atoms") {
  OptimizerConfig cfg = small_config();
  const Criterion g3 = Criterion::make(CriterionKind::G3, Prior::uniform(120));
  const auto a = refine(g3, 30, DesignMeasure({{0.025, 29.97}, {0.026, 0.03}}), 2, cfg);
  REQUIRE(a.size() == 1);
  CHECK(a.atoms()[0].x == doctest::Approx(0.02524).epsilon(1e-3));
  CHECK(a.atoms()[0].m == doctest::Approx(30));

  const Criterion g1 = Criterion::g1(20);
  const auto b = refine(g1, 30, DesignMeasure({{0.033, 20.07}, {0.034, 9.93}}), 2, cfg);
  REQUIRE(b.size() == 1);
  CHECK(b.atoms()[0].x == doctest::Approx(1.0 / 30).epsilon(1e-9));
}

TEST_CASE("budget trace is recorded") {
  const auto r = optimize(Criterion::g1(100), 30, small_config());
  CHECK(r.trace.size() >= 20);
  CHECK(r.budget <= 1.0);
  CHECK(r.objective >= r.coarse_objective * (1 - 1e-12));
}

TEST_CASE("config validation") {
  OptimizerConfig c;
  c.grid_points = 1;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.x_min = 0;
  CHECK_THROWS_AS(c.validate(), Error);
}
