// Acceptance run: the numerical reproduction checks plus the property suites.
// Prints the detail table, then one PASS/FAIL line per criterion.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <random>

#include "dilution/criteria.hpp"
#include "dilution/io.hpp"
#include "dilution/one_atom.hpp"
#include "dilution/optimizer.hpp"
#include "dilution/reproduce.hpp"

using namespace dilution;

namespace {

using Clock = std::chrono::steady_clock;

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

CheckResult row(const std::string& name, double worst, double tol, Clock::time_point t0) {
  const double s = std::chrono::duration<double>(Clock::now() - t0).count();
  return {9, name, "< " + sci(tol), sci(worst), sci(tol), worst < tol, s};
}

std::vector<Criterion> smooth_criteria() {
  return {
      Criterion::make(CriterionKind::G3, Prior::uniform(120)),
      Criterion::make(CriterionKind::G3, Prior::gamma(30)),
      Criterion::make(CriterionKind::G4, Prior::uniform(60)),
      Criterion::make(CriterionKind::G4, Prior::gamma(50)),
      Criterion::make(CriterionKind::G1Cost, Prior::point(45)),
      Criterion::make(CriterionKind::G4Cost, Prior::gamma(50)),
      Criterion::make(CriterionKind::G4Cost, Prior::uniform(80), CostWeights{0.01, 2.0}),
  };
}

std::vector<Criterion> linear_criteria() {
  return {
      Criterion::g1(100),
      Criterion::g1(20),
      Criterion::make(CriterionKind::G2, Prior::uniform(120)),
      Criterion::make(CriterionKind::G2, Prior::gamma(50)),
      Criterion::mixture(25, 150, 0.05),
  };
}

CheckResult gradient_fd() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> loc(2e-3, 0.03), mass(1.0, 10.0), dir(-1.0, 1.0);
  double worst = 0.0;
  for (const auto& c : smooth_criteria()) {
    for (int t = 0; t < 20; ++t) {
      std::vector<double> x(4), m(4), eta(4);
      double sum = 0.0;
      for (int j = 0; j < 4; ++j) {
        x[j] = loc(rng), m[j] = mass(rng), eta[j] = dir(rng);
        sum += eta[j];
      }
      for (auto& e : eta) e -= sum / 4;
      auto at = [&](double h) {
        std::vector<Atom> a;
        for (int j = 0; j < 4; ++j) a.push_back({x[j], m[j] + h * eta[j]});
        return evaluate(c, DesignMeasure(a));
      };
      const auto e = at(0);
      double predicted = 0.0;
      for (int j = 0; j < 4; ++j) predicted += eta[j] * e.gradient(x[j]);
      const double h = 1e-6;
      const double fd = (at(h).value - at(-h).value) / (2 * h);
      worst = std::max(worst, std::abs(fd - predicted) / std::abs(predicted));
    }
  }
  return row("gradient vs finite difference", worst, 1e-4, t0);
}

CheckResult linear_integral() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> loc(1e-3, 0.5), mass(0.5, 10.0);
  double worst = 0.0;
  for (const auto& c : linear_criteria()) {
    for (int t = 0; t < 20; ++t) {
      std::vector<Atom> a;
      for (int j = 0; j < 3; ++j) a.push_back({loc(rng), mass(rng)});
      const DesignMeasure mu(a);
      const auto e = evaluate(c, mu);
      double integral = 0.0;
      for (const auto& at : mu.atoms()) integral += at.m * e.gradient(at.x);
      worst = std::max(worst, std::abs(e.value - integral) / std::abs(e.value));
    }
  }
  return row("linear value = integral of gradient", worst, 1e-10, t0);
}

CheckResult g4_uniform_quadrature() {
  const auto t0 = Clock::now();
  using boost::math::quadrature::gauss_kronrod;
  double worst = 0.0;
  const double n = 30;
  for (double u : {2.0, 20.0, 64.47, 120.0, 400.0}) {
    const Criterion c = Criterion::make(CriterionKind::G4, Prior::uniform(u));
    for (double x : {0.005, 0.02, 1.0 / 30, 0.1}) {
      const DesignMeasure mu = DesignMeasure::single(x, n);
      auto f = [&](double l) { return -1.0 / fisher_information(mu, l) / (u - 1); };
      double err = 0;
      const double quad = gauss_kronrod<double, 61>::integrate(f, 1.0, u, 15, 1e-14, &err);
      const double closed = one_atom_objective(c, n, x);
      worst = std::max(worst, std::abs(closed - quad) / std::abs(quad));
    }
  }
  return row("G4 uniform closed form vs quadrature", worst, 1e-8, t0);
}

CheckResult perturbed_certificates() {
  const auto t0 = Clock::now();
  const auto grid = make_grid(OptimizerConfig{}, 30);
  struct Case {
    Criterion c;
    DesignMeasure mu;
  };
  const std::vector<Case> cases{
      {Criterion::g1(100), DesignMeasure::single(0.0159362426004004 * 1.1, 30)},
      {Criterion::g1(20), DesignMeasure::single(0.02, 30)},
      {Criterion::mixture(25, 150, 0.05), DesignMeasure({{0.0188748 * 0.85, 18.864}, {0.0578251, 11.136}})},
      {Criterion::make(CriterionKind::G3, Prior::uniform(120)), DesignMeasure::single(0.02, 30)},
      {Criterion::make(CriterionKind::G4, Prior::gamma(50)), DesignMeasure::single(0.02, 30)},
  };
  int accepted = 0;
  for (const auto& k : cases) accepted += certify(k.c, k.mu, 1e-6, grid).passed;
  // the unperturbed optimum must still pass
  const bool base = certify(Criterion::g1(100), DesignMeasure::single(0.0159362426004004, 30), 1e-6, grid).passed;
  auto r = row("certificate rejects perturbed designs", accepted + (base ? 0 : 1), 0.5, t0);
  r.target = "0 accepted";
  r.computed = std::to_string(accepted) + " accepted" + (base ? "" : ", optimum rejected");
  r.tolerance = "exact";
  return r;
}

CheckResult brute_force_oracle() {
  const auto t0 = Clock::now();
  OptimizerConfig cfg;
  cfg.grid_points = 300;
  cfg.refine_rounds = 0;
  const double n = 30;
  const auto x = make_grid(cfg, n);
  double worst = 0.0;
  for (const auto& c : linear_criteria()) {
    const auto g = evaluate(c, DesignMeasure{}).gradient;
    std::vector<double> gx(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) gx[i] = g(x[i]);
    // Vertices of {m >= 0, sum m = n, sum x m <= 1} carry at most two atoms.
    double best = -INFINITY;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (n * x[i] <= 1.0 + 1e-15) best = std::max(best, n * gx[i]);
      for (std::size_t j = i + 1; j < x.size(); ++j) {
        const double mj = (1.0 - n * x[i]) / (x[j] - x[i]);
        if (mj < 0 || mj > n) continue;
        best = std::max(best, (n - mj) * gx[i] + mj * gx[j]);
      }
    }
    const auto r = optimize(c, n, cfg);
    worst = std::max(worst, (best - r.objective) / std::abs(best));
  }
  return row("optimizer vs 2-atom brute force", worst, 1e-6, t0);
}

}  // namespace

int main() {
  ReproduceOptions options;
  auto results = run_reproduction(options);
  for (auto&& r : {gradient_fd(), linear_integral(), g4_uniform_quadrature(), perturbed_certificates(),
                   brute_force_oracle()})
    results.push_back(r);
  std::stable_sort(results.begin(), results.end(),
                   [](const CheckResult& a, const CheckResult& b) { return a.criterion < b.criterion; });

  std::cout << format_table(results) << "\n";
  std::map<int, bool> verdict;
  for (const auto& r : results) {
    auto [it, fresh] = verdict.try_emplace(r.criterion, true);
    it->second = it->second && r.passed;
  }
  bool all = true;
  for (const auto& [k, ok] : verdict) {
    std::cout << "criterion " << k << ": " << (ok ? "PASS" : "FAIL") << "\n";
    all = all && ok;
  }
  return all ? 0 : 1;
}
