#include "dilution/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "dilution/errors.hpp"

namespace dilution {

void OptimizerConfig::validate() const {
  require(grid_points >= 2, "grid_points must be at least 2");
  require(x_min > 0.0 && x_min < 1.0, "x_min must lie in (0,1)");
  for (double b : budget_scan) require(b > 0.0 && b <= 1.0, "budgets must lie in (0,1]");
  require(budget_scan_points >= 1, "budget_scan_points must be positive");
  require(step.initial_step > 0.0 && step.shrink > 0.0 && step.shrink < 1.0 &&
              step.sufficient_decrease > 0.0 && step.sufficient_decrease < 1.0,
          "invalid Armijo parameters");
  require(max_iters >= 1, "max_iters must be positive");
  require(grad_tol > 0.0 && cert_tol > 0.0 && slack_tol > 0.0, "tolerances must be positive");
  require(refine_rounds >= 0, "refine_rounds must be nonnegative");
}

std::vector<double> make_grid(const OptimizerConfig& config, double n) {
  config.validate();
  require(n > 0.0, "total mass must be positive");
  const int J = config.grid_points;
  std::vector<double> grid(static_cast<std::size_t>(J));
  const double lmin = std::log(config.x_min);
  for (int j = 0; j < J; ++j) grid[j] = std::exp(lmin * (1.0 - static_cast<double>(j) / (J - 1)));
  grid.back() = 1.0;
  grid.front() = config.x_min;
  const double inv = 1.0 / n;
  if (inv > config.x_min && inv < 1.0) grid.push_back(inv);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end(),
                         [](double a, double b) { return b - a <= 1e-13 * b; }),
             grid.end());
  return grid;
}

// ---------------------------------------------------------------------------
// Projection onto {m >= 0, sum m = n, sum x m = b}: m = max(0, v - nu1 - nu2 x).
// For fixed nu2 the level nu1 is a simplex-projection threshold; the volume
// excess h(nu2) is then piecewise linear and nonincreasing, and a bracketed
// Newton iteration on it terminates on the exact linear piece.

namespace {

class SliceProjector {
 public:
  SliceProjector(std::span<const double> x, double n, double b) : x_(x), n_(n), b_(b) {
    require(!x.empty(), "empty grid");
    require(n > 0.0, "total mass must be positive");
    const double lo = n * x.front(), hi = n * x.back();
    const double eps = 1e-12 * std::max(1.0, b);
    if (b < lo - eps || b > hi + eps) {
      std::ostringstream os;
      os << "volume budget " << b << " outside the feasible range [" << lo << ", " << hi << "]";
      fail(ErrorCode::kInfeasible, os.str());
    }
    if (b <= lo + eps) corner_ = 0;
    else if (b >= hi - eps) corner_ = static_cast<long>(x.size()) - 1;
    active_.reserve(x.size());
  }

  bool at_corner() const { return corner_ >= 0; }

  void project(std::span<const double> v, std::span<double> m) {
    if (corner_ >= 0) {
      std::fill(m.begin(), m.end(), 0.0);
      m[static_cast<std::size_t>(corner_)] = n_;
      return;
    }
    const double tol = 1e-12 * b_;
    double c = nu2_;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    double step = std::max(1.0, std::abs(c));
    for (int it = 0; it < 500; ++it) {
      const Piece p = piece(v, c);
      if (std::abs(p.excess) <= tol) break;
      (p.excess > 0.0 ? lo : hi) = c;
      double next = p.slope < 0.0 ? c - p.excess / p.slope : std::numeric_limits<double>::quiet_NaN();
      if (!(next > lo && next < hi)) {
        if (std::isfinite(lo) && std::isfinite(hi)) next = 0.5 * (lo + hi);
        else if (std::isfinite(lo)) next = lo + (step *= 2.0);
        else next = hi - (step *= 2.0);
      }
      if (next == c) break;
      c = next;
    }
    nu2_ = c;
    const double tau = level(v, c);
    for (std::size_t j = 0; j < x_.size(); ++j) m[j] = std::max(0.0, v[j] - c * x_[j] - tau);
  }

 private:
  struct Piece {
    double excess;
    double slope;
  };

  // Threshold tau with sum max(0, v - c x - tau) = n (Michelot's iteration).
  double level(std::span<const double> v, double c) {
    active_.clear();
    double sum = 0.0;
    for (std::size_t j = 0; j < x_.size(); ++j) {
      active_.push_back(j);
      sum += v[j] - c * x_[j];
    }
    double tau = (sum - n_) / static_cast<double>(active_.size());
    for (;;) {
      std::size_t kept = 0;
      sum = 0.0;
      for (std::size_t i = 0; i < active_.size(); ++i) {
        const std::size_t j = active_[i];
        const double w = v[j] - c * x_[j];
        if (w > tau) {
          active_[kept++] = j;
          sum += w;
        }
      }
      const bool done = kept == active_.size();
      active_.resize(kept);
      tau = (sum - n_) / static_cast<double>(kept);
      if (done) return tau;
    }
  }

  Piece piece(std::span<const double> v, double c) {
    const double tau = level(v, c);
    double s1 = 0.0, sx = 0.0;
    for (std::size_t j : active_) {
      s1 += x_[j] * (v[j] - c * x_[j] - tau);
      sx += x_[j];
    }
    const double mean = sx / static_cast<double>(active_.size());
    double var = 0.0;
    for (std::size_t j : active_) var += (x_[j] - mean) * (x_[j] - mean);
    return {s1 - b_, -var};
  }

  std::span<const double> x_;
  double n_, b_;
  long corner_ = -1;
  double nu2_ = 0.0;
  std::vector<std::size_t> active_;
};

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

DesignMeasure to_measure(std::span<const double> x, std::span<const double> m, double n) {
  std::vector<Atom> atoms;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (m[j] > 0.0) atoms.push_back({x[j], m[j]});
  }
  auto mu = normalize(DesignMeasure(atoms), kDefaultDropTol);
  const double total = total_mass(mu);
  if (total > 0.0 && total != n) mu = mu.scaled(n / total);
  return mu;
}

std::vector<double> place_on_grid(std::span<const double> grid, const DesignMeasure& mu) {
  std::vector<double> m(grid.size(), 0.0);
  for (const auto& a : mu.atoms()) {
    auto it = std::lower_bound(grid.begin(), grid.end(), a.x);
    std::size_t j = static_cast<std::size_t>(it - grid.begin());
    if (j == grid.size() || (j > 0 && a.x - grid[j - 1] < grid[j] - a.x)) --j;
    m[j] += a.m;
  }
  return m;
}

bool better(double obj, double b, double best_obj, double best_b) {
  return obj > best_obj || (obj == best_obj && b < best_b);
}

struct BudgetSearch {
  InnerResult best;
  double budget = 0.0;
  std::vector<TraceRow> trace;
};

// Scan the budgets, then golden-section between the neighbours of the best
// one. The value as a function of the budget is concave.
BudgetSearch search_budgets(const GridCriterion& gc, double n, std::vector<double> budgets,
                            std::span<const double> start, const OptimizerConfig& config) {
  const auto x = gc.grid();
  const double lo = n * x.front(), hi = std::min(1.0, n * x.back());
  for (auto& b : budgets) b = std::clamp(b, lo, hi);
  std::sort(budgets.begin(), budgets.end());
  budgets.erase(std::unique(budgets.begin(), budgets.end()), budgets.end());
  require(!budgets.empty(), "no volume budgets to scan");

  BudgetSearch out;
  out.best.objective = -std::numeric_limits<double>::infinity();
  out.budget = std::numeric_limits<double>::infinity();
  std::vector<double> current(start.begin(), start.end());
  std::size_t best_index = 0;

  auto run = [&](double b, std::span<const double> from) {
    InnerResult r = inner_solve(gc, n, b, from, config);
    out.trace.push_back({b, r.objective, r.iterations, r.converged});
    const bool improved = better(r.objective, b, out.best.objective, out.budget);
    if (improved) {
      out.best = r;
      out.budget = b;
    }
    return std::pair{std::move(r), improved};
  };

  for (std::size_t i = 0; i < budgets.size(); ++i) {
    auto [r, improved] = run(budgets[i], current);
    if (improved) best_index = i;
    current = std::move(r.masses);
  }

  double a = budgets[best_index == 0 ? 0 : best_index - 1];
  double d = budgets[std::min(best_index + 1, budgets.size() - 1)];
  if (d - a <= 1e-9) return out;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double b1 = d - phi * (d - a), b2 = a + phi * (d - a);
  std::vector<double> warm = out.best.masses;
  double f1 = run(b1, warm).first.objective;
  double f2 = run(b2, warm).first.objective;
  for (int it = 0; it < 60 && d - a > 1e-7 * std::max(1.0, d); ++it) {
    warm = out.best.masses;
    if (f1 >= f2) {
      d = b2;
      b2 = b1;
      f2 = f1;
      b1 = d - phi * (d - a);
      f1 = run(b1, warm).first.objective;
    } else {
      a = b1;
      b1 = b2;
      f1 = f2;
      b2 = a + phi * (d - a);
      f2 = run(b2, warm).first.objective;
    }
  }
  return out;
}

}  // namespace

std::vector<double> project_to_slice(std::span<const double> v, std::span<const double> x,
                                     double n, double b) {
  require(v.size() == x.size(), "vector and grid sizes differ");
  require(std::is_sorted(x.begin(), x.end()), "grid must be sorted");
  SliceProjector p(x, n, b);
  std::vector<double> m(v.size());
  p.project(v, m);
  return m;
}

// ---------------------------------------------------------------------------
// Spectral projected gradient with Armijo backtracking.

InnerResult inner_solve(const GridCriterion& gc, double n, double budget,
                        std::span<const double> start, const OptimizerConfig& config) {
  const auto x = gc.grid();
  const std::size_t J = x.size();
  require(start.size() == J, "start vector must match the grid");
  SliceProjector proj(x, n, budget);

  InnerResult out;
  std::vector<double> m(J), g(J), trial(J), gt(J), tmp(J);
  proj.project(start, m);
  double f = gc.value_and_gradient(m, g);
  if (proj.at_corner()) {
    out.masses = std::move(m);
    out.objective = f;
    out.converged = true;
    return out;
  }

  auto range_of = [](std::span<const double> v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi - *lo;
  };
  auto stationarity = [&](double range) {
    if (!(range > 0.0)) return 0.0;
    const double a = n / range;
    for (std::size_t j = 0; j < J; ++j) tmp[j] = m[j] + a * g[j];
    proj.project(tmp, tmp);
    double s = 0.0;
    for (std::size_t j = 0; j < J; ++j) s = std::max(s, std::abs(tmp[j] - m[j]));
    return s / n;
  };

  double range = range_of(g);
  const double alpha0 = config.step.initial_step * n / std::max(range, 1e-300);
  const double alpha_min = 1e-10 * alpha0, alpha_max = 1e4 * alpha0;
  double alpha = alpha0;
  std::vector<double> d(J);

  int it = 0;
  for (; it < config.max_iters; ++it) {
    out.stationarity = stationarity(range);
    if (out.stationarity < config.grad_tol) {
      out.converged = true;
      break;
    }
    for (std::size_t j = 0; j < J; ++j) tmp[j] = m[j] + alpha * g[j];
    proj.project(tmp, tmp);
    for (std::size_t j = 0; j < J; ++j) d[j] = tmp[j] - m[j];
    const double gd = dot(g, d);
    if (!(gd > 0.0)) {
      out.converged = out.stationarity < std::sqrt(config.grad_tol);
      break;
    }
    double t = 1.0, ft = f;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t j = 0; j < J; ++j) trial[j] = std::max(0.0, m[j] + t * d[j]);
      ft = gc.value_and_gradient(trial, gt);
      if (ft >= f + config.step.sufficient_decrease * t * gd) {
        accepted = true;
        break;
      }
      t *= config.step.shrink;
    }
    if (!accepted) break;
    double ss = 0.0, sy = 0.0;
    for (std::size_t j = 0; j < J; ++j) {
      const double s = trial[j] - m[j];
      ss += s * s;
      sy += s * (gt[j] - g[j]);
    }
    alpha = sy < 0.0 ? std::clamp(ss / -sy, alpha_min, alpha_max) : alpha_max;
    m.swap(trial);
    g.swap(gt);
    f = ft;
    range = range_of(g);
  }
  out.iterations = it;
  out.masses = std::move(m);
  out.objective = f;
  return out;
}

DesignMeasure inner_solve(const Criterion& criterion, double n, double budget,
                          const std::vector<double>& grid, const DesignMeasure& start,
                          const OptimizerConfig& config) {
  std::vector<double> sorted = grid;
  std::sort(sorted.begin(), sorted.end());
  const GridCriterion gc(criterion, sorted, config.quad);
  std::vector<double> m0 = start.empty() ? std::vector<double>(sorted.size(), n / sorted.size())
                                         : place_on_grid(sorted, start);
  const auto r = inner_solve(gc, n, budget, m0, config);
  return to_measure(sorted, r.masses, n);
}

// ---------------------------------------------------------------------------

OptimalityCertificate certify(const Criterion& criterion, const DesignMeasure& mu,
                              double cert_tol, std::span<const double> grid,
                              const OptimizerConfig& config, double volume_budget) {
  require(!mu.empty(), "cannot certify an empty measure");
  require(cert_tol > 0.0, "cert_tol must be positive");
  const auto e = evaluate(criterion, mu, config.quad);
  const double n = total_mass(mu);

  std::vector<Atom> support;
  for (const auto& a : mu.atoms()) {
    if (a.m >= 1e-6 * n) support.push_back({a.x, e.gradient(a.x)});  // m holds g(x)
  }
  std::vector<double> gg(grid.size());
  OptimalityCertificate c;
  double scale = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    gg[j] = e.gradient(grid[j]);
    scale = std::max(scale, std::abs(gg[j]));
  }
  for (const auto& s : support) scale = std::max(scale, std::abs(s.m));
  if (!(scale > 0.0)) scale = 1.0;
  c.gradient_scale = scale;

  c.volume_active = total_volume(mu) >= volume_budget * (1.0 - config.slack_tol);
  if (!c.volume_active) {
    c.u2 = 0.0;
    c.u1 = -std::numeric_limits<double>::infinity();
    for (const auto& s : support) c.u1 = std::max(c.u1, s.m);
  } else if (support.size() >= 2) {
    double k = 0, sx = 0, sxx = 0, sg = 0, sxg = 0;
    for (const auto& s : support) {
      k += 1;
      sx += s.x;
      sxx += s.x * s.x;
      sg += s.m;
      sxg += s.x * s.m;
    }
    const double det = k * sxx - sx * sx;
    c.u2 = (k * sxg - sx * sg) / det;
    c.u1 = (sg - c.u2 * sx) / k;
  } else {
    const double xs = support.front().x;
    const double h = 1e-7 * xs;
    const double slope = xs + h <= 1.0
                             ? (e.gradient(xs + h) - e.gradient(xs - h)) / (2.0 * h)
                             : (e.gradient(xs) - e.gradient(xs - h)) / h;
    c.u2 = slope;
    c.u1 = support.front().m - slope * xs;
  }

  double worst_x = 0.0;
  c.max_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double v = (gg[j] - c.u1 - c.u2 * grid[j]) / scale;
    if (v > c.max_violation) {
      c.max_violation = v;
      worst_x = grid[j];
    }
  }
  for (const auto& s : support) {
    const double v = (s.m - c.u1 - c.u2 * s.x) / scale;
    c.support_residual = std::max(c.support_residual, std::abs(v));
    if (v > c.max_violation) {
      c.max_violation = v;
      worst_x = s.x;
    }
  }

  std::ostringstream diag;
  bool ok = true;
  if (c.volume_active && c.u2 < -cert_tol * scale) {
    ok = false;
    diag << "negative volume multiplier u2 = " << c.u2 << "; ";
  }
  if (c.max_violation > cert_tol) {
    ok = false;
    diag << "gradient exceeds the dominating line by " << c.max_violation << " (relative) at x = "
         << worst_x << "; ";
  }
  if (c.support_residual > cert_tol) {
    ok = false;
    diag << "support residual " << c.support_residual << " (relative); ";
  }
  c.passed = ok;
  c.diagnostic = ok ? "ok" : diag.str();
  if (!ok) c.diagnostic.resize(c.diagnostic.size() - 2);
  return c;
}

// ---------------------------------------------------------------------------

namespace {

// Merge runs of atoms whose neighbours are within `ratio^1.5` of each other.
DesignMeasure collapse(const DesignMeasure& mu, double ratio) {
  const double limit = std::pow(ratio, 1.5);
  std::vector<Atom> out;
  for (const auto& a : mu.atoms()) {
    if (!out.empty() && a.x <= out.back().x * limit) {
      auto& b = out.back();
      const double m = b.m + a.m;
      b.x = (b.x * b.m + a.x * a.m) / m;
      b.m = m;
    } else {
      out.push_back(a);
    }
  }
  return DesignMeasure(out);
}

}  // namespace

DesignMeasure refine(const Criterion& criterion, double n, const DesignMeasure& coarse,
                     int rounds, const OptimizerConfig& config) {
  config.validate();
  DesignMeasure best = normalize(coarse);
  if (best.empty()) return best;
  double best_value = evaluate(criterion, best, config.quad).value;
  // Atoms closer than neighbouring coarse grid points form one cluster.
  const double coarse_ratio = std::pow(1.0 / config.x_min, 1.0 / (config.grid_points - 1));
  double ratio = coarse_ratio;

  for (int round = 0; round < rounds; ++round) {
    const DesignMeasure collapsed = collapse(best, coarse_ratio);
    const double fine = std::pow(ratio, 0.1);
    std::vector<double> local;
    for (const auto& a : collapsed.atoms()) {
      local.push_back(a.x);
      for (int k = -20; k <= 20; ++k) {
        const double x = a.x * std::pow(fine, k);
        if (x >= config.x_min && x <= 1.0) local.push_back(x);
      }
    }
    if (1.0 / n >= config.x_min && 1.0 / n <= 1.0) local.push_back(1.0 / n);
    std::sort(local.begin(), local.end());
    local.erase(std::unique(local.begin(), local.end(),
                            [](double a, double b) { return b - a <= 1e-13 * b; }),
                local.end());
    ratio = fine;

    const double lo = n * local.front(), hi = std::min(1.0, n * local.back());
    if (lo > hi) continue;
    const GridCriterion gc(criterion, local, config.quad);
    std::vector<double> budgets;
    const int points = 11;
    for (int i = 0; i < points; ++i) budgets.push_back(lo + (hi - lo) * i / (points - 1));
    budgets.push_back(std::clamp(total_volume(collapsed), lo, hi));
    const auto start = place_on_grid(local, collapsed);
    const auto search = search_budgets(gc, n, budgets, start, config);
    const DesignMeasure candidate = to_measure(local, search.best.masses, n);
    const double value = evaluate(criterion, candidate, config.quad).value;
    if (value >= best_value) {
      best = candidate;
      best_value = value;
    }
  }

  const DesignMeasure merged = collapse(best, coarse_ratio);
  if (merged.size() < best.size()) {
    const double value = evaluate(criterion, merged, config.quad).value;
    if (value >= best_value - 1e-12 * std::abs(best_value)) best = merged;
  }
  return best;
}

OptimizeResult optimize(const Criterion& criterion, double n, const OptimizerConfig& config) {
  config.validate();
  require(n > 0.0 && std::isfinite(n), "total mass must be positive");
  if (n * config.x_min > 1.0) {
    std::ostringstream os;
    os << "infeasible: n * x_min = " << n * config.x_min << " exceeds the unit volume";
    fail(ErrorCode::kInfeasible, os.str());
  }
  const auto grid = make_grid(config, n);
  const GridCriterion gc(criterion, grid, config.quad);

  std::vector<double> budgets = config.budget_scan;
  if (budgets.empty()) {
    const double lo = n * config.x_min;
    const int k = config.budget_scan_points;
    for (int i = 0; i < k; ++i) budgets.push_back(k == 1 ? 1.0 : lo + (1.0 - lo) * i / (k - 1));
  }
  const std::vector<double> uniform(grid.size(), n / static_cast<double>(grid.size()));
  auto search = search_budgets(gc, n, budgets, uniform, config);

  OptimizeResult out;
  out.trace = std::move(search.trace);
  out.budget = search.budget;
  out.coarse = to_measure(grid, search.best.masses, n);
  out.coarse_objective = evaluate(criterion, out.coarse, config.quad).value;
  out.measure = config.refine_rounds > 0 ? refine(criterion, n, out.coarse, config.refine_rounds, config)
                                         : out.coarse;
  out.objective = evaluate(criterion, out.measure, config.quad).value;
  out.certificate = certify(criterion, out.measure, config.cert_tol, grid, config);
  return out;
}

}  // namespace dilution
