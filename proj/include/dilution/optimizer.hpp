#pragma once

#include <span>
#include <string>
#include <vector>

#include "dilution/criteria.hpp"
#include "dilution/measure.hpp"

namespace dilution {

struct ArmijoRule {
  double initial_step = 1.0;
  double shrink = 0.5;
  double sufficient_decrease = 1e-4;
};

struct OptimizerConfig {
  int grid_points = 2000;
  double x_min = 1e-4;
  /// Explicit volume budgets to scan. Empty: budget_scan_points equally
  /// spaced values from n*x_min to 1.
  std::vector<double> budget_scan;
  int budget_scan_points = 50;
  ArmijoRule step;
  int max_iters = 2000;
  /// Stationarity threshold: sup-norm of the projected-gradient step, in
  /// units of the total mass, with the gradient scaled by its range.
  double grad_tol = 1e-8;
  int refine_rounds = 2;
  /// Certificate tolerance relative to max |g| on the grid.
  double cert_tol = 1e-6;
  /// Relative slack below the volume budget that still counts as active.
  double slack_tol = 1e-6;
  QuadratureConfig quad;

  void validate() const;
};

struct OptimalityCertificate {
  double u1 = 0.0;
  double u2 = 0.0;
  bool volume_active = false;
  /// sup over the grid of g(x) - u1 - u2 x, relative to gradient_scale.
  double max_violation = 0.0;
  /// max over support atoms of |g(x_j) - u1 - u2 x_j|, relative to gradient_scale.
  double support_residual = 0.0;
  /// max |g| over the grid and the support.
  double gradient_scale = 0.0;
  bool passed = false;
  std::string diagnostic;
};

struct TraceRow {
  double budget;
  double objective;
  int iterations;
  /// Inner solve reached the stationarity threshold.
  bool certified;
};

struct InnerResult {
  std::vector<double> masses;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Final stationarity measure.
  double stationarity = 0.0;
};

struct OptimizeResult {
  DesignMeasure measure;
  OptimalityCertificate certificate;
  std::vector<TraceRow> trace;
  /// Budget with the best inner objective over the scan.
  double budget = 0.0;
  double objective = 0.0;
  /// Grid solution before refinement.
  DesignMeasure coarse;
  double coarse_objective = 0.0;
};

/// Log-spaced points on [x_min, 1] with 1/n inserted.
std::vector<double> make_grid(const OptimizerConfig& config, double n);

/// Euclidean projection of v onto {m >= 0, sum m = n, sum x m = b}; x sorted
/// ascending. Throws kInfeasible when the slice is empty.
std::vector<double> project_to_slice(std::span<const double> v, std::span<const double> x,
                                     double n, double b);

/// Projected-gradient ascent on the grid for a fixed volume budget b.
InnerResult inner_solve(const GridCriterion& criterion, double n, double budget,
                        std::span<const double> start, const OptimizerConfig& config = {});

/// Sparse-measure form of inner_solve; `start` is placed on the nearest grid points.
DesignMeasure inner_solve(const Criterion& criterion, double n, double budget,
                          const std::vector<double>& grid, const DesignMeasure& start,
                          const OptimizerConfig& config = {});

/// Fits the Kuhn-Tucker pair (u1, u2) and checks g <= u1 + u2 x on the grid.
OptimalityCertificate certify(const Criterion& criterion, const DesignMeasure& mu,
                              double cert_tol, std::span<const double> grid,
                              const OptimizerConfig& config = {}, double volume_budget = 1.0);

/// Collapses neighbouring atoms and re-optimizes on finer local grids.
/// The objective never decreases.
DesignMeasure refine(const Criterion& criterion, double n, const DesignMeasure& coarse,
                     int rounds, const OptimizerConfig& config = {});

/// Maximizes the criterion over measures with total mass n and volume <= 1.
OptimizeResult optimize(const Criterion& criterion, double n, const OptimizerConfig& config = {});

}  // namespace dilution
