#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dilution/criteria.hpp"
#include "dilution/optimizer.hpp"

namespace dilution {

struct OneAtomSolution {
  /// min(x_unconstrained, 1/n).
  double x_star = 0.0;
  /// Maximizer of the objective of n*delta_x over the whole search range.
  double x_unconstrained = 0.0;
  bool at_boundary = false;
  /// Objective at x_star.
  double objective = 0.0;
  /// Objective varies by less than 1e-12 (relative) across the search range.
  bool flat = false;
};

/// Objective of the one-atom design n*delta_x. Closed forms for G4 under
/// Uniform and Gamma priors; -inf where the expectation diverges.
double one_atom_objective(const Criterion& criterion, double n, double x,
                          const QuadratureConfig& quad = {});

OneAtomSolution solve_one_atom(const Criterion& criterion, double n,
                               const QuadratureConfig& quad = {});

/// Criterion families indexed by one scalar parameter: lambda for G1 and
/// G1_cost, u for the Uniform families, alpha for the Gamma families.
enum class ThresholdFamily {
  G1,
  G1Cost,
  G2Uniform,
  G2Gamma,
  G3Uniform,
  G3Gamma,
  G4Uniform,
  G4Gamma,
  G4CostGamma,
};

std::string to_string(ThresholdFamily family);
ThresholdFamily threshold_family_from_string(const std::string& name);

struct FamilyOptions {
  /// Gamma rate.
  double rate = 1.0;
  /// Cost weights for the cost families; defaults when empty.
  std::optional<CostWeights> costs;
  QuadratureConfig quad;
  /// Bisection tolerance in the parameter.
  double tol = 1e-4;
};

Criterion family_criterion(ThresholdFamily family, double parameter,
                           const FamilyOptions& options = {});

/// Default bisection range of the family parameter.
std::pair<double, double> family_range(ThresholdFamily family);

/// Parameter where x_unconstrained crosses 1/n, by bisection. Throws
/// kBracketFailure when there is no crossing in the family range.
double threshold(ThresholdFamily family, double n, const FamilyOptions& options = {});

struct SweepRow {
  double parameter;
  double x_star;
  double x_unconstrained;
  double objective;
};

std::vector<SweepRow> sweep(ThresholdFamily family, double n, std::span<const double> parameters,
                            const FamilyOptions& options = {});

struct CrossCheckReport {
  OneAtomSolution one_atom;
  OptimizeResult full;
  /// full objective minus one-atom objective.
  double objective_gap = 0.0;
  /// |x_star - x| when the full optimum has a single atom, else NaN.
  double x_difference = 0.0;
  /// Full optimum is one atom and the gap is within 1e-6 relative.
  bool agree = false;
};

CrossCheckReport cross_check(const Criterion& criterion, double n,
                             const OptimizerConfig& config = {});

}  // namespace dilution
