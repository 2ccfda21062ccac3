#pragma once

// Shared evaluation core for the closure-based evaluate() and the dense
// GridCriterion. Both reduce a measure to per-node aggregates at the prior
// rule nodes and read value and gradient coefficients from them here.

#include <span>
#include <vector>

#include "dilution/criteria.hpp"

namespace dilution::detail {

struct GradientCoefficients {
  /// log of the multiplier of fisher_kernel(x, lambda_k).
  std::vector<double> log_fisher;
  /// multiplier of log1mexp(lambda_k x).
  std::vector<double> all_repopulate;
  /// multiplier of x.
  double volume = 0.0;
};

class CriterionModel {
 public:
  CriterionModel(const Criterion& criterion, const QuadratureConfig& quad);

  const Rule& rule() const { return rule_; }
  /// Kinds that need I(mu; lambda_k) at every node.
  bool uses_information() const { return info_power_ > 0; }
  bool uses_costs() const { return costs_.has_value(); }

  /// Part of the gradient that does not depend on the measure.
  double linear_gradient(double x) const;

  /// log_info[k] = log I(mu; lambda_k); log_repop[k] = int log(1-e^{-lambda_k x}) mu(dx).
  double value(double linear, std::span<const double> log_info,
               std::span<const double> log_repop, double volume) const;

  GradientCoefficients coefficients(std::span<const double> log_info,
                                    std::span<const double> log_repop, double volume) const;

 private:
  double base_linear(double x) const;

  Criterion criterion_;
  QuadratureConfig quad_;
  Rule rule_;
  int info_power_ = 0;  // 1 for log-information, 2 for inverse information
  std::optional<CostWeights> costs_;
  // G2 under a Gamma prior with shape > 2: shifted-shape Laguerre rule.
  const Rule* shifted_rule_ = nullptr;
};

}  // namespace dilution::detail
