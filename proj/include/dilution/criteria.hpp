#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dilution/measure.hpp"
#include "dilution/priors.hpp"
#include "dilution/quadrature.hpp"

namespace dilution {

// ---------------------------------------------------------------------------
// Kernels

/// r(y) = y^2 / (e^y - 1), continuous at 0 with r(0) = 0.
double r_kernel(double y);

/// log r(y) for y > 0, finite for tiny and huge y.
double log_r_kernel(double y);

/// Maximiser of r on (0, inf), about 1.59362. Computed once.
double r_kernel_argmax();

/// Fisher information of a single dose x under rate lambda:
/// x^2 e^{-lambda x} / (1 - e^{-lambda x}) = lambda^{-2} r(lambda x).
double fisher_kernel(double x, double lambda);

/// log of fisher_kernel, finite for lambda x beyond the overflow range.
double log_fisher_kernel(double x, double lambda);

/// log(1 - e^{-y}) for y > 0.
double log1mexp(double y);

// ---------------------------------------------------------------------------
// Criteria

enum class CriterionKind { G1, G2, G3, G4, G1Cost, G4Cost, G1Mixture };

std::string to_string(CriterionKind kind);
CriterionKind criterion_kind_from_string(const std::string& name);

struct CostWeights {
  double c1;
  double c2;

  friend bool operator==(const CostWeights&, const CostWeights&) = default;
};

/// Default experimenter costs for the cost-augmented kinds.
CostWeights default_costs(CriterionKind kind);

/// Goal functional of a design measure. Validated on construction.
class Criterion {
 public:
  /// `costs` is required to be empty for plain kinds; cost kinds fall back to
  /// default_costs() when it is empty.
  static Criterion make(CriterionKind kind, Prior prior,
                        std::optional<CostWeights> costs = std::nullopt);

  static Criterion g1(double lambda) { return make(CriterionKind::G1, Prior::point(lambda)); }
  static Criterion mixture(double lambda1, double lambda2, double p) {
    return make(CriterionKind::G1Mixture, Prior::two_point(lambda1, lambda2, p));
  }

  CriterionKind kind() const { return kind_; }
  const Prior& prior() const { return prior_; }
  const std::optional<CostWeights>& costs() const { return costs_; }

  /// Linear functionals have a gradient independent of the measure.
  bool is_linear() const;
  bool has_costs() const { return costs_.has_value(); }

  friend bool operator==(const Criterion&, const Criterion&) = default;

 private:
  Criterion(CriterionKind kind, Prior prior, std::optional<CostWeights> costs)
      : kind_(kind), prior_(prior), costs_(costs) {}

  CriterionKind kind_;
  Prior prior_;
  std::optional<CostWeights> costs_;
};

struct EvalResult {
  double value;
  /// Gradient function x -> g(x; mu) on (0,1].
  std::function<double(double)> gradient;
};

/// Value of the goal functional at `mu` together with its gradient function.
/// Throws kDegenerateInformation for G3/G4 kinds on an empty measure and
/// kDivergence when a Gamma-prior expectation does not exist.
EvalResult evaluate(const Criterion& criterion, const DesignMeasure& mu,
                    const QuadratureConfig& quad = {});

/// I(mu; lambda) = sum_j m_j lambda^{-2} r(lambda x_j).
double fisher_information(const DesignMeasure& mu, double lambda);

/// Expected number of non-repopulated mice, E_Q sum_j m_j e^{-lambda x_j}.
double expected_dead_mice(const DesignMeasure& mu, const Prior& prior);

/// Expected probability that every mouse repopulates or none does.
double spoilt_probability(const DesignMeasure& mu, const Prior& prior,
                          const QuadratureConfig& quad = {});

// ---------------------------------------------------------------------------

namespace detail {
class CriterionModel;
}

/// Dense evaluation on a fixed support grid, with kernel tables built once.
/// Masses are a vector aligned with grid(). Thread-safe for concurrent reads.
class GridCriterion {
 public:
  GridCriterion(const Criterion& criterion, std::vector<double> grid,
                const QuadratureConfig& quad = {});
  ~GridCriterion();
  GridCriterion(GridCriterion&&) noexcept;
  GridCriterion& operator=(GridCriterion&&) noexcept;

  const Criterion& criterion() const { return criterion_; }
  std::span<const double> grid() const { return grid_; }

  double value(std::span<const double> masses) const;
  /// Returns the value and writes the gradient at every grid point. A
  /// degenerate measure yields -inf.
  double value_and_gradient(std::span<const double> masses, std::span<double> gradient) const;

 private:
  struct Tables;
  Criterion criterion_;
  std::vector<double> grid_;
  std::unique_ptr<detail::CriterionModel> model_;
  std::unique_ptr<Tables> tables_;
};

}  // namespace dilution
