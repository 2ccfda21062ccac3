#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dilution/measure.hpp"

namespace dilution {

/// Name of the generator behind all simulations.
inline constexpr const char* kRngName = "mt19937_64/splitmix64";

enum class MleStatus { Interior, AllSterile, NoneSterile };

std::string to_string(MleStatus status);

struct MleResult {
  MleStatus status = MleStatus::Interior;
  /// 0 for AllSterile, +inf for NoneSterile.
  double lambda_hat = 0.0;
  int iterations = 0;
};

struct ExperimentOutcome {
  std::vector<double> doses;
  /// 1 when mouse i did not repopulate (its dose was sterile).
  std::vector<char> sterile;
  MleResult estimate;
};

/// One dose per mouse. Throws kNonIntegralDesign unless every mass is an
/// integer within 1e-9.
std::vector<double> expand_doses(const DesignMeasure& design);

/// Independent Bernoulli(e^{-lambda x_i}) sterility indicators; deterministic
/// in the seed.
ExperimentOutcome simulate_experiment(const DesignMeasure& design, double lambda_true,
                                      std::uint64_t seed);

double log_likelihood(std::span<const double> doses, std::span<const char> sterile, double lambda);
/// Derivative of the log-likelihood in lambda.
double score(std::span<const double> doses, std::span<const char> sterile, double lambda);

/// Maximum-likelihood estimate of lambda: safeguarded Newton on the score.
MleResult mle(std::span<const double> doses, std::span<const char> sterile);

struct VarianceReport {
  /// Sample variance of the interior estimates.
  double empirical_var = 0.0;
  double mean = 0.0;
  double fisher_info = 0.0;
  double product = 0.0;
  double boundary_freq = 0.0;
  std::size_t replicates = 0;
  std::size_t interior = 0;
  std::uint64_t seed = 0;
  double lambda_true = 0.0;
  /// False when more than half of the replicates hit a boundary.
  bool reliable = true;
  std::string rng = kRngName;
  /// Per-replicate estimates (0 or +inf on the boundary), when requested.
  std::vector<double> estimates;
};

VarianceReport variance_study(const DesignMeasure& design, double lambda_true,
                              std::size_t replicates, std::uint64_t seed,
                              bool keep_estimates = false);

}  // namespace dilution
