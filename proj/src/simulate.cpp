#include "dilution/simulate.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "dilution/criteria.hpp"
#include "dilution/errors.hpp"

namespace dilution {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void draw(std::span<const double> doses, double lambda, std::mt19937_64& rng,
          std::vector<char>& sterile) {
  sterile.resize(doses.size());
  for (std::size_t i = 0; i < doses.size(); ++i) {
    sterile[i] = uniform01(rng) < std::exp(-lambda * doses[i]) ? 1 : 0;
  }
}

void check_inputs(std::span<const double> doses, std::span<const char> sterile) {
  require(!doses.empty(), "at least one dose is required");
  require(doses.size() == sterile.size(), "doses and indicators differ in length");
  for (double x : doses) require(x > 0.0 && x <= 1.0, "doses must lie in (0,1]");
}

}  // namespace

std::string to_string(MleStatus status) {
  switch (status) {
    case MleStatus::Interior: return "interior";
    case MleStatus::AllSterile: return "all_sterile";
    case MleStatus::NoneSterile: return "none_sterile";
  }
  return "?";
}

std::vector<double> expand_doses(const DesignMeasure& design) {
  std::vector<double> doses;
  for (const auto& a : design.atoms()) {
    const double k = std::round(a.m);
    if (std::abs(a.m - k) > 1e-9) {
      std::ostringstream os;
      os << "mass " << a.m << " at x = " << a.x << " is not an integer; round the design first";
      fail(ErrorCode::kNonIntegralDesign, os.str());
    }
    doses.insert(doses.end(), static_cast<std::size_t>(k), a.x);
  }
  require(!doses.empty(), "design has no mice");
  return doses;
}

ExperimentOutcome simulate_experiment(const DesignMeasure& design, double lambda_true,
                                      std::uint64_t seed) {
  require(lambda_true >= 0.0 && std::isfinite(lambda_true), "lambda must be finite and >= 0");
  ExperimentOutcome out;
  out.doses = expand_doses(design);
  std::mt19937_64 rng(splitmix64(seed));
  draw(out.doses, lambda_true, rng, out.sterile);
  out.estimate = mle(out.doses, out.sterile);
  return out;
}

double log_likelihood(std::span<const double> doses, std::span<const char> sterile, double lambda) {
  check_inputs(doses, sterile);
  require(lambda > 0.0, "lambda must be positive");
  double l = 0.0;
  for (std::size_t i = 0; i < doses.size(); ++i) {
    l += sterile[i] ? -lambda * doses[i] : log1mexp(lambda * doses[i]);
  }
  return l;
}

double score(std::span<const double> doses, std::span<const char> sterile, double lambda) {
  check_inputs(doses, sterile);
  require(lambda > 0.0, "lambda must be positive");
  double s = 0.0;
  for (std::size_t i = 0; i < doses.size(); ++i) {
    s += sterile[i] ? -doses[i] : doses[i] / std::expm1(lambda * doses[i]);
  }
  return s;
}

MleResult mle(std::span<const double> doses, std::span<const char> sterile) {
  check_inputs(doses, sterile);
  std::size_t k = 0;
  double sum_x = 0.0;
  for (std::size_t i = 0; i < doses.size(); ++i) {
    k += sterile[i] ? 1 : 0;
    sum_x += doses[i];
  }
  MleResult out;
  if (k == doses.size()) {
    out.status = MleStatus::AllSterile;
    out.lambda_hat = 0.0;
    return out;
  }
  if (k == 0) {
    out.status = MleStatus::NoneSterile;
    out.lambda_hat = std::numeric_limits<double>::infinity();
    return out;
  }

  auto s_and_ds = [&](double l, double& ds) {
    double s = 0.0;
    ds = 0.0;
    for (std::size_t i = 0; i < doses.size(); ++i) {
      const double x = doses[i];
      if (sterile[i]) {
        s -= x;
      } else {
        const double e = std::expm1(l * x);
        s += x / e;
        ds -= x * x / (e * -std::expm1(-l * x));
      }
    }
    return s;
  };

  // equal-dose closed form as the starting point; the score decreases in lambda
  const double p_hat = static_cast<double>(k) / static_cast<double>(doses.size());
  double l = -std::log(p_hat) / (sum_x / static_cast<double>(doses.size()));
  double ds = 0.0;
  double lo = 0.0, hi = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= 200; ++it) {
    const double s = s_and_ds(l, ds);
    out.iterations = it;
    if (s == 0.0) break;
    (s > 0.0 ? lo : hi) = l;
    double next = l - s / ds;
    if (!(next > lo && next < hi)) next = std::isfinite(hi) ? (lo > 0.0 ? 0.5 * (lo + hi) : 0.5 * hi) : 2.0 * l;
    if (std::abs(next - l) <= 1e-15 * l) {
      l = next;
      break;
    }
    l = next;
    if (it == 200) fail(ErrorCode::kBracketFailure, "score root not bracketed after 200 steps");
  }
  out.status = MleStatus::Interior;
  out.lambda_hat = l;
  return out;
}

VarianceReport variance_study(const DesignMeasure& design, double lambda_true,
                              std::size_t replicates, std::uint64_t seed, bool keep_estimates) {
  require(replicates >= 1000, "at least 1000 replicates are required");
  require(lambda_true > 0.0 && std::isfinite(lambda_true), "lambda must be positive");
  const auto doses = expand_doses(design);
  VarianceReport r;
  r.replicates = replicates;
  r.seed = seed;
  r.lambda_true = lambda_true;
  r.fisher_info = fisher_information(design, lambda_true);
  if (keep_estimates) r.estimates.reserve(replicates);

  std::vector<char> sterile;
  double mean = 0.0, m2 = 0.0;
  std::size_t boundary = 0;
  for (std::size_t i = 0; i < replicates; ++i) {
    std::mt19937_64 rng(splitmix64(seed ^ splitmix64(i + 1)));
    draw(doses, lambda_true, rng, sterile);
    const auto e = mle(doses, sterile);
    if (keep_estimates) r.estimates.push_back(e.lambda_hat);
    if (e.status != MleStatus::Interior) {
      ++boundary;
      continue;
    }
    // Welford
    ++r.interior;
    const double d = e.lambda_hat - mean;
    mean += d / static_cast<double>(r.interior);
    m2 += d * (e.lambda_hat - mean);
  }
  r.mean = mean;
  r.empirical_var = r.interior > 1 ? m2 / static_cast<double>(r.interior - 1)
                                   : std::numeric_limits<double>::quiet_NaN();
  r.product = r.empirical_var * r.fisher_info;
  r.boundary_freq = static_cast<double>(boundary) / static_cast<double>(replicates);
  r.reliable = r.boundary_freq <= 0.5;
  return r;
}

}  // namespace dilution
