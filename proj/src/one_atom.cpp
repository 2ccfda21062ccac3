#include "dilution/one_atom.hpp"

#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <functional>
#include <memory>
#include <limits>
#include <sstream>

#include "dilution/errors.hpp"

namespace dilution {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// -(E_Q e^{lambda x} - 1) / (n x^2): minus the expected inverse information.
double g4_one_atom(const Prior& prior, double n, double x) {
  if (const auto* u = prior.get_if<UniformPrior>()) {
    const double w = u->upper - u->lower;
    const double num = std::exp(u->upper * x) - std::exp(u->lower * x) - x * w;
    return -num / (n * x * x * x * w);
  }
  const auto* g = prior.get_if<GammaPrior>();
  if (x >= g->rate) return kNegInf;
  return -std::expm1(-g->shape * std::log1p(-x / g->rate)) / (n * x * x);
}

double search_upper(const Criterion& criterion) {
  double hi = 0.999;
  const auto* g = criterion.prior().get_if<GammaPrior>();
  if (g && (criterion.kind() == CriterionKind::G4 || criterion.kind() == CriterionKind::G4Cost)) {
    hi = std::min(hi, g->rate * (1.0 - 1e-9));
  }
  return hi;
}

}  // namespace

namespace {

// Objective x -> G(n delta_x), with prior rules built once.
std::function<double(double)> objective(const Criterion& criterion, double n,
                                        const QuadratureConfig& quad) {
  require(n > 0.0, "n must be positive");
  const Prior prior = criterion.prior();
  switch (criterion.kind()) {
    case CriterionKind::G3: {
      auto rule = std::make_shared<const Rule>(discretize(prior, quad));
      return [rule, n](double x) {
        double s = 0.0;
        for (std::size_t k = 0; k < rule->size(); ++k) {
          s += rule->weights[k] * log_fisher_kernel(x, rule->nodes[k]);
        }
        return std::log(n) + s;
      };
    }
    case CriterionKind::G4:
      return [prior, n](double x) { return g4_one_atom(prior, n, x); };
    case CriterionKind::G4Cost: {
      auto rule = std::make_shared<const Rule>(discretize(prior, quad));
      const CostWeights c = *criterion.costs();
      return [prior, rule, c, n](double x) {
        const double base = g4_one_atom(prior, n, x);
        if (!std::isfinite(base)) return base;
        const double dead = n * laplace_transform(prior, x);
        const double none = laplace_transform(prior, n * x);
        const double all = rule->apply([n, x](double l) { return std::exp(n * log1mexp(l * x)); });
        return base - c.c1 * dead - c.c2 * (none + all);
      };
    }
    default:
      return [criterion, n, quad](double x) {
        return evaluate(criterion, DesignMeasure::single(x, n), quad).value;
      };
  }
}

}  // namespace

double one_atom_objective(const Criterion& criterion, double n, double x,
                          const QuadratureConfig& quad) {
  require(x > 0.0 && x <= 1.0, "dose must lie in (0,1]");
  return objective(criterion, n, quad)(x);
}

OneAtomSolution solve_one_atom(const Criterion& criterion, double n, const QuadratureConfig& quad) {
  require(n >= 1.0 && std::isfinite(n), "n must be at least 1");
  const double lo = 1e-6, hi = search_upper(criterion);
  const auto f = objective(criterion, n, quad);

  const int scan = 200;
  std::vector<double> xs(scan), fs(scan);
  int best = 0;
  for (int i = 0; i < scan; ++i) {
    xs[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (scan - 1));
    fs[i] = f(xs[i]);
    if (fs[i] > fs[best]) best = i;
  }
  const auto [fmin, fmax] = std::minmax_element(fs.begin(), fs.end());
  OneAtomSolution out;
  out.flat = std::isfinite(*fmin) && *fmax - *fmin <= 1e-12 * std::max(1.0, std::abs(*fmax));

  const double a = xs[std::max(best - 1, 0)], b = xs[std::min(best + 1, scan - 1)];
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::brent_find_minima([&](double x) { return -f(x); }, a, b,
                                                       std::numeric_limits<double>::digits / 2, iters);
  out.x_unconstrained = -r.second >= fs[best] ? r.first : xs[best];

  const double cap = 1.0 / n;
  out.at_boundary = out.x_unconstrained >= cap;
  out.x_star = std::min(out.x_unconstrained, cap);
  out.objective = f(out.x_star);
  return out;
}

// ---------------------------------------------------------------------------

std::string to_string(ThresholdFamily family) {
  switch (family) {
    case ThresholdFamily::G1: return "G1";
    case ThresholdFamily::G1Cost: return "G1_cost";
    case ThresholdFamily::G2Uniform: return "G2_uniform";
    case ThresholdFamily::G2Gamma: return "G2_gamma";
    case ThresholdFamily::G3Uniform: return "G3_uniform";
    case ThresholdFamily::G3Gamma: return "G3_gamma";
    case ThresholdFamily::G4Uniform: return "G4_uniform";
    case ThresholdFamily::G4Gamma: return "G4_gamma";
    case ThresholdFamily::G4CostGamma: return "G4_cost_gamma";
  }
  return "?";
}

ThresholdFamily threshold_family_from_string(const std::string& name) {
  for (auto f : {ThresholdFamily::G1, ThresholdFamily::G1Cost, ThresholdFamily::G2Uniform,
                 ThresholdFamily::G2Gamma, ThresholdFamily::G3Uniform, ThresholdFamily::G3Gamma,
                 ThresholdFamily::G4Uniform, ThresholdFamily::G4Gamma, ThresholdFamily::G4CostGamma}) {
    if (to_string(f) == name) return f;
  }
  fail(ErrorCode::kInvalidArgument, "unknown criterion family '" + name + "'");
}

Criterion family_criterion(ThresholdFamily family, double p, const FamilyOptions& o) {
  switch (family) {
    case ThresholdFamily::G1: return Criterion::g1(p);
    case ThresholdFamily::G1Cost: return Criterion::make(CriterionKind::G1Cost, Prior::point(p), o.costs);
    case ThresholdFamily::G2Uniform: return Criterion::make(CriterionKind::G2, Prior::uniform(p));
    case ThresholdFamily::G2Gamma: return Criterion::make(CriterionKind::G2, Prior::gamma(p, o.rate));
    case ThresholdFamily::G3Uniform: return Criterion::make(CriterionKind::G3, Prior::uniform(p));
    case ThresholdFamily::G3Gamma: return Criterion::make(CriterionKind::G3, Prior::gamma(p, o.rate));
    case ThresholdFamily::G4Uniform: return Criterion::make(CriterionKind::G4, Prior::uniform(p));
    case ThresholdFamily::G4Gamma: return Criterion::make(CriterionKind::G4, Prior::gamma(p, o.rate));
    case ThresholdFamily::G4CostGamma:
      return Criterion::make(CriterionKind::G4Cost, Prior::gamma(p, o.rate), o.costs);
  }
  fail(ErrorCode::kInvalidArgument, "unknown criterion family");
}

std::pair<double, double> family_range(ThresholdFamily family) {
  switch (family) {
    case ThresholdFamily::G1:
    case ThresholdFamily::G1Cost: return {1.0, 1e4};
    case ThresholdFamily::G2Uniform:
    case ThresholdFamily::G3Uniform:
    case ThresholdFamily::G4Uniform: return {1.0 + 1e-3, 1e4};
    default: return {2.0 + 1e-3, 1e4};
  }
}

double threshold(ThresholdFamily family, double n, const FamilyOptions& options) {
  require(n >= 1.0, "n must be at least 1");
  require(options.tol > 0.0, "tolerance must be positive");
  const double target = 1.0 / n;
  auto excess = [&](double p) {
    return solve_one_atom(family_criterion(family, p, options), n, options.quad).x_unconstrained -
           target;
  };
  auto [lo, hi] = family_range(family);
  const double s_lo = excess(lo), s_hi = excess(hi);
  if (!(s_lo >= 0.0 && s_hi < 0.0)) {
    std::ostringstream os;
    os << to_string(family) << ": x_unconstrained - 1/n does not change sign on [" << lo << ", "
       << hi << "] (" << s_lo << ", " << s_hi << ")";
    fail(ErrorCode::kBracketFailure, os.str());
  }
  // geometric midpoints while the bracket spans decades
  while (hi - lo > options.tol) {
    const double mid = hi / lo > 4.0 ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    (excess(mid) >= 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<SweepRow> sweep(ThresholdFamily family, double n, std::span<const double> parameters,
                            const FamilyOptions& options) {
  std::vector<SweepRow> rows;
  rows.reserve(parameters.size());
  for (double p : parameters) {
    const auto s = solve_one_atom(family_criterion(family, p, options), n, options.quad);
    rows.push_back({p, s.x_star, s.x_unconstrained, s.objective});
  }
  return rows;
}

CrossCheckReport cross_check(const Criterion& criterion, double n, const OptimizerConfig& config) {
  CrossCheckReport r;
  r.one_atom = solve_one_atom(criterion, n, config.quad);
  r.full = optimize(criterion, n, config);
  r.objective_gap = r.full.objective - r.one_atom.objective;
  r.x_difference = r.full.measure.size() == 1
                       ? std::abs(r.full.measure.atoms()[0].x - r.one_atom.x_star)
                       : std::numeric_limits<double>::quiet_NaN();
  r.agree = r.full.measure.size() == 1 &&
            std::abs(r.objective_gap) <= 1e-6 * std::abs(r.one_atom.objective);
  return r;
}

}  // namespace dilution
