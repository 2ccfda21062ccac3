#include "dilution/priors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dilution/errors.hpp"

namespace dilution {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double gamma_log_density(const GammaPrior& g, double lambda) {
  return g.shape * std::log(g.rate) + (g.shape - 1.0) * std::log(lambda) - g.rate * lambda -
         std::lgamma(g.shape);
}

bool within(double err, double value, double tol) {
  return err <= tol * std::max(1.0, std::abs(value));
}

double expect_uniform(const UniformPrior& u, const std::function<double(double)>& f,
                      const QuadratureConfig& quad) {
  const double width = u.upper - u.lower;
  double err = 0.0;
  QuadratureConfig inner = quad;
  inner.tol = quad.tol * 0.1;
  const double raw = integrate_adaptive(f, u.lower, u.upper, inner, &err);
  const double value = raw / width;
  if (!within(err / width, value, quad.tol)) {
    std::ostringstream os;
    os << "adaptive quadrature over [" << u.lower << ", " << u.upper
       << "] missed tolerance: error estimate " << err / width;
    fail(ErrorCode::kQuadratureNonConvergence, os.str());
  }
  return value;
}

// Adaptive integration of f * density on [0, cut] followed by tail segments
// until their contribution is negligible.
double expect_gamma_truncated(const GammaPrior& g, const std::function<double(double)>& f,
                              const QuadratureConfig& quad) {
  auto weighted = [&](double lambda) {
    if (lambda <= 0.0) return 0.0;
    const double v = f(lambda) * std::exp(gamma_log_density(g, lambda));
    if (!std::isfinite(v)) {
      fail(ErrorCode::kDivergence, "integrand times Gamma density is not finite");
    }
    return v;
  };
  QuadratureConfig inner = quad;
  inner.tol = quad.tol * 0.01;
  const double sd = std::sqrt(g.shape) / g.rate;
  const double cut = (g.shape + 10.0 * std::sqrt(g.shape) + 10.0) / g.rate;
  double total = integrate_adaptive(weighted, 0.0, cut, inner);
  const double seg = std::max(5.0 * sd, 5.0 / g.rate);
  double lo = cut;
  double prev = std::abs(total);
  int growing = 0;
  for (int i = 0; i < 400; ++i) {
    const double c = integrate_adaptive(weighted, lo, lo + seg, inner);
    total += c;
    lo += seg;
    const double ac = std::abs(c);
    if (ac <= 0.1 * quad.tol * std::max(1.0, std::abs(total)) && ac <= prev) return total;
    growing = ac >= prev ? growing + 1 : 0;
    if (growing >= 5) break;
    prev = ac;
  }
  std::ostringstream os;
  os << "expectation under Gamma(" << g.shape << ", " << g.rate
     << ") diverges: tail contributions do not decay";
  fail(ErrorCode::kDivergence, os.str());
}

double expect_gamma(const GammaPrior& g, const std::function<double(double)>& f,
                    const QuadratureConfig& quad) {
  const int n = std::max(quad.laguerre_nodes, 8);
  const Rule& fine = gauss_laguerre(n, g.shape - 1.0);
  const Rule& coarse = gauss_laguerre(n / 2, g.shape - 1.0);
  auto sum = [&](const Rule& r) {
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * f(r.nodes[i] / g.rate);
    return s;
  };
  const double qf = sum(fine);
  const double qc = sum(coarse);
  if (std::isfinite(qf) && std::isfinite(qc) && within(std::abs(qf - qc), qf, quad.tol)) return qf;
  return expect_gamma_truncated(g, f, quad);
}

}  // namespace

Prior Prior::point(double lambda) {
  require(lambda >= 0.0 && std::isfinite(lambda), "point-mass prior needs lambda >= 0");
  return Prior(PointMass{lambda});
}

Prior Prior::uniform(double upper, double lower) {
  require(lower >= 1.0 && std::isfinite(upper) && upper > lower,
          "uniform prior needs upper > lower >= 1");
  return Prior(UniformPrior{lower, upper});
}

Prior Prior::gamma(double shape, double rate) {
  require(shape > 0.0 && rate > 0.0 && std::isfinite(shape) && std::isfinite(rate),
          "gamma prior needs shape > 0 and rate > 0");
  return Prior(GammaPrior{shape, rate});
}

Prior Prior::two_point(double lambda1, double lambda2, double p) {
  require(lambda1 > 0.0 && lambda2 > 0.0 && std::isfinite(lambda1) && std::isfinite(lambda2),
          "two-point prior needs positive lambdas");
  require(p > 0.0 && p < 1.0, "two-point prior weight must lie in (0,1)");
  return Prior(TwoPoint{lambda1, lambda2, p});
}

bool Prior::is_continuous() const {
  return std::holds_alternative<UniformPrior>(v_) || std::holds_alternative<GammaPrior>(v_);
}

bool operator==(const PointMass& a, const PointMass& b) { return a.lambda == b.lambda; }
bool operator==(const UniformPrior& a, const UniformPrior& b) {
  return a.lower == b.lower && a.upper == b.upper;
}
bool operator==(const GammaPrior& a, const GammaPrior& b) {
  return a.shape == b.shape && a.rate == b.rate;
}
bool operator==(const TwoPoint& a, const TwoPoint& b) {
  return a.lambda1 == b.lambda1 && a.lambda2 == b.lambda2 && a.p == b.p;
}
bool operator==(const Prior& a, const Prior& b) { return a.v_ == b.v_; }

double expect(const Prior& prior, const std::function<double(double)>& integrand,
              const QuadratureConfig& quad) {
  return std::visit(
      overloaded{
          [&](const PointMass& p) { return integrand(p.lambda); },
          [&](const TwoPoint& t) {
            return t.p * integrand(t.lambda1) + (1.0 - t.p) * integrand(t.lambda2);
          },
          [&](const UniformPrior& u) { return expect_uniform(u, integrand, quad); },
          [&](const GammaPrior& g) { return expect_gamma(g, integrand, quad); },
      },
      prior.variant());
}

double density(const Prior& prior, double lambda) {
  require(lambda > 0.0, "density needs lambda > 0");
  return std::visit(
      overloaded{
          [&](const UniformPrior& u) {
            return (lambda >= u.lower && lambda <= u.upper) ? 1.0 / (u.upper - u.lower) : 0.0;
          },
          [&](const GammaPrior& g) { return std::exp(gamma_log_density(g, lambda)); },
          [](const auto&) -> double {
            fail(ErrorCode::kInvalidArgument, "density is defined for continuous priors only");
          },
      },
      prior.variant());
}

Rule discretize(const Prior& prior, const QuadratureConfig& quad) {
  return std::visit(
      overloaded{
          [](const PointMass& p) { return Rule{{p.lambda}, {1.0}}; },
          [](const TwoPoint& t) { return Rule{{t.lambda1, t.lambda2}, {t.p, 1.0 - t.p}}; },
          [&](const UniformPrior& u) {
            const double width = u.upper - u.lower;
            const int panels = std::max(1, static_cast<int>(std::ceil(width / quad.panel_width)));
            Rule r = composite_legendre(u.lower, u.upper, panels, quad.panel_nodes);
            for (auto& w : r.weights) w /= width;
            return r;
          },
          [&](const GammaPrior& g) {
            Rule r = gauss_laguerre(quad.laguerre_nodes, g.shape - 1.0);
            for (auto& x : r.nodes) x /= g.rate;
            return r;
          },
      },
      prior.variant());
}

double laplace_transform(const Prior& prior, double s) {
  require(s >= 0.0, "Laplace transform argument must be nonnegative");
  return std::visit(
      overloaded{
          [&](const PointMass& p) { return std::exp(-p.lambda * s); },
          [&](const TwoPoint& t) {
            return t.p * std::exp(-t.lambda1 * s) + (1.0 - t.p) * std::exp(-t.lambda2 * s);
          },
          [&](const UniformPrior& u) {
            if (s == 0.0) return 1.0;
            const double width = u.upper - u.lower;
            return std::exp(-u.lower * s) * -std::expm1(-width * s) / (s * width);
          },
          [&](const GammaPrior& g) { return std::exp(-g.shape * std::log1p(s / g.rate)); },
      },
      prior.variant());
}

double laplace_transform_derivative(const Prior& prior, double s) {
  require(s >= 0.0, "Laplace transform argument must be nonnegative");
  return std::visit(
      overloaded{
          [&](const PointMass& p) { return -p.lambda * std::exp(-p.lambda * s); },
          [&](const TwoPoint& t) {
            return -t.p * t.lambda1 * std::exp(-t.lambda1 * s) -
                   (1.0 - t.p) * t.lambda2 * std::exp(-t.lambda2 * s);
          },
          [&](const UniformPrior& u) {
            const double width = u.upper - u.lower;
            if (s * width < 1e-2) {
              // nearly linear integrand; a fixed rule is exact to rounding
              static const Rule gl = gauss_legendre(20);
              double acc = 0.0;
              for (std::size_t i = 0; i < gl.size(); ++i) {
                const double l = u.lower + 0.5 * width * (gl.nodes[i] + 1.0);
                acc += gl.weights[i] * l * std::exp(-l * s);
              }
              return -0.5 * acc;
            }
            const double a = std::exp(-u.lower * s) * (u.lower * s + 1.0);
            const double b = std::exp(-u.upper * s) * (u.upper * s + 1.0);
            return -(a - b) / (s * s * width);
          },
          [&](const GammaPrior& g) {
            return -(g.shape / g.rate) * std::exp(-(g.shape + 1.0) * std::log1p(s / g.rate));
          },
      },
      prior.variant());
}

double prior_mean(const Prior& prior) {
  return std::visit(overloaded{
                        [](const PointMass& p) { return p.lambda; },
                        [](const TwoPoint& t) { return t.p * t.lambda1 + (1.0 - t.p) * t.lambda2; },
                        [](const UniformPrior& u) { return 0.5 * (u.lower + u.upper); },
                        [](const GammaPrior& g) { return g.shape / g.rate; },
                    },
                    prior.variant());
}

}  // namespace dilution
