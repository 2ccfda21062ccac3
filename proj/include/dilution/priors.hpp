#pragma once

#include <functional>
#include <variant>

#include "dilution/quadrature.hpp"

namespace dilution {

struct PointMass {
  double lambda;
};

struct UniformPrior {
  double lower = 1.0;
  double upper;
};

struct GammaPrior {
  double shape;
  double rate = 1.0;
};

/// Mixture p * delta_{lambda1} + (1-p) * delta_{lambda2}.
struct TwoPoint {
  double lambda1;
  double lambda2;
  double p;
};

/// Prior distribution over the Poisson rate lambda. Immutable.
class Prior {
 public:
  using Variant = std::variant<PointMass, UniformPrior, GammaPrior, TwoPoint>;

  static Prior point(double lambda);
  static Prior uniform(double upper, double lower = 1.0);
  static Prior gamma(double shape, double rate = 1.0);
  static Prior two_point(double lambda1, double lambda2, double p);

  const Variant& variant() const { return v_; }
  bool is_continuous() const;

  template <class T>
  const T* get_if() const {
    return std::get_if<T>(&v_);
  }

  friend bool operator==(const Prior& a, const Prior& b);

 private:
  explicit Prior(Variant v) : v_(v) {}
  Variant v_;
};

bool operator==(const PointMass& a, const PointMass& b);
bool operator==(const UniformPrior& a, const UniformPrior& b);
bool operator==(const GammaPrior& a, const GammaPrior& b);
bool operator==(const TwoPoint& a, const TwoPoint& b);

/// E_Q integrand(lambda) with error control. Throws kDivergence when the
/// integral does not converge and kQuadratureNonConvergence when the error
/// target is not met.
double expect(const Prior& prior, const std::function<double(double)>& integrand,
              const QuadratureConfig& quad = {});

/// Probability density of a continuous prior. Discrete priors are rejected.
double density(const Prior& prior, double lambda);

/// Fixed probability rule (nodes, weights with the density folded in) used
/// inside optimisation loops where adaptive integration is too expensive.
Rule discretize(const Prior& prior, const QuadratureConfig& quad = {});

/// E_Q e^{-lambda s}, closed form for every variant.
double laplace_transform(const Prior& prior, double s);

/// d/ds E_Q e^{-lambda s} = -E_Q lambda e^{-lambda s}.
double laplace_transform_derivative(const Prior& prior, double s);

double prior_mean(const Prior& prior);

}  // namespace dilution
