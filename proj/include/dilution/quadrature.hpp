#pragma once

#include <functional>
#include <vector>

namespace dilution {

struct QuadratureConfig {
  /// Target error for adaptive integration, absolute for |I| <= 1 and
  /// relative above.
  double tol = 1e-9;
  int max_depth = 25;
  /// Node count of the generalized Gauss-Laguerre rule used for Gamma priors.
  int laguerre_nodes = 128;
  /// Composite Gauss-Legendre layout used for Uniform priors.
  double panel_width = 2.0;
  int panel_nodes = 10;
};

/// Nodes and weights of a quadrature rule. Probability rules have weights
/// summing to one.
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }

  template <class F>
  double apply(F&& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
    return s;
  }
};

/// n-point Gauss-Legendre rule on [-1, 1].
Rule gauss_legendre(int n);

/// Composite Gauss-Legendre on [a, b] with `panels` equal panels.
Rule composite_legendre(double a, double b, int panels, int nodes_per_panel);

/// n-point generalized Gauss-Laguerre rule for the probability weight
/// t^a e^{-t} / Gamma(a+1) on (0, inf), a > -1. Built by Golub-Welsch.
/// Rules are cached; the returned reference stays valid for the process.
const Rule& gauss_laguerre(int n, double a);

/// Adaptive Gauss-Kronrod on a finite interval. Returns the estimate and
/// writes the error estimate.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          const QuadratureConfig& quad, double* error = nullptr);

}  // namespace dilution
