#include "dilution/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "dilution/errors.hpp"

namespace dilution {

Rule gauss_legendre(int n) {
  require(n >= 1, "Gauss-Legendre order must be positive");
  Rule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // recompute derivative at the converged root
    double p0 = 1.0, p1 = 0.0;
    for (int j = 0; j < n; ++j) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    rule.nodes[lo] = -z;
    rule.nodes[hi] = z;
    rule.weights[lo] = w;
    rule.weights[hi] = w;
  }
  return rule;
}

Rule composite_legendre(double a, double b, int panels, int nodes_per_panel) {
  require(b > a, "composite rule needs a nonempty interval");
  require(panels >= 1, "composite rule needs at least one panel");
  const Rule base = gauss_legendre(nodes_per_panel);
  Rule rule;
  rule.nodes.reserve(static_cast<std::size_t>(panels) * base.size());
  rule.weights.reserve(rule.nodes.capacity());
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    const double mid = lo + 0.5 * h;
    for (std::size_t i = 0; i < base.size(); ++i) {
      rule.nodes.push_back(mid + 0.5 * h * base.nodes[i]);
      rule.weights.push_back(0.5 * h * base.weights[i]);
    }
  }
  return rule;
}

namespace {

Rule build_laguerre(int n, double a) {
  // Jacobi matrix of the monic Laguerre recurrence for weight t^a e^{-t}.
  Eigen::VectorXd diag(n);
  Eigen::VectorXd sub(n > 1 ? n - 1 : 0);
  for (int k = 0; k < n; ++k) diag(k) = 2.0 * k + a + 1.0;
  for (int k = 1; k < n; ++k) sub(k - 1) = std::sqrt(k * (k + a));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    fail(ErrorCode::kQuadratureNonConvergence, "Golub-Welsch eigen-solve failed for Laguerre rule");
  }
  Rule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double v0 = solver.eigenvectors()(0, k);
    rule.nodes[static_cast<std::size_t>(k)] = solver.eigenvalues()(k);
    rule.weights[static_cast<std::size_t>(k)] = v0 * v0;
  }
  return rule;
}

}  // namespace

const Rule& gauss_laguerre(int n, double a) {
  require(n >= 1, "Gauss-Laguerre order must be positive");
  require(a > -1.0 && std::isfinite(a), "Gauss-Laguerre exponent must exceed -1");
  static std::mutex mutex;
  static std::map<std::pair<int, double>, std::unique_ptr<Rule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{n, a}];
  if (!slot) slot = std::make_unique<Rule>(build_laguerre(n, a));
  return *slot;
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          const QuadratureConfig& quad, double* error) {
  double err = 0.0;
  double l1 = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(
      f, a, b, static_cast<unsigned>(quad.max_depth), quad.tol, &err, &l1);
  if (!std::isfinite(value)) {
    fail(ErrorCode::kDivergence, "integrand is not finite on the integration range");
  }
  if (error) *error = err;
  return value;
}

}  // namespace dilution
