#include "dilution/criteria.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "criterion_model.hpp"
#include "dilution/errors.hpp"

namespace dilution {

// ---------------------------------------------------------------------------
// Kernels

double r_kernel(double y) {
  require(y >= 0.0, "r kernel needs y >= 0");
  if (y == 0.0) return 0.0;
  if (y > 700.0) return 0.0;
  if (y < 1e-8) return y / (1.0 + 0.5 * y);
  return y * y / std::expm1(y);
}

double log_r_kernel(double y) {
  require(y > 0.0, "log r kernel needs y > 0");
  if (y < 1e-8) return std::log(y) - 0.5 * y;
  if (y > 30.0) return 2.0 * std::log(y) - y - std::log1p(-std::exp(-y));
  return 2.0 * std::log(y) - std::log(std::expm1(y));
}

double r_kernel_argmax() {
  // r'(y) = 0  <=>  2 (e^y - 1) = y e^y  <=>  y = 2 (1 - e^{-y}); the
  // fixed-point map contracts near the root.
  static const double root = [] {
    double y = 1.6;
    for (int i = 0; i < 200; ++i) {
      const double next = -2.0 * std::expm1(-y);
      if (next == y) break;
      y = next;
    }
    return y;
  }();
  return root;
}

double fisher_kernel(double x, double lambda) {
  const double y = lambda * x;
  if (y > 700.0) return 0.0;
  if (y < 1e-8) return x / (lambda * (1.0 + 0.5 * y));
  return x * x / std::expm1(y);
}

double log_fisher_kernel(double x, double lambda) {
  return log_r_kernel(lambda * x) - 2.0 * std::log(lambda);
}

double log1mexp(double y) {
  return y < 0.6931471805599453 ? std::log(-std::expm1(-y)) : std::log1p(-std::exp(-y));
}

// ---------------------------------------------------------------------------
// Criterion

std::string to_string(CriterionKind kind) {
  switch (kind) {
    case CriterionKind::G1: return "G1";
    case CriterionKind::G2: return "G2";
    case CriterionKind::G3: return "G3";
    case CriterionKind::G4: return "G4";
    case CriterionKind::G1Cost: return "G1_cost";
    case CriterionKind::G4Cost: return "G4_cost";
    case CriterionKind::G1Mixture: return "G1_mixture";
  }
  return "?";
}

CriterionKind criterion_kind_from_string(const std::string& name) {
  for (auto k : {CriterionKind::G1, CriterionKind::G2, CriterionKind::G3, CriterionKind::G4,
                 CriterionKind::G1Cost, CriterionKind::G4Cost, CriterionKind::G1Mixture}) {
    if (to_string(k) == name) return k;
  }
  fail(ErrorCode::kInvalidArgument, "unknown criterion kind '" + name + "'");
}

CostWeights default_costs(CriterionKind kind) {
  switch (kind) {
    case CriterionKind::G1Cost: return {1e-4, 1.0};
    case CriterionKind::G4Cost: return {0.005, 5.0};
    default: fail(ErrorCode::kInvalidArgument, to_string(kind) + " carries no costs");
  }
}

Criterion Criterion::make(CriterionKind kind, Prior prior, std::optional<CostWeights> costs) {
  const bool point = prior.get_if<PointMass>() != nullptr;
  switch (kind) {
    case CriterionKind::G1:
    case CriterionKind::G1Cost:
      require(point, to_string(kind) + " requires a point-mass prior");
      require(prior.get_if<PointMass>()->lambda > 0.0, to_string(kind) + " requires lambda > 0");
      break;
    case CriterionKind::G1Mixture:
      require(prior.get_if<TwoPoint>() != nullptr, "G1_mixture requires a two-point prior");
      break;
    case CriterionKind::G2:
    case CriterionKind::G3:
    case CriterionKind::G4:
    case CriterionKind::G4Cost:
      require(prior.is_continuous(), to_string(kind) + " requires a uniform or gamma prior");
      break;
  }
  const bool cost_kind = kind == CriterionKind::G1Cost || kind == CriterionKind::G4Cost;
  if (cost_kind) {
    if (!costs) costs = default_costs(kind);
    require(costs->c1 >= 0.0 && costs->c2 >= 0.0 && std::isfinite(costs->c1) &&
                std::isfinite(costs->c2),
            "costs c1, c2 must be finite and nonnegative");
  } else {
    require(!costs, to_string(kind) + " does not take costs");
  }
  return Criterion(kind, prior, costs);
}

bool Criterion::is_linear() const {
  return kind_ == CriterionKind::G1 || kind_ == CriterionKind::G2 ||
         kind_ == CriterionKind::G1Mixture;
}

// ---------------------------------------------------------------------------
// Model

namespace detail {

CriterionModel::CriterionModel(const Criterion& criterion, const QuadratureConfig& quad)
    : criterion_(criterion), quad_(quad), costs_(criterion.costs()) {
  switch (criterion.kind()) {
    case CriterionKind::G3: info_power_ = 1; break;
    case CriterionKind::G4:
    case CriterionKind::G4Cost: info_power_ = 2; break;
    default: info_power_ = 0; break;
  }
  if (info_power_ > 0 || costs_) rule_ = discretize(criterion.prior(), quad);
  if (criterion.kind() == CriterionKind::G2) {
    if (const auto* g = criterion.prior().get_if<GammaPrior>(); g && g->shape > 2.0) {
      shifted_rule_ = &gauss_laguerre(quad.laguerre_nodes, g->shape - 3.0);
    }
  }
}

double CriterionModel::base_linear(double x) const {
  const Prior& prior = criterion_.prior();
  switch (criterion_.kind()) {
    case CriterionKind::G1:
    case CriterionKind::G1Cost: return fisher_kernel(x, prior.get_if<PointMass>()->lambda);
    case CriterionKind::G1Mixture: {
      const auto* t = prior.get_if<TwoPoint>();
      return t->p * fisher_kernel(x, t->lambda1) + (1.0 - t->p) * fisher_kernel(x, t->lambda2);
    }
    case CriterionKind::G2: {
      if (const auto* u = prior.get_if<UniformPrior>()) {
        // Fubini: (u-l)^{-1} int_l^u x^2/(e^{lambda x}-1) dlambda in closed form
        return x / (u->upper - u->lower) * (log1mexp(u->upper * x) - log1mexp(u->lower * x));
      }
      const auto* g = prior.get_if<GammaPrior>();
      if (shifted_rule_) {
        const double scale = x / g->rate;
        double s = 0.0;
        for (std::size_t i = 0; i < shifted_rule_->size(); ++i) {
          s += shifted_rule_->weights[i] * r_kernel(scale * shifted_rule_->nodes[i]);
        }
        return g->rate * g->rate / ((g->shape - 1.0) * (g->shape - 2.0)) * s;
      }
      return expect(prior, [x](double l) { return l > 0.0 ? fisher_kernel(x, l) : 0.0; }, quad_);
    }
    default: return 0.0;
  }
}

double CriterionModel::linear_gradient(double x) const {
  double g = base_linear(x);
  if (costs_) g -= costs_->c1 * laplace_transform(criterion_.prior(), x);
  return g;
}

double CriterionModel::value(double linear, std::span<const double> log_info,
                             std::span<const double> log_repop, double volume) const {
  double v = linear;
  if (info_power_ == 1) {
    for (std::size_t k = 0; k < rule_.size(); ++k) v += rule_.weights[k] * log_info[k];
  } else if (info_power_ == 2) {
    for (std::size_t k = 0; k < rule_.size(); ++k) v -= rule_.weights[k] * std::exp(-log_info[k]);
  }
  if (costs_) {
    double spoilt = laplace_transform(criterion_.prior(), volume);
    for (std::size_t k = 0; k < rule_.size(); ++k) spoilt += rule_.weights[k] * std::exp(log_repop[k]);
    v -= costs_->c2 * spoilt;
  }
  return v;
}

GradientCoefficients CriterionModel::coefficients(std::span<const double> log_info,
                                                  std::span<const double> log_repop,
                                                  double volume) const {
  GradientCoefficients c;
  if (info_power_ > 0) {
    c.log_fisher.resize(rule_.size());
    for (std::size_t k = 0; k < rule_.size(); ++k) {
      c.log_fisher[k] = std::log(rule_.weights[k]) - info_power_ * log_info[k];
    }
  }
  if (costs_) {
    c.all_repopulate.resize(rule_.size());
    for (std::size_t k = 0; k < rule_.size(); ++k) {
      c.all_repopulate[k] = -costs_->c2 * rule_.weights[k] * std::exp(log_repop[k]);
    }
    c.volume = -costs_->c2 * laplace_transform_derivative(criterion_.prior(), volume);
  }
  return c;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// evaluate

namespace {

void check_gamma_moments(const Criterion& criterion, const DesignMeasure& mu) {
  const auto* g = criterion.prior().get_if<GammaPrior>();
  if (!g || mu.empty()) return;
  double smallest = 1.0;
  for (const auto& a : mu.atoms()) {
    if (a.m > 0.0) smallest = std::min(smallest, a.x);
  }
  // I(mu;lambda)^{-1} grows like e^{lambda x_min}; the gradient function
  // carries its square for the inverse-information kinds.
  double limit = g->rate;
  if (criterion.kind() == CriterionKind::G4 || criterion.kind() == CriterionKind::G4Cost) {
    limit = 0.5 * g->rate;
  } else if (criterion.kind() != CriterionKind::G3) {
    return;
  }
  if (smallest >= limit) {
    std::ostringstream os;
    os << to_string(criterion.kind()) << " under Gamma(" << g->shape << ", " << g->rate
       << ") diverges: smallest dose " << smallest << " >= " << limit;
    fail(ErrorCode::kDivergence, os.str());
  }
}

}  // namespace

EvalResult evaluate(const Criterion& criterion, const DesignMeasure& mu,
                    const QuadratureConfig& quad) {
  auto model = std::make_shared<const detail::CriterionModel>(criterion, quad);
  const Rule& rule = model->rule();

  double linear = 0.0;
  for (const auto& a : mu.atoms()) linear += a.m * model->linear_gradient(a.x);
  const double volume = total_volume(mu);

  std::vector<double> log_info, log_repop;
  if (model->uses_information()) {
    if (!(total_mass(mu) > 0.0)) {
      fail(ErrorCode::kDegenerateInformation,
           to_string(criterion.kind()) + " needs a nonzero measure (I(mu;lambda) = 0)");
    }
    check_gamma_moments(criterion, mu);
    log_info.resize(rule.size());
    for (std::size_t k = 0; k < rule.size(); ++k) {
      // log-sum-exp over atoms
      double top = -std::numeric_limits<double>::infinity();
      std::vector<double> terms;
      terms.reserve(mu.size());
      for (const auto& a : mu.atoms()) {
        if (a.m <= 0.0) continue;
        terms.push_back(std::log(a.m) + log_fisher_kernel(a.x, rule.nodes[k]));
        top = std::max(top, terms.back());
      }
      double s = 0.0;
      for (double t : terms) s += std::exp(t - top);
      log_info[k] = top + std::log(s);
    }
  }
  if (model->uses_costs()) {
    log_repop.resize(rule.size());
    for (std::size_t k = 0; k < rule.size(); ++k) {
      double s = 0.0;
      for (const auto& a : mu.atoms()) {
        if (a.m > 0.0) s += a.m * log1mexp(rule.nodes[k] * a.x);
      }
      log_repop[k] = s;
    }
  }

  EvalResult out;
  out.value = model->value(linear, log_info, log_repop, volume);
  auto coeff = std::make_shared<const detail::GradientCoefficients>(
      model->coefficients(log_info, log_repop, volume));
  out.gradient = [model, coeff](double x) {
    const Rule& r = model->rule();
    double g = model->linear_gradient(x);
    for (std::size_t k = 0; k < coeff->log_fisher.size(); ++k) {
      g += std::exp(coeff->log_fisher[k] + log_fisher_kernel(x, r.nodes[k]));
    }
    for (std::size_t k = 0; k < coeff->all_repopulate.size(); ++k) {
      g += coeff->all_repopulate[k] * log1mexp(r.nodes[k] * x);
    }
    return g + coeff->volume * x;
  };
  return out;
}

double fisher_information(const DesignMeasure& mu, double lambda) {
  require(lambda > 0.0, "Fisher information needs lambda > 0");
  double s = 0.0;
  for (const auto& a : mu.atoms()) s += a.m * fisher_kernel(a.x, lambda);
  return s;
}

double expected_dead_mice(const DesignMeasure& mu, const Prior& prior) {
  double s = 0.0;
  for (const auto& a : mu.atoms()) s += a.m * laplace_transform(prior, a.x);
  return s;
}

double spoilt_probability(const DesignMeasure& mu, const Prior& prior,
                          const QuadratureConfig& quad) {
  require(!mu.empty(), "spoilt probability needs a nonempty design");
  const double none_repopulate = laplace_transform(prior, total_volume(mu));
  const double all_repopulate = expect(
      prior,
      [&mu](double lambda) {
        if (lambda <= 0.0) return 0.0;
        double s = 0.0;
        for (const auto& a : mu.atoms()) s += a.m * log1mexp(lambda * a.x);
        return std::exp(s);
      },
      quad);
  return std::clamp(none_repopulate + all_repopulate, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// GridCriterion

struct GridCriterion::Tables {
  Eigen::VectorXd x;
  Eigen::VectorXd linear;
  Eigen::MatrixXd fisher;      // K x J, fisher_kernel(x_j, lambda_k)
  Eigen::MatrixXd repopulate;  // K x J, log1mexp(lambda_k x_j)
};

GridCriterion::GridCriterion(const Criterion& criterion, std::vector<double> grid,
                             const QuadratureConfig& quad)
    : criterion_(criterion), grid_(std::move(grid)) {
  require(!grid_.empty(), "grid must not be empty");
  for (double x : grid_) require(x > 0.0 && x <= 1.0, "grid points must lie in (0,1]");
  model_ = std::make_unique<detail::CriterionModel>(criterion, quad);
  tables_ = std::make_unique<Tables>();
  const auto J = static_cast<Eigen::Index>(grid_.size());
  const Rule& rule = model_->rule();
  const auto K = static_cast<Eigen::Index>(rule.size());
  tables_->x = Eigen::Map<const Eigen::VectorXd>(grid_.data(), J);
  tables_->linear.resize(J);
  for (Eigen::Index j = 0; j < J; ++j) tables_->linear(j) = model_->linear_gradient(grid_[j]);
  if (model_->uses_information()) {
    tables_->fisher.resize(K, J);
    for (Eigen::Index j = 0; j < J; ++j)
      for (Eigen::Index k = 0; k < K; ++k)
        tables_->fisher(k, j) = fisher_kernel(grid_[j], rule.nodes[k]);
  }
  if (model_->uses_costs()) {
    tables_->repopulate.resize(K, J);
    for (Eigen::Index j = 0; j < J; ++j)
      for (Eigen::Index k = 0; k < K; ++k)
        tables_->repopulate(k, j) = log1mexp(rule.nodes[k] * grid_[j]);
  }
}

GridCriterion::~GridCriterion() = default;
GridCriterion::GridCriterion(GridCriterion&&) noexcept = default;
GridCriterion& GridCriterion::operator=(GridCriterion&&) noexcept = default;

double GridCriterion::value(std::span<const double> masses) const {
  std::vector<double> scratch(masses.size());
  return value_and_gradient(masses, scratch);
}

double GridCriterion::value_and_gradient(std::span<const double> masses,
                                         std::span<double> gradient) const {
  require(masses.size() == grid_.size() && gradient.size() == grid_.size(),
          "mass and gradient vectors must match the grid");
  const auto J = static_cast<Eigen::Index>(grid_.size());
  Eigen::Map<const Eigen::VectorXd> m(masses.data(), J);
  Eigen::Map<Eigen::VectorXd> g(gradient.data(), J);
  const Tables& t = *tables_;

  const double linear = t.linear.dot(m);
  const double volume = t.x.dot(m);
  std::vector<double> log_info, log_repop;
  Eigen::VectorXd info;
  if (model_->uses_information()) {
    info = t.fisher * m;
    log_info.resize(static_cast<std::size_t>(info.size()));
    for (Eigen::Index k = 0; k < info.size(); ++k) {
      if (!(info(k) > 0.0)) {
        g.setZero();
        return -std::numeric_limits<double>::infinity();
      }
      log_info[static_cast<std::size_t>(k)] = std::log(info(k));
    }
  }
  if (model_->uses_costs()) {
    Eigen::VectorXd s = t.repopulate * m;
    log_repop.assign(s.data(), s.data() + s.size());
  }

  const double value = model_->value(linear, log_info, log_repop, volume);
  const auto c = model_->coefficients(log_info, log_repop, volume);
  g = t.linear;
  if (!c.log_fisher.empty()) {
    Eigen::VectorXd a(static_cast<Eigen::Index>(c.log_fisher.size()));
    for (Eigen::Index k = 0; k < a.size(); ++k) a(k) = std::exp(c.log_fisher[static_cast<std::size_t>(k)]);
    g.noalias() += t.fisher.transpose() * a;
  }
  if (!c.all_repopulate.empty()) {
    Eigen::Map<const Eigen::VectorXd> b(c.all_repopulate.data(),
                                        static_cast<Eigen::Index>(c.all_repopulate.size()));
    g.noalias() += t.repopulate.transpose() * b;
  }
  if (c.volume != 0.0) g += c.volume * t.x;
  return value;
}

}  // namespace dilution
