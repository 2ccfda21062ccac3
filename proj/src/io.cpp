#include "dilution/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dilution/errors.hpp"

namespace dilution {

namespace {

template <class T>
T field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    fail(ErrorCode::kInvalidArgument, std::string("missing field '") + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    fail(ErrorCode::kInvalidArgument, std::string("field '") + key + "': " + e.what());
  }
}

double number_or(const Json& j, const char* key, double fallback) {
  return j.contains(key) ? field<double>(j, key) : fallback;
}

std::vector<double> split_numbers(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      fail(ErrorCode::kInvalidArgument, "not a number: '" + item + "'");
    }
  }
  return out;
}

}  // namespace

Json to_json(const DesignMeasure& mu) {
  Json atoms = Json::array();
  for (const auto& a : mu.atoms()) atoms.push_back({{"x", a.x}, {"m", a.m}});
  return {{"atoms", atoms}};
}

DesignMeasure measure_from_json(const Json& j) {
  const auto atoms = field<Json>(j, "atoms");
  require(atoms.is_array(), "'atoms' must be an array");
  std::vector<Atom> out;
  for (const auto& a : atoms) out.push_back({field<double>(a, "x"), field<double>(a, "m")});
  return DesignMeasure(out);
}

Json to_json(const Prior& prior) {
  if (const auto* p = prior.get_if<PointMass>()) return {{"type", "point"}, {"lambda", p->lambda}};
  if (const auto* u = prior.get_if<UniformPrior>()) {
    Json j{{"type", "uniform"}, {"u", u->upper}};
    if (u->lower != 1.0) j["lower"] = u->lower;
    return j;
  }
  if (const auto* g = prior.get_if<GammaPrior>()) {
    return {{"type", "gamma"}, {"alpha", g->shape}, {"beta", g->rate}};
  }
  const auto* t = prior.get_if<TwoPoint>();
  return {{"type", "two_point"}, {"lambda1", t->lambda1}, {"lambda2", t->lambda2}, {"p", t->p}};
}

Prior prior_from_json(const Json& j) {
  const auto type = field<std::string>(j, "type");
  if (type == "point") return Prior::point(field<double>(j, "lambda"));
  if (type == "uniform") return Prior::uniform(field<double>(j, "u"), number_or(j, "lower", 1.0));
  if (type == "gamma") return Prior::gamma(field<double>(j, "alpha"), number_or(j, "beta", 1.0));
  if (type == "two_point") {
    return Prior::two_point(field<double>(j, "lambda1"), field<double>(j, "lambda2"),
                            field<double>(j, "p"));
  }
  fail(ErrorCode::kInvalidArgument, "unknown prior type '" + type + "'");
}

Prior parse_prior(const std::string& spec) {
  const auto colon = spec.find(':');
  require(colon != std::string::npos, "prior spec must look like type:params, got '" + spec + "'");
  const std::string type = spec.substr(0, colon);
  const auto v = split_numbers(spec.substr(colon + 1));
  auto arity = [&](std::size_t lo, std::size_t hi) {
    require(v.size() >= lo && v.size() <= hi, "wrong number of parameters in prior '" + spec + "'");
  };
  if (type == "point") {
    arity(1, 1);
    return Prior::point(v[0]);
  }
  if (type == "uniform") {
    arity(1, 2);
    return v.size() == 1 ? Prior::uniform(v[0]) : Prior::uniform(v[1], v[0]);
  }
  if (type == "gamma") {
    arity(1, 2);
    return Prior::gamma(v[0], v.size() == 2 ? v[1] : 1.0);
  }
  if (type == "two_point") {
    arity(3, 3);
    return Prior::two_point(v[0], v[1], v[2]);
  }
  fail(ErrorCode::kInvalidArgument, "unknown prior type '" + type + "'");
}

std::string prior_spec(const Prior& prior) {
  if (const auto* p = prior.get_if<PointMass>()) return "point:" + format_number(p->lambda);
  if (const auto* u = prior.get_if<UniformPrior>()) {
    return u->lower == 1.0 ? "uniform:" + format_number(u->upper)
                           : "uniform:" + format_number(u->lower) + "," + format_number(u->upper);
  }
  if (const auto* g = prior.get_if<GammaPrior>()) {
    return "gamma:" + format_number(g->shape) + "," + format_number(g->rate);
  }
  const auto* t = prior.get_if<TwoPoint>();
  return "two_point:" + format_number(t->lambda1) + "," + format_number(t->lambda2) + "," +
         format_number(t->p);
}

Json to_json(const Criterion& criterion) {
  Json j{{"kind", to_string(criterion.kind())}, {"prior", to_json(criterion.prior())}};
  if (criterion.costs()) {
    j["c1"] = criterion.costs()->c1;
    j["c2"] = criterion.costs()->c2;
  }
  return j;
}

Criterion criterion_from_json(const Json& j) {
  const auto kind = criterion_kind_from_string(field<std::string>(j, "kind"));
  const Prior prior = j.contains("prior") ? prior_from_json(j.at("prior")) : prior_from_json(j);
  std::optional<CostWeights> costs;
  if (j.contains("c1") || j.contains("c2")) {
    CostWeights base = (kind == CriterionKind::G1Cost || kind == CriterionKind::G4Cost)
                           ? default_costs(kind)
                           : CostWeights{0, 0};
    costs = CostWeights{number_or(j, "c1", base.c1), number_or(j, "c2", base.c2)};
  }
  return Criterion::make(kind, prior, costs);
}

Json to_json(const OptimalityCertificate& c) {
  return {{"u1", c.u1},
          {"u2", c.u2},
          {"volume_active", c.volume_active},
          {"max_violation", c.max_violation},
          {"support_residual", c.support_residual},
          {"gradient_scale", c.gradient_scale},
          {"passed", c.passed},
          {"diagnostic", c.diagnostic}};
}

OptimalityCertificate certificate_from_json(const Json& j) {
  OptimalityCertificate c;
  c.u1 = field<double>(j, "u1");
  c.u2 = field<double>(j, "u2");
  c.volume_active = field<bool>(j, "volume_active");
  c.max_violation = field<double>(j, "max_violation");
  c.support_residual = field<double>(j, "support_residual");
  c.gradient_scale = number_or(j, "gradient_scale", 0.0);
  c.passed = j.contains("passed") ? field<bool>(j, "passed") : false;
  c.diagnostic = j.contains("diagnostic") ? field<std::string>(j, "diagnostic") : "";
  return c;
}

Json to_json(const OneAtomSolution& s) {
  return {{"x_star", s.x_star},
          {"x_unconstrained", s.x_unconstrained},
          {"at_boundary", s.at_boundary},
          {"objective", s.objective},
          {"flat", s.flat}};
}

Json to_json(const VarianceReport& r) {
  auto num = [](double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); };
  return {{"empirical_var", num(r.empirical_var)},
          {"fisher_info", r.fisher_info},
          {"product", num(r.product)},
          {"boundary_freq", r.boundary_freq},
          {"R", r.replicates},
          {"interior", r.interior},
          {"mean", num(r.mean)},
          {"lambda_true", r.lambda_true},
          {"reliable", r.reliable},
          {"seed", r.seed},
          {"rng", r.rng}};
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string measure_csv(const DesignMeasure& mu) {
  std::string s = "x,m\n";
  for (const auto& a : mu.atoms()) s += format_number(a.x) + "," + format_number(a.m) + "\n";
  return s;
}

DesignMeasure measure_from_csv(const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  std::vector<Atom> atoms;
  bool header = true;
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line == "x,m") continue;
    }
    const auto v = split_numbers(line);
    require(v.size() == 2, "measure CSV rows need two columns: '" + line + "'");
    atoms.push_back({v[0], v[1]});
  }
  return DesignMeasure(atoms);
}

std::string trace_csv(std::span<const TraceRow> trace) {
  std::string s = "budget,objective,iterations,certified\n";
  for (const auto& r : trace) {
    s += format_number(r.budget) + "," + format_number(r.objective) + "," +
         std::to_string(r.iterations) + "," + (r.certified ? "true" : "false") + "\n";
  }
  return s;
}

std::string sweep_csv(std::span<const SweepRow> rows) {
  std::string s = "parameter,x_star,x_unconstrained,objective\n";
  for (const auto& r : rows) {
    s += format_number(r.parameter) + "," + format_number(r.x_star) + "," +
         format_number(r.x_unconstrained) + "," + format_number(r.objective) + "\n";
  }
  return s;
}

std::string gradient_csv(const Criterion& criterion, const DesignMeasure& mu,
                         std::span<const double> grid, const QuadratureConfig& quad) {
  const auto e = evaluate(criterion, mu, quad);
  std::string s = "x,g\n";
  for (double x : grid) s += format_number(x) + "," + format_number(e.gradient(x)) + "\n";
  return s;
}

std::string estimates_csv(std::span<const double> estimates) {
  std::string s = "replicate,lambda_hat\n";
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    s += std::to_string(i) + "," + format_number(estimates[i]) + "\n";
  }
  return s;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path);
  out << content;
  if (!out) fail(ErrorCode::kIo, "write failed for " + path);
}

}  // namespace dilution
