// Command-line front end: optimize, one-atom, threshold, sweep, simulate, reproduce.

#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>

#include "dilution/errors.hpp"
#include "dilution/io.hpp"
#include "dilution/one_atom.hpp"
#include "dilution/optimizer.hpp"
#include "dilution/reproduce.hpp"
#include "dilution/simulate.hpp"

using namespace dilution;
namespace fs = std::filesystem;

namespace {

struct Globals {
  std::string config;
  std::string out;
  std::uint64_t seed = 20240601;
  double quad_tol = 1e-9;
  int grid_points = 2000;
  Json file;  // parsed --config
};

struct ProblemArgs {
  std::string kind;
  std::string prior;
  double n = 30;
  std::optional<double> c1, c2;
};

void add_problem(CLI::App* cmd, ProblemArgs& p) {
  cmd->add_option("--criterion", p.kind, "G1, G2, G3, G4, G1_cost, G4_cost or G1_mixture");
  cmd->add_option("--prior", p.prior, "point:100, uniform:120, gamma:50,1 or two_point:25,150,0.05");
  cmd->add_option("--n", p.n, "number of mice")->capture_default_str();
  cmd->add_option("--c1", p.c1, "cost of a non-repopulated mouse");
  cmd->add_option("--c2", p.c2, "cost of a spoilt experiment");
}

// Flags win over --config entries.
template <class T>
void from_config(const Globals& g, CLI::App* cmd, const char* flag, const char* key, T& value) {
  if (g.file.contains(key) && cmd->count(flag) == 0) value = g.file.at(key).get<T>();
}

QuadratureConfig quad_config(const Globals& g, CLI::App* app) {
  QuadratureConfig q;
  q.tol = g.quad_tol;
  if (g.file.contains("quad_tol") && app->count("--quad-tol") == 0) q.tol = g.file.at("quad_tol").get<double>();
  require(q.tol > 0.0, "--quad-tol must be positive");
  return q;
}

Criterion build_criterion(const Globals& g, CLI::App* cmd, ProblemArgs& p) {
  from_config(g, cmd, "--n", "n", p.n);
  std::optional<CostWeights> costs;
  if (p.kind.empty() && g.file.contains("criterion")) {
    const Criterion c = criterion_from_json(g.file.at("criterion"));
    if (!p.c1 && !p.c2) return c;
    p.kind = to_string(c.kind());
    p.prior = prior_spec(c.prior());
    costs = c.costs();
  }
  require(!p.kind.empty(), "--criterion is required");
  const CriterionKind kind = criterion_kind_from_string(p.kind);
  if (p.prior.empty()) {
    require(kind != CriterionKind::G1 && kind != CriterionKind::G1Cost, "--prior is required");
  }
  require(!p.prior.empty(), "--prior is required");
  if (p.c1 || p.c2) {
    const bool cost_kind = kind == CriterionKind::G1Cost || kind == CriterionKind::G4Cost;
    require(cost_kind, p.kind + " does not take costs");
    const CostWeights base = costs.value_or(default_costs(kind));
    costs = CostWeights{p.c1.value_or(base.c1), p.c2.value_or(base.c2)};
  }
  return Criterion::make(kind, parse_prior(p.prior), costs);
}

void emit(const Globals& g, const std::string& name, const std::string& content) {
  if (g.out.empty()) return;
  fs::create_directories(g.out);
  write_file((fs::path(g.out) / name).string(), content);
}

[[noreturn]] void error_exit(const std::string& code, const std::string& message, int status) {
  std::cerr << Json{{"error", {{"code", code}, {"message", message}}}}.dump() << "\n";
  std::exit(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal designs for volume-constrained dilution experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "JSON file with default arguments");
  app.add_option("--out", g.out, "directory for artifacts");
  app.add_option("--seed", g.seed, "random seed")->capture_default_str();
  app.add_option("--quad-tol", g.quad_tol, "quadrature tolerance")->capture_default_str();
  app.add_option("--grid-points", g.grid_points, "optimizer grid size")->capture_default_str();

  // optimize
  ProblemArgs opt_args;
  OptimizerConfig opt_cfg;
  auto* optimize_cmd = app.add_subcommand("optimize", "maximize a criterion over design measures");
  add_problem(optimize_cmd, opt_args);
  optimize_cmd->add_option("--refine-rounds", opt_cfg.refine_rounds)->capture_default_str();
  optimize_cmd->add_option("--budget-points", opt_cfg.budget_scan_points)->capture_default_str();
  optimize_cmd->add_option("--x-min", opt_cfg.x_min)->capture_default_str();
  optimize_cmd->add_option("--cert-tol", opt_cfg.cert_tol)->capture_default_str();
  optimize_cmd->add_option("--max-iters", opt_cfg.max_iters)->capture_default_str();

  // one-atom
  ProblemArgs one_args;
  auto* one_cmd = app.add_subcommand("one-atom", "best design of the form n*delta_x");
  add_problem(one_cmd, one_args);

  // threshold and sweep share the family options
  std::string family;
  FamilyOptions fam;
  std::optional<double> fam_c1, fam_c2;
  double fam_n = 30;
  auto add_family = [&](CLI::App* cmd) {
    cmd->add_option("--family", family,
                    "G1, G1_cost, G2_uniform, G2_gamma, G3_uniform, G3_gamma, G4_uniform, "
                    "G4_gamma or G4_cost_gamma")
        ->required();
    cmd->add_option("--n", fam_n)->capture_default_str();
    cmd->add_option("--beta", fam.rate, "Gamma rate")->capture_default_str();
    cmd->add_option("--c1", fam_c1);
    cmd->add_option("--c2", fam_c2);
  };
  auto* threshold_cmd = app.add_subcommand("threshold", "parameter where the optimal dose leaves 1/n");
  add_family(threshold_cmd);
  threshold_cmd->add_option("--tol", fam.tol)->capture_default_str();

  double from = 1, to = 200;
  int points = 200;
  auto* sweep_cmd = app.add_subcommand("sweep", "one-atom optimum over a parameter range (CSV)");
  add_family(sweep_cmd);
  sweep_cmd->add_option("--from", from)->capture_default_str();
  sweep_cmd->add_option("--to", to)->capture_default_str();
  sweep_cmd->add_option("--points", points)->capture_default_str();

  // simulate
  std::string design_path;
  std::optional<double> dose;
  double mice = 30, lambda_true = 100;
  std::size_t replicates = 100000;
  bool round_first = false, dump = false;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo variance study of the MLE");
  sim_cmd->add_option("--design", design_path, "measure JSON or CSV file");
  sim_cmd->add_option("--x", dose, "single dose volume (instead of --design)");
  sim_cmd->add_option("--n", mice, "mice at --x")->capture_default_str();
  sim_cmd->add_option("--lambda", lambda_true, "true rate")->capture_default_str();
  sim_cmd->add_option("--replicates", replicates)->capture_default_str();
  sim_cmd->add_flag("--round", round_first, "round the design to integer masses first");
  sim_cmd->add_flag("--dump-estimates", dump, "write estimates.csv into --out");

  // reproduce
  std::vector<int> only;
  std::size_t rep_replicates = 100000;
  auto* rep_cmd = app.add_subcommand("reproduce", "run the numerical reproduction checks");
  rep_cmd->add_option("--only", only, "criterion numbers to run");
  rep_cmd->add_option("--replicates", rep_replicates)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    error_exit("invalid_argument", e.what(), 2);
  }

  try {
    if (!g.config.empty()) {
      try {
        g.file = Json::parse(read_file(g.config));
      } catch (const Json::exception& e) {
        fail(ErrorCode::kInvalidArgument, std::string("config: ") + e.what());
      }
      require(g.file.is_object(), "config must be a JSON object");
      from_config(g, &app, "--seed", "seed", g.seed);
      from_config(g, &app, "--grid-points", "grid_points", g.grid_points);
      if (g.out.empty() && g.file.contains("out")) g.out = g.file.at("out").get<std::string>();
    }
    const QuadratureConfig quad = quad_config(g, &app);

    if (optimize_cmd->parsed()) {
      const Criterion c = build_criterion(g, optimize_cmd, opt_args);
      opt_cfg.grid_points = g.grid_points;
      opt_cfg.quad = quad;
      if (g.file.contains("optimizer")) {
        const auto& o = g.file.at("optimizer");
        if (o.contains("refine_rounds") && !optimize_cmd->count("--refine-rounds")) opt_cfg.refine_rounds = o["refine_rounds"];
        if (o.contains("budget_scan")) opt_cfg.budget_scan = o["budget_scan"].get<std::vector<double>>();
        if (o.contains("x_min") && !optimize_cmd->count("--x-min")) opt_cfg.x_min = o["x_min"];
        if (o.contains("cert_tol") && !optimize_cmd->count("--cert-tol")) opt_cfg.cert_tol = o["cert_tol"];
        if (o.contains("max_iters") && !optimize_cmd->count("--max-iters")) opt_cfg.max_iters = o["max_iters"];
        if (o.contains("grad_tol")) opt_cfg.grad_tol = o["grad_tol"];
      }
      const auto r = optimize(c, opt_args.n, opt_cfg);
      emit(g, "measure.json", to_json(r.measure).dump(2) + "\n");
      emit(g, "certificate.json", to_json(r.certificate).dump(2) + "\n");
      emit(g, "trace.csv", trace_csv(r.trace));
      emit(g, "gradient.csv", gradient_csv(c, r.measure, make_grid(opt_cfg, opt_args.n), quad));
      std::cout << Json{{"criterion", to_json(c)},
                        {"n", opt_args.n},
                        {"measure", to_json(r.measure)},
                        {"objective", r.objective},
                        {"budget", r.budget},
                        {"total_volume", total_volume(r.measure)},
                        {"certificate", to_json(r.certificate)}}
                       .dump(2)
                << "\n";
      if (!r.certificate.passed) error_exit("certificate_failure", r.certificate.diagnostic, 1);
      return 0;
    }

    if (one_cmd->parsed()) {
      const Criterion c = build_criterion(g, one_cmd, one_args);
      Json j = to_json(solve_one_atom(c, one_args.n, quad));
      j["criterion"] = to_json(c);
      j["n"] = one_args.n;
      emit(g, "one_atom.json", j.dump(2) + "\n");
      std::cout << j.dump(2) << "\n";
      return 0;
    }

    if (threshold_cmd->parsed() || sweep_cmd->parsed()) {
      const ThresholdFamily f = threshold_family_from_string(family);
      fam.quad = quad;
      if (fam_c1 || fam_c2) {
        const CostWeights base = default_costs(f == ThresholdFamily::G1Cost ? CriterionKind::G1Cost
                                                                            : CriterionKind::G4Cost);
        require(f == ThresholdFamily::G1Cost || f == ThresholdFamily::G4CostGamma,
                family + " does not take costs");
        fam.costs = CostWeights{fam_c1.value_or(base.c1), fam_c2.value_or(base.c2)};
      }
      if (threshold_cmd->parsed()) {
        const double t = threshold(f, fam_n, fam);
        const Json j{{"family", family}, {"n", fam_n}, {"beta", fam.rate}, {"threshold", t}};
        emit(g, "threshold.json", j.dump(2) + "\n");
        std::cout << j.dump(2) << "\n";
        return 0;
      }
      require(points >= 1 && to >= from, "sweep needs --points >= 1 and --to >= --from");
      std::vector<double> params(static_cast<std::size_t>(points));
      for (int i = 0; i < points; ++i) params[i] = points == 1 ? from : from + (to - from) * i / (points - 1);
      const std::string csv = sweep_csv(sweep(f, fam_n, params, fam));
      emit(g, "sweep.csv", csv);
      std::cout << csv;
      return 0;
    }

    if (sim_cmd->parsed()) {
      DesignMeasure design;
      if (!design_path.empty()) {
        const std::string text = read_file(design_path);
        design = design_path.ends_with(".csv") ? measure_from_csv(text) : measure_from_json(Json::parse(text));
      } else {
        require(dose.has_value(), "give --design or --x");
        design = DesignMeasure::single(*dose, mice);
      }
      if (round_first) design = round_to_integer_design(design);
      const auto rep = variance_study(design, lambda_true, replicates, g.seed, dump);
      Json j = to_json(rep);
      j["design"] = to_json(design);
      emit(g, "variance.json", j.dump(2) + "\n");
      if (dump) emit(g, "estimates.csv", estimates_csv(rep.estimates));
      std::cout << j.dump(2) << "\n";
      return 0;
    }

    if (rep_cmd->parsed()) {
      ReproduceOptions o;
      o.only = only;
      o.replicates = rep_replicates;
      o.seed = g.seed;
      const auto rows = run_reproduction(o);
      std::cout << format_table(rows);
      Json j = Json::array();
      bool all = true;
      for (const auto& r : rows) {
        all = all && r.passed;
        j.push_back({{"criterion", r.criterion}, {"check", r.name}, {"target", r.target},
                     {"computed", r.computed}, {"tolerance", r.tolerance}, {"passed", r.passed},
                     {"seconds", r.seconds}});
      }
      emit(g, "reproduce.json", j.dump(2) + "\n");
      return all ? 0 : 1;
    }
  } catch (const Error& e) {
    error_exit(to_string(e.code()), e.what(), 2);
  } catch (const Json::exception& e) {
    error_exit("invalid_argument", e.what(), 2);
  } catch (const std::exception& e) {
    error_exit("internal", e.what(), 2);
  }
  return 0;
}
