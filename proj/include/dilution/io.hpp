#pragma once

#include <span>
#include <string>
#include <vector>

#include "dilution/criteria.hpp"
#include "dilution/measure.hpp"
#include "dilution/one_atom.hpp"
#include "dilution/optimizer.hpp"
#include "dilution/priors.hpp"
#include "dilution/simulate.hpp"
#include "json.hpp"

namespace dilution {

using Json = nlohmann::json;

// Every from_json throws kInvalidArgument on schema violations.

Json to_json(const DesignMeasure& mu);
DesignMeasure measure_from_json(const Json& j);

/// {"type": "uniform", "u": 120} and friends.
Json to_json(const Prior& prior);
Prior prior_from_json(const Json& j);

/// Compact command-line form: point:100, uniform:120, uniform:2,120,
/// gamma:50 or gamma:50,1, two_point:25,150,0.05.
Prior parse_prior(const std::string& spec);
std::string prior_spec(const Prior& prior);

/// {"kind": "G4_cost", "prior": {...}, "c1": 0.005, "c2": 5}. Parsing also
/// accepts the prior fields inline next to "kind".
Json to_json(const Criterion& criterion);
Criterion criterion_from_json(const Json& j);

Json to_json(const OptimalityCertificate& c);
OptimalityCertificate certificate_from_json(const Json& j);

Json to_json(const OneAtomSolution& s);
Json to_json(const VarianceReport& r);

/// Shortest decimal form that round-trips.
std::string format_number(double v);

std::string measure_csv(const DesignMeasure& mu);
DesignMeasure measure_from_csv(const std::string& text);
std::string trace_csv(std::span<const TraceRow> trace);
std::string sweep_csv(std::span<const SweepRow> rows);
/// x,g columns of the gradient function of `criterion` at `mu`.
std::string gradient_csv(const Criterion& criterion, const DesignMeasure& mu,
                         std::span<const double> grid, const QuadratureConfig& quad = {});
std::string estimates_csv(std::span<const double> estimates);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace dilution
