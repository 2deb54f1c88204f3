#ifndef OPLAB_SCENARIO_HPP
#define OPLAB_SCENARIO_HPP

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "oplab/lower_bounds.hpp"

namespace oplab {

using Json = nlohmann::json;

struct CheckSpec {
  std::string name;
  double tol = 1e-6;
  Json params = Json::object();  // check-specific knobs
};

struct ScenarioConfig {
  std::string name;
  std::shared_ptr<const Cone> cone;
  NormSpec norm = NormSpec::l1();
  std::optional<NormSpec> dplus_norm;  // dispatch norm for d_+ when distinct
  std::vector<Semigroup> semigroups;
  std::vector<CheckSpec> checks;
  double horizon = 256.0;
  std::pair<double, double> window{1.0, 256.0};
  std::uint64_t seed = 1;
  Json raw;  // canonical JSON the config was built from
};

struct CheckVerdict {
  std::string check;
  std::string verdict;  // pass | fail | inconclusive
  double metric = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct RunReport {
  std::string scenario;
  std::vector<CheckVerdict> verdicts;
  std::map<std::string, double> metrics;
  double wall_ms = 0.0;
  std::string version;
  std::string input_digest;
  bool all_passed() const {
    for (const auto& v : verdicts)
      if (v.verdict != "pass") return false;
    return !verdicts.empty();
  }
};

// JSON serialization of the core value types (matrices row-major)
Json cone_to_json(const Cone& cone);
std::shared_ptr<const Cone> cone_from_json(const Json& j);
Json norm_to_json(const NormSpec& norm);
NormSpec norm_from_json(const Json& j, const Cone& cone);
Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);
Json semigroup_to_json(const Semigroup& sg);

Json domination_report_to_json(const DominationReport& r);
Json pipeline_report_to_json(const ConvergencePipelineReport& r);
Json run_report_to_json(const RunReport& r, bool include_volatile = true);

/// Parses and validates a scenario config; accumulates every violation into
/// the ConfigError message.
ScenarioConfig load_config(const std::string& path);
ScenarioConfig config_from_json(const Json& j);

/// Names of the builtin scenarios.
std::vector<std::string> builtin_scenarios();
bool is_builtin_scenario(const std::string& name);
/// Builds a builtin scenario; `overrides` may carry parameters (alpha,
/// beta, p, epsilon, ...) and horizon/tol/seed.
ScenarioConfig builtin_scenario(const std::string& name,
                                const Json& overrides = Json::object());

/// Runs every check of the scenario; failing checks are recorded, never
/// thrown.
RunReport run_scenario(const ScenarioConfig& cfg);

void emit_report(const RunReport& report, const std::string& format,
                 const std::string& path);

std::string artifact_version();

}  // namespace oplab

#endif
