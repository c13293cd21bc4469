#ifndef SHIPA_CLI_HPP
#define SHIPA_CLI_HPP

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "shipa/optimizer.hpp"

namespace shipa {

struct FdConfig {
  enum class Mode { crn, independent };
  double h = 1e-5;
  Mode mode = Mode::crn;
  std::size_t replications = 100;
  /// Relative error allowed on replications whose event sequence survives.
  double tolerance = 1e-3;
  /// Share of replications that must keep their event sequence.
  double min_unchanged = 0.8;

  bool operator==(const FdConfig&) const = default;
};

struct OptimizerConfig {
  std::vector<std::pair<std::string, double>> weights;
  std::size_t iterations = 200;
  std::size_t replications = 10;
  StepRule::Kind step_kind = StepRule::Kind::harmonic;
  double step_c = 0.1;
  std::vector<double> lower;
  std::vector<double> upper;
  double grad_tol = 0.0;

  bool operator==(const OptimizerConfig&) const = default;
};

struct ScenarioConfig {
  std::string model;
  /// Every model parameter, defaults filled in.
  nlohmann::json model_params;
  std::vector<double> theta;
  double horizon = 0.0;
  std::uint64_t seed = 0;
  IntegratorConfig integrator;
  std::map<std::string, std::string> outputs;
  Normalization normalization = Normalization::raw;
  FdConfig fd;
  OptimizerConfig optimizer;

  bool operator==(const ScenarioConfig&) const = default;
};

/// Strict parse: unknown keys and out-of-range values throw ConfigError.
ScenarioConfig parse_config(const nlohmann::json& doc);
nlohmann::json to_json(const ScenarioConfig& config);

AutomatonModel build_model(const std::string& name, const nlohmann::json& params,
                           const std::vector<double>& theta);

/// Catalog names accepted in the `model` field.
std::vector<std::string> catalog_names();

int cmd_simulate(const ScenarioConfig& config, const std::string& out_dir, std::ostream& out);
int cmd_ipa(const ScenarioConfig& config, const std::string& out_dir, std::ostream& out);
int cmd_validate(const ScenarioConfig& config, const std::string& out_dir, std::ostream& out);
int cmd_optimize(const ScenarioConfig& config, const std::string& out_dir, std::ostream& out);
int cmd_classify(const ScenarioConfig& config, std::ostream& out);

/// Full command line. Exit codes: 0 success, 2 configuration error,
/// 3 model or assumption violation, 4 numerical failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace shipa

#endif  // SHIPA_CLI_HPP
