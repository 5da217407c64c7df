#pragma once

#include <string>
#include <vector>

#include "bwrisk/scenario.hpp"

namespace bwrisk {

enum class ModelKind { alpha_maxmin, guaranteed_var };
enum class OutputFormat { csv, json };

struct DistributionSpec {
  std::string type;  // truncated_exponential | uniform | tabulated
  double mean = 1.0;
  double support_max = 1.0;
  std::vector<std::pair<double, double>> knots;
  std::string path;
};

struct GeneratorSpec {
  std::string type;        // quadratic | piecewise_quadratic | xlogx_shift
  bool q_is_alpha = true;  // q given as the token "q_alpha"
  double q = 0.0;
  double k = 1.0;
  double a = 1.0;
};

struct DistortionSpec {
  std::string type = "tvar";  // tvar | power
  double level = -1.0;        // tvar level (defaults to alpha) or power exponent
};

struct SweepSpec {
  std::string parameter;
  std::vector<double> values;
};

struct ScenarioConfig {
  std::string name;
  ModelKind model = ModelKind::alpha_maxmin;
  DistributionSpec benchmark;
  bool insurer_same = true;
  DistributionSpec insurer;
  GeneratorSpec generator;
  DistortionSpec distortion;
  double alpha = 0.0;
  double theta = 0.0;
  double kappa = 1.0;
  double epsilon = 0.0;
  double A = std::numeric_limits<double>::quiet_NaN();
  double eta = 1.0;
  std::vector<SweepSpec> sweep;
  NumericsOptions numerics{};
  std::string output_dir = "out";
  OutputFormat format = OutputFormat::csv;
  std::string base_dir;  // relative paths in the config resolve against this
};

// One point of the sweep; an empty parameter means the base scenario.
struct SweepPoint {
  std::string parameter;
  double value = 0.0;
  std::string label;
};

// Parses and range-checks a config document. Throws ValidationError listing
// every offending field.
ScenarioConfig validate_config(const std::string& text, const std::string& base_dir = ".");
ScenarioConfig load_config(const std::string& path);

std::vector<SweepPoint> sweep_points(const ScenarioConfig& cfg);
ScenarioConfig apply_point(const ScenarioConfig& cfg, const SweepPoint& p);
MarketScenario build_scenario(const ScenarioConfig& cfg);

std::string to_string(ModelKind m);

}  // namespace bwrisk
