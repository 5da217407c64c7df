#pragma once

#include <string>
#include <vector>

#include "bwrisk/config.hpp"

namespace bwrisk {

struct PointRecord {
  std::string label;
  std::string parameter;
  double value = 0.0;

  double v_upper = 0.0;
  double v_lower = 0.0;
  double d1 = std::numeric_limits<double>::quiet_NaN();
  double d2 = std::numeric_limits<double>::quiet_NaN();
  std::string case_label;

  double lambda_star = std::numeric_limits<double>::quiet_NaN();
  double beta_star = std::numeric_limits<double>::quiet_NaN();
  double b_star = std::numeric_limits<double>::quiet_NaN();
  double eta_tilde = std::numeric_limits<double>::quiet_NaN();
  double slack = std::numeric_limits<double>::quiet_NaN();
  double kkt_residual = std::numeric_limits<double>::quiet_NaN();

  std::vector<double> breakpoints, slopes;
  std::vector<double> x, indemnity, survival, net_price;

  double objective = 0.0;
  double premium = 0.0;
  double runtime_seconds = 0.0;
  std::vector<std::string> diagnostics;
};

struct Report {
  std::string name;
  ModelKind model = ModelKind::alpha_maxmin;
  OutputFormat format = OutputFormat::csv;
  std::vector<PointRecord> points;
};

PointRecord run_point(const ScenarioConfig& cfg, const SweepPoint& p);

// Runs every sweep point (the base scenario when no sweep is given). Points
// may be solved concurrently; records come back in declaration order. Solver
// errors are rethrown with the sweep label prefixed.
Report run_scenario(const ScenarioConfig& cfg, int threads = 1);

// Writes indemnity_/worst_survival_/net_price_<label> files per point and
// summary.json. Returns the paths written.
std::vector<std::string> emit_plot_data(const Report& report, const std::string& directory);

// Fixed 12-significant-digit rendering used in every output file.
std::string format_number(double v);

}  // namespace bwrisk
