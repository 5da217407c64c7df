#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "bwrisk/errors.hpp"
#include "bwrisk/report.hpp"

using namespace bwrisk;
namespace fs = std::filesystem;

namespace {

const char* kMaxminLayer = R"({
  "name": "maxmin_layer",
  "model": "alpha_maxmin",
  "benchmark": {"type": "truncated_exponential", "mean": 1, "support_max": 100},
  "insurer_survival": "same_as_benchmark",
  "generator": {"type": "piecewise_quadratic", "q": "q_alpha", "k": 1},
  "alpha": 0.95, "theta": 0.5, "kappa": 0.9, "epsilon": 0.5,
  "sweep": [{"parameter": "k", "values": [1, 2]}],
  "numerics": {"tol": 1e-8, "grid": 2000, "curve_points": 200}
})";

std::string with(const std::string& base, const std::string& from, const std::string& to) {
  std::string s = base;
  s.replace(s.find(from), from.size(), to);
  return s;
}

std::vector<std::string> errors_of(const std::string& text) {
  try {
    validate_config(text);
  } catch (const ValidationError& e) {
    return e.items();
  }
  return {};
}

bool mentions(const std::vector<std::string>& items, const std::string& field) {
  for (const auto& s : items)
    if (s.find(field) != std::string::npos) return true;
  return false;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("bwrisk_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("config validation") {
  const ScenarioConfig c = validate_config(kMaxminLayer);
  CHECK(c.model == ModelKind::alpha_maxmin);
  CHECK(c.alpha == 0.95);
  CHECK(c.kappa == 0.9);
  CHECK(c.generator.type == "piecewise_quadratic");
  CHECK(c.generator.q_is_alpha);
  REQUIRE(c.sweep.size() == 1);
  CHECK(sweep_points(c).size() == 2);

  const auto bad_alpha = errors_of(with(kMaxminLayer, "\"alpha\": 0.95", "\"alpha\": 1.2"));
  CHECK(mentions(bad_alpha, "alpha"));

  const auto no_a = errors_of(with(kMaxminLayer, "\"alpha_maxmin\"", "\"guaranteed_var\""));
  CHECK(mentions(no_a, "A"));

  // Every offending field is listed, not only the first.
  const auto two = errors_of(with(with(kMaxminLayer, "\"alpha\": 0.95", "\"alpha\": 1.2"), "\"epsilon\": 0.5",
                                  "\"epsilon\": -1"));
  CHECK(mentions(two, "alpha"));
  CHECK(mentions(two, "epsilon"));

  CHECK_FALSE(errors_of("{ not json").empty());
  CHECK(mentions(errors_of(with(kMaxminLayer, "\"k\", \"values\"", "\"zeta\", \"values\"")), "sweep"));
}

TEST_CASE("shipped configs validate") {
  for (const char* f : {"maxmin_layer.json", "guaranteed_var.json"}) {
    const ScenarioConfig c = load_config(std::string(BWRISK_SOURCE_DIR) + "/configs/" + f);
    CHECK_FALSE(c.sweep.empty());
  }
}

TEST_CASE("scenario run and plot data") {
  const ScenarioConfig c = validate_config(kMaxminLayer);
  const Report rep = run_scenario(c, 2);
  REQUIRE(rep.points.size() == 2);
  CHECK(rep.points[0].label == "k_1");
  CHECK(rep.points[1].label == "k_2");
  for (const auto& p : rep.points) {
    CHECK(p.case_label.rfind("d1 <= d2 < V_lower", 0) == 0);
    CHECK(p.x.size() == 200);
    CHECK(p.indemnity.size() == p.x.size());
    CHECK(p.survival.size() == p.x.size());
    CHECK(p.net_price.size() == p.x.size());
  }
  // A larger k tightens the ball and lowers the worst-case VaR.
  CHECK(rep.points[1].v_upper < rep.points[0].v_upper);

  const fs::path dir = fresh_dir("emit");
  const auto files = emit_plot_data(rep, dir.string());
  CHECK(files.size() == 7);
  for (const auto& f : files) CHECK(fs::exists(f));
  std::ifstream in(dir / "indemnity_k_1.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "x,I");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 200);

  // Same inputs give the same bytes.
  const fs::path dir2 = fresh_dir("emit2");
  Report again = run_scenario(c, 1);
  for (std::size_t i = 0; i < again.points.size(); ++i) again.points[i].runtime_seconds = rep.points[i].runtime_seconds;
  emit_plot_data(again, dir2.string());
  for (const char* f : {"indemnity_k_1.csv", "worst_survival_k_2.csv", "summary.json"}) {
    std::ifstream a(dir / f), b(dir2 / f);
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    CHECK(sa.str() == sb.str());
  }
  fs::remove_all(dir);
  fs::remove_all(dir2);
}

TEST_CASE("sweep with no values writes the summary only") {
  ScenarioConfig c = validate_config(with(kMaxminLayer, "[1, 2]", "[]"));
  const Report rep = run_scenario(c);
  CHECK(rep.points.empty());
  const fs::path dir = fresh_dir("empty");
  const auto files = emit_plot_data(rep, dir.string());
  REQUIRE(files.size() == 1);
  CHECK(fs::path(files[0]).filename() == "summary.json");
  fs::remove_all(dir);

  ScenarioConfig base = validate_config(with(kMaxminLayer, "[{\"parameter\": \"k\", \"values\": [1, 2]}]", "[]"));
  CHECK(run_scenario(base).points.size() == 1);
}

TEST_CASE("number formatting") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(1e-20) == "1e-20");
  CHECK(format_number(123456789012345.0) == "1.23456789012e+14");
}
