#include "bwrisk/report.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <thread>

#include "bwrisk/alpha_maxmin.hpp"
#include "bwrisk/errors.hpp"
#include "bwrisk/robust.hpp"
#include "bwrisk/var_bounds.hpp"
#include "json.hpp"

namespace bwrisk {

using nlohmann::json;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) v = 0.0;  // drop the sign of -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

namespace {

std::vector<double> sample_grid(const MarketScenario& s, double v_upper) {
  const double hi = std::min(s.M(), 4.0 * v_upper > 0 ? 4.0 * v_upper : s.M());
  const int n = std::max(2, s.numerics.curve_points);
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = hi * i / (n - 1);
  return x;
}

void fill_contract(PointRecord& r, const Indemnity& I) {
  r.breakpoints = I.breakpoints();
  r.slopes = I.slopes();
  r.indemnity.clear();
  for (double x : r.x) r.indemnity.push_back(I(x));
}

void run_maxmin(const MarketScenario& s, PointRecord& r) {
  const MaxminSolution sol = solve_maxmin(s);
  r.v_upper = sol.v_upper;
  r.v_lower = sol.v_lower;
  r.d1 = sol.d1;
  r.d2 = sol.d2;
  r.case_label = sol.case_label;
  r.objective = sol.objective;
  r.premium = sol.premium;
  r.x = sample_grid(s, sol.v_upper);
  fill_contract(r, sol.indemnity);
  // Worst-case panel: the flattened distribution that nearly attains V.
  const double q = s.F0.quantile(s.alpha);
  const double gap = sol.v_upper - q;
  LossDistribution w = s.F0;
  if (gap > 1e-9 * s.M()) w = witness_near_worst(s.gen, s.F0, s.alpha, s.epsilon, std::min(1e-3, 0.5 * gap));
  for (double x : r.x) {
    r.survival.push_back(w.survival(x));
    r.net_price.push_back(net_price_H(x, s.theta, s.kappa, s.SQ, sol.v_upper, sol.v_lower));
  }
}

void run_guaranteed(const MarketScenario& s, PointRecord& r) {
  const RobustSolution sol = solve_problem2(s);
  r.v_upper = sol.v_upper;
  r.v_lower = best_case_var(s.gen, s.F0, s.alpha, s.epsilon, s.numerics.tol * s.M());
  r.lambda_star = sol.lambda_star;
  r.beta_star = sol.beta_star;
  r.b_star = sol.b_star;
  r.eta_tilde = sol.eta_tilde;
  r.slack = sol.slack;
  r.kkt_residual = sol.kkt_residual;
  r.objective = sol.objective;
  r.premium = sol.premium;
  r.diagnostics = sol.diagnostics;
  r.x = sample_grid(s, sol.v_upper);
  fill_contract(r, sol.indemnity);
  for (double x : r.x) {
    r.survival.push_back(sol.worst_survival(x));
    r.net_price.push_back(net_price(x, sol.worst_survival, sol.lambda_star, s, sol.v_upper));
  }
}

template <class E>
[[noreturn]] void rethrow_labeled(const E& e, const std::string& label);

template <>
[[noreturn]] void rethrow_labeled(const NumericalError& e, const std::string& label) {
  throw NumericalError("sweep point " + label + ": " + e.what(), e.partial_estimate());
}
template <>
[[noreturn]] void rethrow_labeled(const InfeasibleError& e, const std::string& label) {
  throw InfeasibleError("sweep point " + label + ": " + e.what(), e.best_value());
}
template <>
[[noreturn]] void rethrow_labeled(const UnsupportedRegime& e, const std::string& label) {
  throw UnsupportedRegime("sweep point " + label + ": " + e.what());
}
template <>
[[noreturn]] void rethrow_labeled(const DomainError& e, const std::string& label) {
  throw DomainError("sweep point " + label + ": " + e.what());
}

}  // namespace

PointRecord run_point(const ScenarioConfig& cfg, const SweepPoint& p) {
  PointRecord r;
  r.label = p.label.empty() ? "base" : p.label;
  r.parameter = p.parameter;
  r.value = p.value;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const ScenarioConfig c = apply_point(cfg, p);
    const MarketScenario s = build_scenario(c);
    if (c.model == ModelKind::alpha_maxmin)
      run_maxmin(s, r);
    else
      run_guaranteed(s, r);
  } catch (const NumericalError& e) {
    rethrow_labeled(e, r.label);
  } catch (const InfeasibleError& e) {
    rethrow_labeled(e, r.label);
  } catch (const UnsupportedRegime& e) {
    rethrow_labeled(e, r.label);
  } catch (const DomainError& e) {
    rethrow_labeled(e, r.label);
  }
  r.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

Report run_scenario(const ScenarioConfig& cfg, int threads) {
  Report rep;
  rep.name = cfg.name;
  rep.model = cfg.model;
  rep.format = cfg.format;
  std::vector<SweepPoint> pts = sweep_points(cfg);
  if (cfg.sweep.empty()) pts.push_back({"", 0.0, "base"});
  rep.points.resize(pts.size());
  std::vector<std::exception_ptr> errors(pts.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < pts.size(); i = next++) {
      try {
        rep.points[i] = run_point(cfg, pts[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n = std::clamp(threads, 1, static_cast<int>(std::max<std::size_t>(1, pts.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  // Report the first failure in declaration order.
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rep;
}

namespace {

json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  return json::parse(format_number(v));
}

json num_array(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

void write_file(const std::filesystem::path& p, const std::string& content,
                std::vector<std::string>& written) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + p.string());
  written.push_back(p.string());
}

std::string table(const std::vector<double>& x, const std::vector<double>& y, const char* col,
                  OutputFormat fmt) {
  std::string s;
  if (fmt == OutputFormat::csv) {
    s = std::string("x,") + col + "\n";
    for (std::size_t i = 0; i < x.size(); ++i) s += format_number(x[i]) + "," + format_number(y[i]) + "\n";
    return s;
  }
  json j;
  j["columns"] = {"x", col};
  j["x"] = num_array(x);
  j[col] = num_array(y);
  return j.dump(1) + "\n";
}

}  // namespace

std::vector<std::string> emit_plot_data(const Report& report, const std::string& directory) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) throw std::runtime_error("cannot create " + directory + ": " + ec.message());
  std::vector<std::string> written;
  const std::string ext = report.format == OutputFormat::csv ? ".csv" : ".json";
  json summary;
  summary["name"] = report.name;
  summary["model"] = to_string(report.model);
  summary["points"] = json::array();
  for (const PointRecord& r : report.points) {
    const fs::path dir(directory);
    write_file(dir / ("indemnity_" + r.label + ext), table(r.x, r.indemnity, "I", report.format), written);
    write_file(dir / ("worst_survival_" + r.label + ext), table(r.x, r.survival, "S", report.format), written);
    write_file(dir / ("net_price_" + r.label + ext), table(r.x, r.net_price, "H", report.format), written);
    json p;
    p["label"] = r.label;
    p["parameter"] = r.parameter;
    p["value"] = num(r.value);
    p["v_upper"] = num(r.v_upper);
    p["v_lower"] = num(r.v_lower);
    p["d1"] = num(r.d1);
    p["d2"] = num(r.d2);
    p["case"] = r.case_label;
    p["lambda_star"] = num(r.lambda_star);
    p["beta_star"] = num(r.beta_star);
    p["b_star"] = num(r.b_star);
    p["eta_tilde"] = num(r.eta_tilde);
    p["slack"] = num(r.slack);
    p["kkt_residual"] = num(r.kkt_residual);
    p["objective"] = num(r.objective);
    p["premium"] = num(r.premium);
    p["breakpoints"] = num_array(r.breakpoints);
    p["slopes"] = num_array(r.slopes);
    p["runtime_seconds"] = num(r.runtime_seconds);
    p["diagnostics"] = r.diagnostics;
    summary["points"].push_back(p);
  }
  write_file(fs::path(directory) / "summary.json", summary.dump(2) + "\n", written);
  return written;
}

}  // namespace bwrisk
