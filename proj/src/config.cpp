#include "bwrisk/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bwrisk/errors.hpp"
#include "json.hpp"

namespace bwrisk {

using nlohmann::json;

std::string to_string(ModelKind m) {
  return m == ModelKind::alpha_maxmin ? "alpha_maxmin" : "guaranteed_var";
}

namespace {

const std::vector<std::string> kSweepable{"alpha", "theta", "kappa", "epsilon", "A",
                                          "eta",   "k",     "a",     "q"};

struct Collector {
  std::vector<std::string> items;
  void add(const std::string& field, const std::string& msg) { items.push_back(field + ": " + msg); }
};

bool read_number(const json& j, const std::string& key, double& out, Collector& c,
                 const std::string& prefix, bool required) {
  if (!j.contains(key)) {
    if (required) c.add(prefix + key, "missing required field");
    return false;
  }
  if (!j[key].is_number()) {
    c.add(prefix + key, "must be a number");
    return false;
  }
  out = j[key].get<double>();
  if (!std::isfinite(out)) {
    c.add(prefix + key, "must be finite");
    return false;
  }
  return true;
}

DistributionSpec parse_distribution(const json& j, const std::string& field, Collector& c) {
  DistributionSpec d;
  if (!j.is_object()) {
    c.add(field, "must be an object with a \"type\"");
    return d;
  }
  d.type = j.value("type", "");
  const std::string p = field + ".";
  if (d.type == "truncated_exponential") {
    read_number(j, "mean", d.mean, c, p, true);
    read_number(j, "support_max", d.support_max, c, p, true);
    if (!(d.mean > 0)) c.add(p + "mean", "must be positive");
    if (!(d.support_max > 0)) c.add(p + "support_max", "must be positive");
  } else if (d.type == "uniform") {
    read_number(j, "upper", d.support_max, c, p, true);
    if (!(d.support_max > 0)) c.add(p + "upper", "must be positive");
  } else if (d.type == "tabulated") {
    if (j.contains("path") && j["path"].is_string()) {
      d.path = j["path"].get<std::string>();
    } else if (j.contains("knots") && j["knots"].is_array()) {
      for (const auto& k : j["knots"]) {
        if (!k.is_array() || k.size() != 2 || !k[0].is_number() || !k[1].is_number()) {
          c.add(p + "knots", "each knot must be a pair [x, F(x)]");
          break;
        }
        d.knots.emplace_back(k[0].get<double>(), k[1].get<double>());
      }
      if (d.knots.size() < 2) c.add(p + "knots", "need at least two knots");
    } else {
      c.add(field, "tabulated needs \"knots\" or \"path\"");
    }
  } else {
    c.add(p + "type", "unknown distribution type \"" + d.type + "\"");
  }
  return d;
}

GeneratorSpec parse_generator(const json& j, Collector& c) {
  GeneratorSpec g;
  if (j.is_string()) {
    g.type = j.get<std::string>();
  } else if (j.is_object()) {
    g.type = j.value("type", "");
  } else {
    c.add("generator", "must be a string or an object");
    return g;
  }
  if (g.type == "x^2") g.type = "quadratic";
  if (g.type == "(x+1)ln(x+1)") g.type = "xlogx_shift";
  if (g.type == "quadratic") return g;
  if (g.type == "piecewise_quadratic") {
    if (!j.is_object()) {
      c.add("generator", "piecewise_quadratic needs k");
      return g;
    }
    if (j.contains("q") && j["q"].is_string()) {
      if (j["q"].get<std::string>() != "q_alpha") c.add("generator.q", "must be a number or \"q_alpha\"");
    } else if (j.contains("q")) {
      g.q_is_alpha = false;
      read_number(j, "q", g.q, c, "generator.", true);
    }
    read_number(j, "k", g.k, c, "generator.", true);
    if (!(g.k > 0)) c.add("generator.k", "must be positive");
    return g;
  }
  if (g.type == "xlogx_shift") {
    if (j.is_object()) read_number(j, "a", g.a, c, "generator.", false);
    if (!(g.a > 0)) c.add("generator.a", "must be positive");
    return g;
  }
  c.add("generator.type", "unknown generator \"" + g.type + "\"");
  return g;
}

void check_ranges(const ScenarioConfig& s, Collector& c) {
  if (!(s.alpha > 0 && s.alpha < 1)) c.add("alpha", "must lie in (0,1)");
  if (!(s.theta > 0)) c.add("theta", "must be positive");
  if (!(s.kappa >= 0 && s.kappa <= 1)) c.add("kappa", "must lie in [0,1]");
  if (!(s.epsilon > 0)) c.add("epsilon", "must be positive");
  if (!(s.eta >= 0 && s.eta <= 1)) c.add("eta", "must lie in [0,1]");
  if (s.model == ModelKind::guaranteed_var && !(std::isfinite(s.A) && s.A > 0))
    c.add("A", "must be a positive number");
  if (s.generator.type == "piecewise_quadratic" && !(s.generator.k > 0))
    c.add("generator.k", "must be positive");
}

}  // namespace

ScenarioConfig validate_config(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ValidationError({std::string("config: not valid JSON (") + e.what() + ")"});
  }
  if (!j.is_object()) throw ValidationError({"config: top level must be an object"});
  Collector c;
  ScenarioConfig s;
  s.base_dir = base_dir;
  s.name = j.value("name", "scenario");

  const std::string model = j.value("model", "");
  if (model == "alpha_maxmin")
    s.model = ModelKind::alpha_maxmin;
  else if (model == "guaranteed_var")
    s.model = ModelKind::guaranteed_var;
  else
    c.add("model", model.empty() ? "missing required field" : "must be alpha_maxmin or guaranteed_var");

  if (j.contains("benchmark"))
    s.benchmark = parse_distribution(j["benchmark"], "benchmark", c);
  else
    c.add("benchmark", "missing required field");

  if (j.contains("insurer_survival") && !(j["insurer_survival"].is_string() &&
                                          j["insurer_survival"] == "same_as_benchmark")) {
    s.insurer_same = false;
    s.insurer = parse_distribution(j["insurer_survival"], "insurer_survival", c);
  }

  if (j.contains("generator"))
    s.generator = parse_generator(j["generator"], c);
  else
    c.add("generator", "missing required field");

  if (j.contains("distortion")) {
    const json& d = j["distortion"];
    if (d.is_string()) {
      s.distortion.type = d.get<std::string>();
    } else if (d.is_object()) {
      s.distortion.type = d.value("type", "tvar");
      read_number(d, "level", s.distortion.level, c, "distortion.", false);
    } else {
      c.add("distortion", "must be a string or an object");
    }
    if (s.distortion.type != "tvar" && s.distortion.type != "power")
      c.add("distortion.type", "must be tvar or power");
    if (s.distortion.type == "power" && !(s.distortion.level > 0 && s.distortion.level <= 1))
      c.add("distortion.level", "power exponent must lie in (0,1]");
    if (s.distortion.type == "tvar" && s.distortion.level != -1.0 &&
        !(s.distortion.level > 0 && s.distortion.level < 1))
      c.add("distortion.level", "tvar level must lie in (0,1)");
  }

  read_number(j, "alpha", s.alpha, c, "", true);
  read_number(j, "theta", s.theta, c, "", true);
  read_number(j, "kappa", s.kappa, c, "", s.model == ModelKind::alpha_maxmin);
  read_number(j, "epsilon", s.epsilon, c, "", true);
  read_number(j, "eta", s.eta, c, "", false);
  const bool has_a = read_number(j, "A", s.A, c, "", false);
  if (s.model == ModelKind::guaranteed_var && !has_a && !j.contains("A"))
    c.add("A", "required when model is guaranteed_var");

  if (j.contains("sweep")) {
    const json& sw = j["sweep"];
    std::vector<json> entries;
    if (sw.is_object())
      entries.push_back(sw);
    else if (sw.is_array())
      entries.assign(sw.begin(), sw.end());
    else
      c.add("sweep", "must be an object or a list of objects");
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const std::string f = "sweep[" + std::to_string(i) + "]";
      SweepSpec sp;
      sp.parameter = entries[i].value("parameter", "");
      if (std::find(kSweepable.begin(), kSweepable.end(), sp.parameter) == kSweepable.end())
        c.add(f + ".parameter", "unknown sweep parameter \"" + sp.parameter + "\"");
      if (!entries[i].contains("values") || !entries[i]["values"].is_array()) {
        c.add(f + ".values", "must be a list of numbers");
      } else {
        for (const auto& v : entries[i]["values"]) {
          if (!v.is_number()) {
            c.add(f + ".values", "must be a list of numbers");
            break;
          }
          sp.values.push_back(v.get<double>());
        }
      }
      s.sweep.push_back(sp);
    }
  }

  if (j.contains("numerics")) {
    const json& n = j["numerics"];
    if (!n.is_object()) {
      c.add("numerics", "must be an object");
    } else {
      read_number(n, "tol", s.numerics.tol, c, "numerics.", false);
      double v = 0;
      if (read_number(n, "grid", v, c, "numerics.", false)) s.numerics.grid = static_cast<int>(v);
      if (read_number(n, "curve_points", v, c, "numerics.", false))
        s.numerics.curve_points = static_cast<int>(v);
      if (read_number(n, "table_size", v, c, "numerics.", false))
        s.numerics.table_size = static_cast<int>(v);
      if (!(s.numerics.tol > 0 && s.numerics.tol < 1e-2)) c.add("numerics.tol", "must lie in (0, 0.01)");
      if (s.numerics.grid < 10) c.add("numerics.grid", "must be at least 10");
      if (s.numerics.curve_points < 2) c.add("numerics.curve_points", "must be at least 2");
      if (s.numerics.table_size < 16) c.add("numerics.table_size", "must be at least 16");
    }
  }

  if (j.contains("output")) {
    const json& o = j["output"];
    if (!o.is_object()) {
      c.add("output", "must be an object");
    } else {
      s.output_dir = o.value("directory", s.output_dir);
      const std::string fmt = o.value("format", "csv");
      if (fmt == "csv")
        s.format = OutputFormat::csv;
      else if (fmt == "json")
        s.format = OutputFormat::json;
      else
        c.add("output.format", "must be csv or json");
    }
  }

  check_ranges(s, c);
  // Every sweep value must also pass the range checks.
  for (const auto& sp : s.sweep) {
    if (std::find(kSweepable.begin(), kSweepable.end(), sp.parameter) == kSweepable.end()) continue;
    for (double v : sp.values) {
      Collector sub;
      check_ranges(apply_point(s, {sp.parameter, v, ""}), sub);
      for (const auto& item : sub.items)
        c.add("sweep " + sp.parameter + "=" + std::to_string(v), item);
    }
  }
  if (!c.items.empty()) throw ValidationError(c.items);
  return s;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError({"config: cannot open " + path});
  std::stringstream ss;
  ss << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return validate_config(ss.str(), dir.empty() ? "." : dir.string());
}

std::vector<SweepPoint> sweep_points(const ScenarioConfig& cfg) {
  std::vector<SweepPoint> out;
  for (const auto& sp : cfg.sweep)
    for (double v : sp.values) {
      std::ostringstream os;
      os << sp.parameter << "_" << v;
      out.push_back({sp.parameter, v, os.str()});
    }
  return out;
}

ScenarioConfig apply_point(const ScenarioConfig& cfg, const SweepPoint& p) {
  ScenarioConfig s = cfg;
  const std::string& n = p.parameter;
  if (n.empty()) return s;
  if (n == "alpha") s.alpha = p.value;
  else if (n == "theta") s.theta = p.value;
  else if (n == "kappa") s.kappa = p.value;
  else if (n == "epsilon") s.epsilon = p.value;
  else if (n == "A") s.A = p.value;
  else if (n == "eta") s.eta = p.value;
  else if (n == "k") s.generator.k = p.value;
  else if (n == "a") s.generator.a = p.value;
  else if (n == "q") {
    s.generator.q_is_alpha = false;
    s.generator.q = p.value;
  } else {
    throw DomainError("unknown sweep parameter " + n);
  }
  return s;
}

namespace {

LossDistribution build_distribution(const DistributionSpec& d, const std::string& base_dir) {
  if (d.type == "truncated_exponential") return LossDistribution::truncated_exponential(d.mean, d.support_max);
  if (d.type == "uniform") return LossDistribution::uniform(d.support_max);
  if (!d.path.empty()) {
    std::filesystem::path p(d.path);
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    return load_tabulated(p.string());
  }
  return LossDistribution::tabulated(d.knots);
}

}  // namespace

MarketScenario build_scenario(const ScenarioConfig& cfg) {
  MarketScenario s;
  s.theta = cfg.theta;
  s.alpha = cfg.alpha;
  s.kappa = cfg.kappa;
  s.epsilon = cfg.epsilon;
  s.A = cfg.A;
  s.eta = cfg.eta;
  s.numerics = cfg.numerics;
  s.F0 = build_distribution(cfg.benchmark, cfg.base_dir);
  s.SQ = cfg.insurer_same ? s.F0 : build_distribution(cfg.insurer, cfg.base_dir);
  const double M = s.F0.support_max();
  if (s.SQ.support_max() > M + 1e-12)
    throw DomainError("insurer distribution extends beyond the benchmark support");
  const auto& g = cfg.generator;
  if (g.type == "quadratic")
    s.gen = make_quadratic_generator(M);
  else if (g.type == "piecewise_quadratic")
    s.gen = make_piecewise_quadratic_generator(g.q_is_alpha ? s.F0.quantile(cfg.alpha) : g.q, g.k, M);
  else
    s.gen = make_xlogx_shift_generator(g.a, M);
  if (cfg.distortion.type == "power")
    s.g = make_power_distortion(cfg.distortion.level);
  else
    s.g = make_tvar_distortion(cfg.distortion.level > 0 ? cfg.distortion.level : cfg.alpha);
  return s;
}

}  // namespace bwrisk
