#pragma once

// Scenario files. JSON, one object per section; every key is optional and
// falls back to the reference corridor. Unknown keys are rejected.
//
// {
//   "scenario":   { "horizon": 20, "dt": "1/60", "seed": 1, "replications": 1 },
//   "capacities": { "c1": 30, "c2": 30 },
//   "initial":    { "lambda1": 0, "lambda2": 0 },
//   "demand":     { "kind": "constant" | "poisson" | "timeseries",
//                   "q1": 10, "q2": 60, "count_interval": 1,
//                   "samples": [[t, q1, q2], ...] },
//   "behavior":   { "pi_star": 0.5, "alpha_star": 1 },
//   "noise":      { "kind": "none" | "uniform", "half_width": 0.1 },
//   "controller": { "kind": "vot" | "integral" | "selflearning",
//                   "vot":          { "k1": 0.1, "k2": 0.1, "alpha_guess": 1, "pi0": 0.25 },
//                   "integral":     { "k_i": 0.01, "u0": "ln2", "target": 30 },
//                   "selflearning": { "theta0": [0.25, 1, 0.1], "cov0": 0.1,
//                                     "r": 0.09, "q_proc": 1e-6 } },
//   "analysis":   { "tail_window": 5, "approx_lambda1": 1, "approx_zeta": 0.11 }
// }
//
// Numbers may also be written as "a/b" fractions or "ln2".

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "hotlane/errors.hpp"
#include "hotlane/scenario.hpp"

namespace hotlane {

namespace detail {

using nlohmann::json;

class Section {
 public:
  Section(const json& root, std::string path) : path_(std::move(path)) {
    if (root.is_null()) {
      obj_ = json::object();
    } else if (!root.is_object()) {
      throw ConfigError(path_ + ": expected an object");
    } else {
      obj_ = root;
    }
  }

  void allow(std::initializer_list<std::string_view> keys) const {
    for (const auto& [k, _] : obj_.items()) {
      bool ok = false;
      for (auto a : keys) ok = ok || (k == a);
      if (!ok) throw ConfigError(key(k) + ": unknown key");
    }
  }

  bool has(std::string_view k) const { return obj_.contains(std::string(k)); }
  const json& raw(std::string_view k) const { return obj_.at(std::string(k)); }
  std::string key(std::string_view k) const { return path_ + "." + std::string(k); }

  Section sub(std::string_view k) const {
    return Section(has(k) ? raw(k) : json(), key(k));
  }

  double number(std::string_view k, double fallback) const {
    return has(k) ? to_number(raw(k), key(k)) : fallback;
  }

  std::string text(std::string_view k, std::string fallback) const {
    if (!has(k)) return fallback;
    if (!raw(k).is_string()) throw ConfigError(key(k) + ": expected a string");
    return raw(k).get<std::string>();
  }

  static double to_number(const json& v, const std::string& where) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      const auto s = v.get<std::string>();
      if (s == "ln2") return std::log(2.0);
      const auto slash = s.find('/');
      try {
        std::size_t used = 0;
        if (slash == std::string::npos) {
          const double x = std::stod(s, &used);
          if (used == s.size()) return x;
        } else {
          const double a = std::stod(s.substr(0, slash), &used);
          if (used == slash) {
            const auto rest = s.substr(slash + 1);
            const double b = std::stod(rest, &used);
            if (used == rest.size() && b != 0.0) return a / b;
          }
        }
      } catch (const std::exception&) {
      }
    }
    throw ConfigError(where + ": expected a number or \"a/b\" fraction");
  }

 private:
  json obj_;
  std::string path_;
};

inline void require(bool ok, const std::string& where, std::string_view what) {
  if (!ok) throw ConfigError(where + ": " + std::string(what));
}

inline Eigen::Matrix3d to_matrix(const json& v, const std::string& where) {
  if (!v.is_array()) return Section::to_number(v, where) * Eigen::Matrix3d::Identity();
  if (v.size() != 3) throw ConfigError(where + ": expected a scalar or 3x3 array");
  Eigen::Matrix3d m;
  for (int i = 0; i < 3; ++i) {
    if (!v[i].is_array() || v[i].size() != 3)
      throw ConfigError(where + ": expected a scalar or 3x3 array");
    for (int j = 0; j < 3; ++j)
      m(i, j) = Section::to_number(v[i][j], where + "[" + std::to_string(i) + "][" +
                                                std::to_string(j) + "]");
  }
  return m;
}

inline void require_psd(const Eigen::Matrix3d& m, const std::string& where) {
  require((m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12, where, "matrix must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m);
  require(es.eigenvalues().minCoeff() >= -1e-12, where, "matrix must be positive semidefinite");
}

}  // namespace detail

inline ScenarioConfig parse_config_json(const nlohmann::json& root_json) {
  using detail::require;
  using detail::Section;
  ScenarioConfig c;
  const Section root(root_json, "config");
  root.allow({"scenario", "capacities", "initial", "demand", "behavior", "noise", "controller",
              "analysis"});

  const auto sc = root.sub("scenario");
  sc.allow({"horizon", "dt", "seed", "replications"});
  c.horizon = sc.number("horizon", c.horizon);
  c.step.dt = sc.number("dt", c.step.dt);
  require(c.horizon > 0.0, sc.key("horizon"), "must be > 0");
  require(c.step.dt > 0.0, sc.key("dt"), "must be > 0");
  {
    const double n = c.horizon / c.step.dt;
    require(std::abs(n - std::round(n)) <= 1e-9 * std::max(1.0, n), sc.key("dt"),
            "must divide the horizon evenly");
  }
  if (sc.has("seed")) {
    const auto& s = sc.raw("seed");
    require(s.is_number_unsigned() || (s.is_number_integer() && s.get<long long>() >= 0),
            sc.key("seed"), "must be a non-negative integer");
    c.seed = s.get<std::uint64_t>();
  }
  if (sc.has("replications")) {
    const auto& r = sc.raw("replications");
    require(r.is_number_integer() && r.get<long long>() >= 1, sc.key("replications"),
            "must be an integer >= 1");
    c.replications = r.get<int>();
  }

  const auto caps = root.sub("capacities");
  caps.allow({"c1", "c2"});
  c.caps.c1 = caps.number("c1", c.caps.c1);
  c.caps.c2 = caps.number("c2", c.caps.c2);
  require(c.caps.c1 > 0.0, caps.key("c1"), "must be > 0");
  require(c.caps.c2 > 0.0, caps.key("c2"), "must be > 0");

  const auto init = root.sub("initial");
  init.allow({"lambda1", "lambda2"});
  c.initial.lambda1 = init.number("lambda1", c.initial.lambda1);
  c.initial.lambda2 = init.number("lambda2", c.initial.lambda2);
  require(c.initial.lambda1 >= 0.0, init.key("lambda1"), "must be >= 0");
  require(c.initial.lambda2 >= 0.0, init.key("lambda2"), "must be >= 0");

  const auto dem = root.sub("demand");
  dem.allow({"kind", "q1", "q2", "count_interval", "samples"});
  {
    const auto kind = dem.text("kind", "constant");
    if (kind == "constant") c.demand.kind = DemandKind::constant;
    else if (kind == "poisson") c.demand.kind = DemandKind::poisson;
    else if (kind == "timeseries") c.demand.kind = DemandKind::timeseries;
    else throw ConfigError(dem.key("kind") + ": expected constant, poisson or timeseries");
  }
  c.demand.mean_q1 = dem.number("q1", c.demand.mean_q1);
  c.demand.mean_q2 = dem.number("q2", c.demand.mean_q2);
  c.demand.count_interval = dem.number("count_interval", c.demand.count_interval);
  require(c.demand.mean_q1 >= 0.0, dem.key("q1"), "must be >= 0");
  require(c.demand.mean_q2 >= 0.0, dem.key("q2"), "must be >= 0");
  require(c.demand.count_interval > 0.0, dem.key("count_interval"), "must be > 0");
  if (c.demand.kind == DemandKind::timeseries) {
    require(dem.has("samples") && dem.raw("samples").is_array() && !dem.raw("samples").empty(),
            dem.key("samples"), "timeseries demand needs a non-empty array of [t, q1, q2]");
    const auto& arr = dem.raw("samples");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto where = dem.key("samples") + "[" + std::to_string(i) + "]";
      require(arr[i].is_array() && arr[i].size() == 3, where, "expected [t, q1, q2]");
      DemandSample s{Section::to_number(arr[i][0], where), Section::to_number(arr[i][1], where),
                     Section::to_number(arr[i][2], where)};
      require(s.q1 >= 0.0 && s.q2 >= 0.0, where, "rates must be >= 0");
      require(c.demand.samples.empty() || s.t > c.demand.samples.back().t, where,
              "sample times must be strictly increasing");
      c.demand.samples.push_back(s);
    }
    require(c.demand.samples.front().t <= 0.0, dem.key("samples"),
            "first sample must be at or before t = 0");
  }

  const auto beh = root.sub("behavior");
  beh.allow({"pi_star", "alpha_star"});
  c.behavior.pi_star = beh.number("pi_star", c.behavior.pi_star);
  c.behavior.alpha_star = beh.number("alpha_star", c.behavior.alpha_star);
  require(c.behavior.pi_star > 0.0, beh.key("pi_star"), "must be > 0");
  require(c.behavior.alpha_star > 0.0, beh.key("alpha_star"), "must be > 0");

  const auto noise = root.sub("noise");
  noise.allow({"kind", "half_width"});
  {
    const auto kind = noise.text("kind", "none");
    if (kind == "none") c.noise.kind = NoiseKind::none;
    else if (kind == "uniform") c.noise.kind = NoiseKind::uniform;
    else throw ConfigError(noise.key("kind") + ": expected none or uniform");
  }
  c.noise.half_width = noise.number("half_width", c.noise.kind == NoiseKind::uniform ? 0.1 : 0.0);
  require(c.noise.half_width >= 0.0 && c.noise.half_width < 1.0, noise.key("half_width"),
          "must lie in [0, 1)");

  const auto ctl = root.sub("controller");
  ctl.allow({"kind", "vot", "integral", "selflearning"});
  {
    const auto kind = ctl.text("kind", "vot");
    if (kind == "vot") c.controller.kind = ControllerKind::vot;
    else if (kind == "integral") c.controller.kind = ControllerKind::integral;
    else if (kind == "selflearning") c.controller.kind = ControllerKind::selflearning;
    else throw ConfigError(ctl.key("kind") + ": expected vot, integral or selflearning");
  }
  {
    const auto v = ctl.sub("vot");
    v.allow({"k1", "k2", "alpha_guess", "pi0"});
    auto& s = c.controller.vot;
    s.k1 = v.number("k1", s.k1);
    s.k2 = v.number("k2", s.k2);
    s.alpha_guess = v.number("alpha_guess", s.alpha_guess);
    s.pi = v.number("pi0", s.pi);
    require(s.k1 > 0.0, v.key("k1"), "must be > 0");
    require(s.k2 > 0.0, v.key("k2"), "must be > 0");
    require(s.alpha_guess > 0.0, v.key("alpha_guess"), "must be > 0");
  }
  {
    const auto v = ctl.sub("integral");
    v.allow({"k_i", "u0", "target"});
    auto& s = c.controller.integral;
    s.k_i = v.number("k_i", s.k_i);
    s.u = v.number("u0", s.u);
    require(s.k_i > 0.0, v.key("k_i"), "must be > 0");
    if (v.has("target")) {
      s.target_q_hot = v.number("target", c.caps.c1);
      c.controller.integral_target_from_capacity = false;
    } else {
      s.target_q_hot = c.caps.c1;
    }
  }
  {
    const auto v = ctl.sub("selflearning");
    v.allow({"theta0", "cov0", "r", "q_proc"});
    auto& s = c.controller.selflearning;
    if (v.has("theta0")) {
      const auto& th = v.raw("theta0");
      require(th.is_array() && th.size() == 3, v.key("theta0"),
              "expected [alpha1, alpha2, gamma]");
      for (int i = 0; i < 3; ++i) s.theta[i] = Section::to_number(th[i], v.key("theta0"));
    }
    if (v.has("cov0")) s.covariance = detail::to_matrix(v.raw("cov0"), v.key("cov0"));
    if (v.has("q_proc")) s.q_proc = detail::to_matrix(v.raw("q_proc"), v.key("q_proc"));
    s.r = v.number("r", s.r);
    require(s.r > 0.0, v.key("r"), "must be > 0");
    detail::require_psd(s.covariance, v.key("cov0"));
    detail::require_psd(s.q_proc, v.key("q_proc"));
  }

  const auto an = root.sub("analysis");
  an.allow({"tail_window", "approx_lambda1", "approx_zeta"});
  c.analysis.tail_window = an.number("tail_window", c.analysis.tail_window);
  c.analysis.approx_lambda1 = an.number("approx_lambda1", c.analysis.approx_lambda1);
  c.analysis.approx_zeta = an.number("approx_zeta", c.analysis.approx_zeta);
  require(std::isnan(c.analysis.tail_window) || c.analysis.tail_window > 0.0,
          an.key("tail_window"), "must be > 0");
  require(c.analysis.approx_lambda1 >= 0.0, an.key("approx_lambda1"), "must be >= 0");

  // HOVs alone must not fill the HOT lanes (q1 < c1).
  auto check_q1 = [&](double q1, const std::string& where) {
    if (!(q1 < c.caps.c1)) {
      std::ostringstream msg;
      msg << where << ": HOV demand " << q1 << " violates the assumption q1 < c1 (c1="
          << c.caps.c1 << ")";
      throw AssumptionError(msg.str());
    }
  };
  if (c.demand.kind == DemandKind::timeseries) {
    for (std::size_t i = 0; i < c.demand.samples.size(); ++i)
      check_q1(c.demand.samples[i].q1, dem.key("samples") + "[" + std::to_string(i) + "]");
  } else {
    check_q1(c.demand.mean_q1, dem.key("q1"));
  }
  return c;
}

inline ScenarioConfig parse_config_text(std::string_view text) {
  nlohmann::json j;
  bool blank = true;
  for (char ch : text) blank = blank && std::isspace(static_cast<unsigned char>(ch));
  if (!blank) {
    try {
      j = nlohmann::json::parse(text.begin(), text.end(), nullptr, true, /*ignore_comments=*/true);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(std::string("config: malformed JSON: ") + e.what());
    }
  }
  return parse_config_json(j);
}

inline ScenarioConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

/// Resolved configuration, in the same schema parse_config_json accepts.
inline nlohmann::json to_json(const ScenarioConfig& c) {
  using nlohmann::json;
  auto mat = [](const Eigen::Matrix3d& m) {
    json a = json::array();
    for (int i = 0; i < 3; ++i) a.push_back({m(i, 0), m(i, 1), m(i, 2)});
    return a;
  };
  json dem = {{"kind", c.demand.kind == DemandKind::constant  ? "constant"
                       : c.demand.kind == DemandKind::poisson ? "poisson"
                                                              : "timeseries"},
              {"q1", c.demand.mean_q1},
              {"q2", c.demand.mean_q2},
              {"count_interval", c.demand.count_interval}};
  if (c.demand.kind == DemandKind::timeseries) {
    json s = json::array();
    for (const auto& x : c.demand.samples) s.push_back({x.t, x.q1, x.q2});
    dem["samples"] = s;
  }
  json integral = {{"k_i", c.controller.integral.k_i}, {"u0", c.controller.integral.u}};
  if (!c.controller.integral_target_from_capacity)
    integral["target"] = c.controller.integral.target_q_hot;
  json analysis = {{"approx_lambda1", c.analysis.approx_lambda1},
                   {"approx_zeta", c.analysis.approx_zeta}};
  if (!std::isnan(c.analysis.tail_window)) analysis["tail_window"] = c.analysis.tail_window;
  const auto& sl = c.controller.selflearning;
  return {
      {"scenario", {{"horizon", c.horizon}, {"dt", c.step.dt}, {"seed", c.seed},
                    {"replications", c.replications}}},
      {"capacities", {{"c1", c.caps.c1}, {"c2", c.caps.c2}}},
      {"initial", {{"lambda1", c.initial.lambda1}, {"lambda2", c.initial.lambda2}}},
      {"demand", dem},
      {"behavior", {{"pi_star", c.behavior.pi_star}, {"alpha_star", c.behavior.alpha_star}}},
      {"noise", {{"kind", c.noise.kind == NoiseKind::none ? "none" : "uniform"},
                 {"half_width", c.noise.half_width}}},
      {"controller",
       {{"kind", std::string(to_string(c.controller.kind))},
        {"vot", {{"k1", c.controller.vot.k1}, {"k2", c.controller.vot.k2},
                 {"alpha_guess", c.controller.vot.alpha_guess}, {"pi0", c.controller.vot.pi}}},
        {"integral", integral},
        {"selflearning", {{"theta0", {sl.theta[0], sl.theta[1], sl.theta[2]}},
                          {"cov0", mat(sl.covariance)}, {"r", sl.r}, {"q_proc", mat(sl.q_proc)}}}}},
      {"analysis", analysis},
  };
}

}  // namespace hotlane
