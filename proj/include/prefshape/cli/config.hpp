#pragma once

// JSON experiment configs. One config describes either a set of single-
// recommender runs (policies x dynamics) or one competing-recommenders run.
// Parsing resolves every default and records which ones were applied.

#include <charconv>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "prefshape/analysis.hpp"
#include "prefshape/simulation.hpp"

namespace prefshape::cli {

using Json = nlohmann::ordered_json;

struct Run {
  std::string label;
  SimConfig config;
};

struct Experiment {
  std::string name = "run";
  std::vector<Run> runs;
  std::optional<CompetingConfig> competing;
  std::vector<std::string> defaults_applied;
  std::vector<std::string> notes;

  bool is_competing() const { return competing.has_value(); }
};

// ---------------------------------------------------------------------------
// Formatting

/// Shortest decimal string that reads back to the same double.
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::string dynamics_name(Dynamics d) { return std::string(to_string(d)); }

/// Textual policy form accepted by the parser.
inline Json policy_to_json(const PolicySpec& spec) {
  struct Visitor {
    Json operator()(const policy::Fixed& f) const {
      return "fixed:" + format_double(f.params.p) + "," + format_double(f.params.q);
    }
    Json operator()(const policy::OptimalKnownB&) const { return "optimal"; }
    Json operator()(const policy::Etc&) const { return "etc"; }
    Json operator()(const policy::Thompson&) const { return "ts"; }
    Json operator()(const policy::NArmMatrix& m) const {
      Json rows = Json::array();
      for (Index i = 0; i < m.probs.arms(); ++i) {
        Json row = Json::array();
        for (double x : m.probs.row(i)) row.push_back(x);
        rows.push_back(row);
      }
      return Json{{"matrix", rows}};
    }
    Json operator()(const policy::NArmOptimal&) const { return "narm-optimal"; }
    Json operator()(const policy::NArmThompson&) const { return "narm-ts"; }
  };
  return std::visit(Visitor{}, spec);
}

inline Json matrix_to_json(const RewardMatrix& b) {
  Json rows = Json::array();
  for (Index i = 0; i < b.arms(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < b.arms(); ++j) row.push_back(b(i, j));
    rows.push_back(row);
  }
  return rows;
}

/// Fully resolved form of a single run; parsing it gives back the same run.
inline Json to_json(const SimConfig& c) {
  Json j;
  j["dynamics"] = dynamics_name(c.dynamics);
  j["B"] = matrix_to_json(c.reward);
  j["policy"] = policy_to_json(c.policy);
  if (const auto* e = std::get_if<policy::Etc>(&c.policy)) {
    j["etc_m"] = e->m;
    j["etc_estimator"] = std::string(to_string(e->estimator));
  }
  j["horizon"] = c.horizon;
  j["initial_counts"] = c.initial_counts;
  j["replications"] = c.replications;
  j["base_seed"] = c.base_seed;
  return j;
}

inline Json to_json(const CompetingConfig& c) {
  Json j;
  j["dynamics"] = dynamics_name(c.dynamics);
  j["B"] = matrix_to_json(c.reward);
  j["horizon"] = c.horizon;
  j["initial_counts"] = c.initial_counts;
  j["replications"] = c.replications;
  j["base_seed"] = c.base_seed;
  const auto& pop = c.initial_popularity;
  j["competing"] = {
      {"policy1", policy_to_json(policy::Fixed{c.policy1})},
      {"policy2", policy_to_json(policy::Fixed{c.policy2})},
      {"initial_popularity", Json::array({Json::array({pop(0, 0), pop(0, 1)}), Json::array({pop(1, 0), pop(1, 1)})})},
  };
  return j;
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

inline std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

inline void reject_unknown_keys(const Json& j, const std::set<std::string>& allowed, const std::string& prefix) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) throw ConfigError("unknown key '" + prefix + key + "'");
  }
}

inline std::uint64_t read_uint(const Json& v, const std::string& path, std::uint64_t min_value) {
  const std::string message = path + ": expected an integer >= " + std::to_string(min_value);
  if (!v.is_number_integer()) throw ConfigError(message);
  if (!v.is_number_unsigned() && v.get<std::int64_t>() < 0) throw ConfigError(message);
  const auto x = v.get<std::uint64_t>();
  if (x < min_value) throw ConfigError(message);
  return x;
}

inline double read_number(const Json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path + ": expected a number");
  return v.get<double>();
}

inline RewardMatrix read_matrix(const Json& v) {
  if (!v.is_array() || v.empty()) throw ConfigError("B: expected a square array of rows");
  const std::size_t n = v.size();
  std::vector<double> entries;
  for (Index i = 0; i < n; ++i) {
    const std::string row_path = "B[" + std::to_string(i) + "]";
    if (!v[i].is_array() || v[i].size() != n) {
      throw ConfigError(row_path + ": expected " + std::to_string(n) + " entries");
    }
    for (Index k = 0; k < n; ++k) {
      const std::string cell = row_path + "[" + std::to_string(k) + "]";
      const double x = read_number(v[i][k], cell);
      if (!(x >= 0.0 && x <= 1.0)) throw ConfigError(cell + " = " + format_double(x) + " is outside [0,1]");
      entries.push_back(x);
    }
  }
  try {
    return RewardMatrix(n, entries);
  } catch (const Error& e) {
    throw ConfigError(std::string("B: ") + e.what());
  }
}

inline Dynamics read_dynamics(const Json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path + ": expected \"did\" or \"cid\"");
  try {
    return parse_dynamics(v.get<std::string>());
  } catch (const Error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline EtcEstimator read_estimator(const Json& v) {
  const std::string s = v.is_string() ? v.get<std::string>() : "";
  if (s == "paper") return EtcEstimator::Paper;
  if (s == "unbiased") return EtcEstimator::Unbiased;
  throw ConfigError("etc_estimator: expected \"paper\" or \"unbiased\"");
}

inline TwoArmPolicy parse_fixed(const std::string& text, const std::string& path) {
  const std::string body = text.substr(6);
  const auto comma = body.find(',');
  if (comma == std::string::npos) throw ConfigError(path + ": expected fixed:p,q");
  auto parse = [&](std::string_view s) {
    double x = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      throw ConfigError(path + ": '" + std::string(s) + "' is not a number");
    }
    return x;
  };
  const std::string_view view(body);
  const double p = parse(view.substr(0, comma));
  const double q = parse(view.substr(comma + 1));
  if (!(p >= 0.0 && p <= 1.0) || !(q >= 0.0 && q <= 1.0)) {
    throw ConfigError(path + ": p and q must lie in [0,1]");
  }
  return {p, q};
}

/// Policy before ETC resolution; `etc` marks a pending ETC entry.
struct PendingPolicy {
  PolicySpec spec;
  bool etc = false;
};

inline PendingPolicy read_policy(const Json& v, const std::string& path, std::size_t arms) {
  if (v.is_object()) {
    reject_unknown_keys(v, {"matrix"}, path + ".");
    if (!v.contains("matrix")) throw ConfigError(path + ": object policies need a 'matrix' key");
    const Json& m = v["matrix"];
    if (!m.is_array() || m.size() != arms) {
      throw ConfigError(path + ".matrix: expected " + std::to_string(arms) + " rows");
    }
    std::vector<double> probs;
    for (Index i = 0; i < arms; ++i) {
      const std::string row_path = path + ".matrix[" + std::to_string(i) + "]";
      if (!m[i].is_array() || m[i].size() != arms) throw ConfigError(row_path + ": wrong length");
      for (Index k = 0; k < arms; ++k) probs.push_back(read_number(m[i][k], row_path + "[" + std::to_string(k) + "]"));
    }
    try {
      return {policy::NArmMatrix{PolicyMatrix(arms, probs)}};
    } catch (const Error& e) {
      throw ConfigError(path + ".matrix: " + e.what());
    }
  }
  if (!v.is_string()) throw ConfigError(path + ": expected a policy name or {\"matrix\": ...}");
  const std::string s = v.get<std::string>();
  if (s == "optimal") {
    if (arms == 2) return {policy::OptimalKnownB{}};
    return {policy::NArmOptimal{}};
  }
  if (s == "narm-optimal") return {policy::NArmOptimal{}};
  if (s == "narm-ts") return {policy::NArmThompson{}};
  if (s == "ts") return {policy::Thompson{}};
  if (s == "etc") return {policy::Etc{1}, true};
  if (s.starts_with("fixed:")) return {policy::Fixed{parse_fixed(s, path)}};
  throw ConfigError(path + ": unknown policy '" + s + "' (expected optimal, etc, ts, fixed:p,q, narm-ts, narm-optimal)");
}

inline TwoArmPolicy read_competing_policy(const Json& v, const std::string& path, const RewardMatrix& b) {
  const std::string s = v.is_string() ? v.get<std::string>() : "";
  if (s == "optimal") return optimal_policy_2arm(b);
  if (s == "opposing") return opposing_optimal_policy(b);
  if (s.starts_with("fixed:")) return parse_fixed(s, path);
  throw ConfigError(path + ": expected optimal, opposing or fixed:p,q");
}

}  // namespace detail

inline const std::set<std::string>& config_keys() {
  static const std::set<std::string> keys{"name",    "dynamics",       "B",        "policy",
                                          "policies", "etc_m",         "etc_estimator", "horizon",
                                          "n0",      "initial_counts", "replications",  "base_seed",
                                          "competing"};
  return keys;
}

/// Builds an experiment from a JSON config. A sidecar metadata file (an
/// object with a "config" member) is accepted as well and replays its run.
inline Experiment parse_config(const Json& input) {
  using namespace detail;
  if (!input.is_object()) throw ConfigError("config must be a JSON object");
  const Json& j = input.contains("config") && input["config"].is_object() ? input["config"] : input;

  {
    std::vector<std::string> missing;
    if (!j.contains("B")) missing.push_back("B");
    if (!j.contains("policy") && !j.contains("policies") && !j.contains("competing")) {
      missing.push_back("policy (or policies, or competing)");
    }
    if (!missing.empty()) throw ConfigError("missing required keys: " + join(missing));
  }
  reject_unknown_keys(j, config_keys(), "");
  if (j.contains("policy") && j.contains("policies")) throw ConfigError("give either 'policy' or 'policies', not both");

  Experiment ex;
  auto defaulted = [&](const char* key, const std::string& value) {
    ex.defaults_applied.push_back(std::string(key) + "=" + value);
  };

  if (j.contains("name")) {
    if (!j["name"].is_string()) throw ConfigError("name: expected a string");
    ex.name = j["name"].get<std::string>();
  }
  const RewardMatrix b = read_matrix(j["B"]);
  const std::size_t arms = b.arms();

  std::vector<Dynamics> dynamics;
  if (!j.contains("dynamics")) {
    dynamics.push_back(Dynamics::Did);
    defaulted("dynamics", "did");
  } else if (j["dynamics"].is_array()) {
    for (std::size_t k = 0; k < j["dynamics"].size(); ++k) {
      dynamics.push_back(read_dynamics(j["dynamics"][k], "dynamics[" + std::to_string(k) + "]"));
    }
    if (dynamics.empty()) throw ConfigError("dynamics: empty list");
  } else {
    dynamics.push_back(read_dynamics(j["dynamics"], "dynamics"));
  }

  std::size_t horizon = 1000;
  if (j.contains("horizon")) {
    horizon = read_uint(j["horizon"], "horizon", 1);
  } else {
    defaulted("horizon", "1000");
  }
  std::size_t replications = 1000;
  if (j.contains("replications")) {
    replications = read_uint(j["replications"], "replications", 1);
  } else {
    defaulted("replications", "1000");
  }
  std::uint64_t seed = kDefaultSeed;
  if (j.contains("base_seed")) {
    seed = read_uint(j["base_seed"], "base_seed", 0);
  } else {
    defaulted("base_seed", std::to_string(kDefaultSeed));
  }

  std::vector<std::int64_t> counts;
  if (j.contains("initial_counts")) {
    const Json& v = j["initial_counts"];
    if (!v.is_array() || v.size() != arms) {
      throw ConfigError("initial_counts: expected " + std::to_string(arms) + " non-negative integers");
    }
    for (std::size_t k = 0; k < arms; ++k) {
      counts.push_back(static_cast<std::int64_t>(read_uint(v[k], "initial_counts[" + std::to_string(k) + "]", 0)));
    }
    std::int64_t total = 0;
    for (auto c : counts) total += c;
    if (total < 1) throw ConfigError("initial_counts: the urn needs at least one ball");
    if (j.contains("n0") && read_uint(j["n0"], "n0", 1) != static_cast<std::uint64_t>(total)) {
      throw ConfigError("n0 does not equal the sum of initial_counts");
    }
  } else if (j.contains("n0")) {
    const auto n0 = read_uint(j["n0"], "n0", 1);
    if (n0 % arms != 0) {
      throw ConfigError("n0: " + std::to_string(n0) + " balls cannot be split evenly over " + std::to_string(arms) +
                        " colours; give initial_counts instead");
    }
    counts.assign(arms, static_cast<std::int64_t>(n0 / arms));
  } else {
    counts = default_initial_counts(arms);
    defaulted("initial_counts", "[" + std::to_string(kDefaultBallsPerColor) + " per colour]");
  }

  if (j.contains("competing")) {
    if (j.contains("policy") || j.contains("policies") || j.contains("etc_m") || j.contains("etc_estimator")) {
      throw ConfigError("competing: policy keys belong inside 'competing' (policy1, policy2)");
    }
    if (dynamics.size() != 1) throw ConfigError("competing: give a single dynamics");
    const Json& c = j["competing"];
    if (!c.is_object()) throw ConfigError("competing: expected an object");
    reject_unknown_keys(c, {"policy1", "policy2", "initial_popularity"}, "competing.");
    if (arms != 2) throw ConfigError("competing: B must be 2x2");
    CompetingConfig cc(b);
    if (c.contains("policy1")) {
      cc.policy1 = read_competing_policy(c["policy1"], "competing.policy1", b);
    } else {
      defaulted("competing.policy1", "optimal");
    }
    if (c.contains("policy2")) {
      cc.policy2 = read_competing_policy(c["policy2"], "competing.policy2", b);
    } else {
      defaulted("competing.policy2", "opposing");
    }
    if (c.contains("initial_popularity")) {
      const Json& p = c["initial_popularity"];
      auto cell = [&](Index i, Index k) {
        const std::string path = "competing.initial_popularity[" + std::to_string(i) + "][" + std::to_string(k) + "]";
        if (!p.is_array() || p.size() != 2 || !p[i].is_array() || p[i].size() != 2) {
          throw ConfigError("competing.initial_popularity: expected a 2x2 array");
        }
        const double x = read_number(p[i][k], path);
        if (!(x > 0.0)) throw ConfigError(path + " must be positive");
        return x;
      };
      cc.initial_popularity = PopularityMatrix(cell(0, 0), cell(0, 1), cell(1, 0), cell(1, 1));
    } else {
      defaulted("competing.initial_popularity", "[[1,1],[1,1]]");
    }
    cc.dynamics = dynamics.front();
    cc.horizon = horizon;
    cc.initial_counts = counts;
    cc.replications = replications;
    cc.base_seed = seed;
    cc.validate();
    ex.competing = std::move(cc);
    return ex;
  }

  std::vector<PendingPolicy> pending;
  if (j.contains("policies")) {
    const Json& v = j["policies"];
    if (!v.is_array() || v.empty()) throw ConfigError("policies: expected a non-empty array");
    for (std::size_t k = 0; k < v.size(); ++k) {
      pending.push_back(read_policy(v[k], "policies[" + std::to_string(k) + "]", arms));
    }
  } else {
    pending.push_back(read_policy(j["policy"], "policy", arms));
  }

  bool any_etc = false;
  for (const auto& p : pending) any_etc |= p.etc;
  if (!any_etc && (j.contains("etc_m") || j.contains("etc_estimator"))) {
    throw ConfigError("etc_m/etc_estimator given but no ETC policy selected");
  }
  std::size_t etc_m = 0;
  EtcEstimator estimator = EtcEstimator::Paper;
  if (any_etc) {
    if (arms != 2) throw ConfigError("policy 'etc' needs a 2x2 reward matrix");
    if (j.contains("etc_estimator")) {
      estimator = read_estimator(j["etc_estimator"]);
    } else {
      defaulted("etc_estimator", "paper");
    }
    const bool automatic =
        !j.contains("etc_m") || (j["etc_m"].is_string() && j["etc_m"].get<std::string>() == "auto");
    if (!j.contains("etc_m")) defaulted("etc_m", "auto");
    if (automatic) {
      const double d1 = gaps(b).delta1;
      if (!(d1 > 0.0)) throw ConfigError("etc_m: 'auto' needs delta1 > 0 (the prescribed exploration is infinite)");
      const std::size_t m = etc_exploration_length(horizon, d1);
      etc_m = std::min(m, horizon);
      if (m > horizon) {
        ex.notes.push_back("etc_m: prescribed exploration " + std::to_string(m) + " exceeds the horizon; clamped to " +
                           std::to_string(horizon));
      }
    } else {
      if (j["etc_m"].is_string()) throw ConfigError("etc_m: expected \"auto\" or a positive integer");
      etc_m = read_uint(j["etc_m"], "etc_m", 1);
      if (etc_m > horizon) throw ConfigError("etc_m: " + std::to_string(etc_m) + " exceeds the horizon");
    }
  }

  for (const auto& p : pending) {
    PolicySpec spec = p.etc ? PolicySpec(policy::Etc{etc_m, estimator}) : p.spec;
    for (Dynamics d : dynamics) {
      SimConfig cfg(b, spec);
      cfg.dynamics = d;
      cfg.horizon = horizon;
      cfg.initial_counts = counts;
      cfg.replications = replications;
      cfg.base_seed = seed;
      try {
        cfg.validate();
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
      std::string label = policy_label(spec);
      if (dynamics.size() > 1) label += "-" + dynamics_name(d);
      ex.runs.push_back({label, std::move(cfg)});
    }
  }
  return ex;
}

inline Experiment parse_config_text(const std::string& text, const std::string& source) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(source + ": invalid JSON: " + e.what());
  }
  return parse_config(j);
}

}  // namespace prefshape::cli
