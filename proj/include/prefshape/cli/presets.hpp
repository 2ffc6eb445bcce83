#pragma once

// Named experiment setups for known-B, unknown-B, N-arm and competing-recommender runs.

#include <map>
#include <string>
#include <vector>

#include "prefshape/cli/config.hpp"

namespace prefshape::cli {

namespace detail {

inline Json two_by_two(double b00, double b01, double b10, double b11) {
  return Json::array({Json::array({b00, b01}), Json::array({b10, b11})});
}

inline Json constant_diagonal(std::size_t n, double diagonal, double off) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < n; ++i) {
    Json row = Json::array();
    for (std::size_t k = 0; k < n; ++k) row.push_back(i == k ? diagonal : off);
    rows.push_back(row);
  }
  return rows;
}

inline Json learning(Json b) {
  return {{"B", std::move(b)}, {"policies", {"optimal", "etc", "ts"}}, {"etc_m", "auto"}};
}

inline Json competing(Json b) { return {{"B", std::move(b)}, {"competing", Json::object()}}; }

inline std::map<std::string, Json> build_presets() {
  std::map<std::string, Json> p;
  p["fig-popvtime1-a"] = learning(two_by_two(0.9, 0.4, 0.2, 0.6));
  p["fig-popvtime1-b"] = learning(two_by_two(0.9, 0.4, 0.6, 0.7));
  p["fig-popvtime1-c"] = learning(two_by_two(0.7, 0.1, 0.3, 0.5));
  p["fig-popvtime1-d"] = learning(two_by_two(0.7, 0.1, 0.6, 0.6));
  p["fig-popvtimesym"] = learning(two_by_two(0.9, 0.7, 0.7, 0.9));

  p["fig-odesimcomp"] = {{"B", two_by_two(0.9, 0.4, 0.2, 0.6)}, {"policy", "optimal"}, {"replications", 100}};

  p["fig-fixpopvtime-a"] = {
      {"B", two_by_two(0.7, 0.1, 0.2, 0.5)}, {"policy", "optimal"}, {"dynamics", {"did", "cid"}}};
  p["fig-fixpopvtime-b"] = {
      {"B", two_by_two(0.9, 0.7, 0.7, 0.9)}, {"policy", "optimal"}, {"dynamics", {"did", "cid"}}};

  p["fig-narm-3"] = {{"B", constant_diagonal(3, 0.9, 0.7)}, {"policies", {"narm-optimal", "narm-ts"}}};
  p["fig-narm-4"] = {{"B", constant_diagonal(4, 0.9, 0.6)}, {"policies", {"narm-optimal", "narm-ts"}}};
  p["fig-narm-5"] = {{"B", constant_diagonal(5, 0.9, 0.7)}, {"policies", {"narm-optimal", "narm-ts"}}};

  // Uniform population: one system wins both rows.
  p["fig-competing-case1"] = competing(two_by_two(0.9, 0.4, 0.2, 0.6));
  p["fig-competing-case1-b"] = competing(two_by_two(0.7, 0.1, 0.3, 0.9));
  // Polarized population: each row goes to a different system.
  p["fig-competing-case2"] = competing(two_by_two(0.6, 0.2, 0.2, 0.6));
  p["fig-competing-case2-b"] = competing(two_by_two(0.7, 0.5, 0.6, 0.8));

  for (auto& [name, cfg] : p) cfg["name"] = name;
  return p;
}

}  // namespace detail

inline const std::map<std::string, Json>& presets() {
  static const auto table = detail::build_presets();
  return table;
}

inline std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, cfg] : presets()) names.push_back(name);
  return names;
}

inline const Json& preset_json(const std::string& name) {
  const auto it = presets().find(name);
  if (it == presets().end()) {
    throw ConfigError("unknown preset '" + name + "' (available: " + detail::join(preset_names()) + ")");
  }
  return it->second;
}

inline Experiment preset(const std::string& name) { return parse_config(preset_json(name)); }

}  // namespace prefshape::cli
