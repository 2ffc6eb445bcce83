#pragma once

// Command-line overrides and experiment execution.

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "prefshape/cli/config.hpp"
#include "prefshape/cli/output.hpp"
#include "prefshape/cli/presets.hpp"
#include "prefshape/cli/report.hpp"

namespace prefshape::cli {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> replications;
  std::optional<std::uint64_t> horizon;
  std::optional<std::string> policy;
  std::optional<std::string> dynamics;
  std::optional<std::string> etc_m;
  std::optional<std::string> etc_estimator;
};

/// Applies flag values on top of a config object (or a sidecar's config).
inline Json apply_overrides(Json config, const Overrides& o) {
  if (config.is_object() && config.contains("config") && config["config"].is_object()) {
    Json inner = config["config"];
    config = std::move(inner);
  }
  if (!config.is_object()) throw ConfigError("config must be a JSON object");
  if (o.seed) config["base_seed"] = *o.seed;
  if (o.replications) config["replications"] = *o.replications;
  if (o.horizon) config["horizon"] = *o.horizon;
  if (o.dynamics) config["dynamics"] = *o.dynamics;
  if (o.policy) {
    if (config.contains("competing")) throw ConfigError("--policy does not apply to a competing-recommenders config");
    config.erase("policies");
    config["policy"] = *o.policy;
    if (*o.policy != "etc") {
      config.erase("etc_m");
      config.erase("etc_estimator");
    }
  }
  if (o.etc_m) {
    if (*o.etc_m == "auto") {
      config["etc_m"] = "auto";
    } else {
      std::uint64_t m = 0;
      const auto& s = *o.etc_m;
      const auto res = std::from_chars(s.data(), s.data() + s.size(), m);
      if (res.ec != std::errc() || res.ptr != s.data() + s.size() || m == 0) {
        throw ConfigError("--etc-m: expected 'auto' or a positive integer, got '" + s + "'");
      }
      config["etc_m"] = m;
    }
  }
  if (o.etc_estimator) config["etc_estimator"] = *o.etc_estimator;
  return config;
}

struct RunOutput {
  std::string label;
  std::filesystem::path csv;
  double final_z1_mean = 0.0;
  double final_cumregret_mean = 0.0;
  std::optional<BoundCheck> bounds;
};

inline std::vector<RunOutput> run_experiment(const Experiment& ex, const std::filesystem::path& out,
                                             std::size_t threads) {
  std::vector<RunOutput> outputs;
  if (ex.is_competing()) {
    const auto& cfg = *ex.competing;
    const auto res = run_competing(cfg, threads);
    Json meta = metadata_json(ex, to_json(cfg), out.filename().string());
    Json summary = summary_json(res.population);
    std::size_t s1_row0 = 0, s1_row1 = 0, same = 0;
    for (const auto& pop : res.final_popularity) {
      const bool a = pop.share(0, 0) > 0.5, b = pop.share(1, 0) > 0.5;
      s1_row0 += a;
      s1_row1 += b;
      same += a == b;
    }
    const double n = static_cast<double>(res.final_popularity.size());
    summary["s1_share_type0_final_mean"] = res.s1_share_type0_mean.back();
    summary["s1_share_type1_final_mean"] = res.s1_share_type1_mean.back();
    summary["fraction_s1_majority_type0"] = static_cast<double>(s1_row0) / n;
    summary["fraction_s1_majority_type1"] = static_cast<double>(s1_row1) / n;
    summary["fraction_same_system_both_rows"] = static_cast<double>(same) / n;
    auto pop_path = out;
    pop_path.replace_extension(".popularity.csv");
    summary["popularity_csv"] = pop_path.filename().string();
    meta["summary"] = summary;
    emit_csv(res.population, out, meta);
    write_text(pop_path, popularity_csv_text(res));
    outputs.push_back({"competing", out, res.population.z1_mean.back(), res.population.cumregret_mean.back(), {}});
    return outputs;
  }

  const bool single = ex.runs.size() == 1;
  for (const auto& run : ex.runs) {
    const auto path = run_output_path(out, run.label, single);
    const auto res = run_monte_carlo(run.config, threads);
    const auto check = report_bounds(run.config, res);
    Json meta = metadata_json(ex, to_json(run.config), path.filename().string());
    meta["label"] = run.label;
    meta["summary"] = summary_json(res);
    meta["bounds"] = to_json(check);
    emit_csv(res, path, meta);
    outputs.push_back({run.label, path, res.z1_mean.back(), res.cumregret_mean.back(), check});
  }
  return outputs;
}

inline void print_outputs(std::ostream& os, const std::vector<RunOutput>& outputs) {
  for (const auto& o : outputs) {
    os << o.label << ": final z1_mean=" << format_double(o.final_z1_mean)
       << " cumregret_mean=" << format_double(o.final_cumregret_mean);
    if (o.bounds) {
      os << " bound=" << to_string(o.bounds->status);
      if (o.bounds->bound) os << " (" << format_double(o.bounds->bound->value) << ")";
    }
    os << " -> " << o.csv.string() << '\n';
  }
}

}  // namespace prefshape::cli
