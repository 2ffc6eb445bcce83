#pragma once

// CSV and sidecar metadata emission.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "prefshape/cli/config.hpp"
#include "prefshape/cli/report.hpp"

namespace prefshape::cli {

inline constexpr const char* kCsvHeader = "t,z1_mean,z1_std,regret_mean,cumregret_mean";

inline std::string csv_text(const AggregateResult& r) {
  std::string out = kCsvHeader;
  out += '\n';
  for (std::size_t k = 0; k < r.steps(); ++k) {
    out += std::to_string(k + 1);
    for (double x : {r.z1_mean[k], r.z1_std[k], r.regret_mean[k], r.cumregret_mean[k]}) {
      out += ',';
      out += format_double(x);
    }
    out += '\n';
  }
  return out;
}

inline std::string popularity_csv_text(const CompetingResult& r) {
  std::string out = "t,s1_share_type0_mean,s1_share_type1_mean\n";
  for (std::size_t k = 0; k < r.s1_share_type0_mean.size(); ++k) {
    out += std::to_string(k + 1) + ',' + format_double(r.s1_share_type0_mean[k]) + ',' +
           format_double(r.s1_share_type1_mean[k]) + '\n';
  }
  return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.close();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

inline std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
  auto p = csv;
  return p.replace_extension(".json");
}

/// `base` for a single run; otherwise the run label is inserted before
/// the extension.
inline std::filesystem::path run_output_path(const std::filesystem::path& base, const std::string& label,
                                             bool single) {
  if (single) return base;
  std::string safe = label;
  for (char& c : safe) {
    if (c == ':' || c == ',' || c == '/') c = '_';
  }
  auto stem = base.stem().string() + "." + safe;
  return base.parent_path() / (stem + (base.has_extension() ? base.extension().string() : ".csv"));
}

inline Json summary_json(const AggregateResult& r) {
  Json s;
  s["replications"] = r.replications;
  s["z1_initial"] = r.z1_initial;
  s["final_z1_mean"] = r.z1_mean.back();
  s["final_z1_std"] = r.z1_std.back();
  s["final_cumregret_mean"] = r.cumregret_mean.back();
  Json own = Json::array();
  for (Index i = 0; i < r.arms; ++i) {
    const double f = r.own_arm_fraction(i);
    own.push_back(std::isnan(f) ? Json(nullptr) : Json(f));
  }
  s["own_arm_fraction"] = own;
  return s;
}

inline Json metadata_json(const Experiment& ex, const Json& config, const std::string& csv_name) {
  Json m;
  m["experiment"] = ex.name;
  m["csv"] = csv_name;
  m["config"] = config;
  m["defaults_applied"] = ex.defaults_applied;
  m["notes"] = ex.notes;
  return m;
}

/// Writes the CSV and the sidecar (same basename, .json).
inline void emit_csv(const AggregateResult& result, const std::filesystem::path& path, const Json& metadata) {
  write_text(path, csv_text(result));
  write_text(sidecar_path(path), metadata.dump(2) + "\n");
}

}  // namespace prefshape::cli
