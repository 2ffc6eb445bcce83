#pragma once

// Empirical cumulative regret against the applicable theoretical bound.

#include <optional>
#include <string>

#include "prefshape/cli/config.hpp"

namespace prefshape::cli {

enum class BoundStatus { Pass, Fail, NotApplicable };

inline std::string_view to_string(BoundStatus s) {
  switch (s) {
    case BoundStatus::Pass: return "pass";
    case BoundStatus::Fail: return "fail";
    case BoundStatus::NotApplicable: return "not-applicable";
  }
  return "?";
}

struct BoundCheck {
  BoundStatus status = BoundStatus::NotApplicable;
  double empirical = 0.0;
  std::optional<BoundReport> bound;
  std::string reason;
};

namespace detail {

inline BoundCheck not_applicable(double empirical, std::string reason) {
  return {BoundStatus::NotApplicable, empirical, std::nullopt, std::move(reason)};
}

inline BoundCheck compare(double empirical, BoundReport bound) {
  const auto status = empirical <= bound.value ? BoundStatus::Pass : BoundStatus::Fail;
  return {status, empirical, bound, {}};
}

}  // namespace detail

/// ETC uses the symmetric-B bound at the configured m; TS uses its bound
/// with f1, f2 measured as the fraction of type-i arrivals shown arm i.
inline BoundCheck report_bounds(const SimConfig& config, const AggregateResult& result) {
  const double empirical = result.cumregret_mean.empty() ? 0.0 : result.cumregret_mean.back();
  const auto& b = config.reward;
  if (const auto* etc = std::get_if<policy::Etc>(&config.policy)) {
    if (!(b(0, 0) == b(1, 1) && b(0, 1) == b(1, 0))) {
      return detail::not_applicable(empirical, "ETC bound holds for symmetric B only (b00 = b11, b01 = b10)");
    }
    const double d1 = gaps(b).delta1;
    if (!(d1 > 0.0)) return detail::not_applicable(empirical, "ETC bound needs delta1 > 0");
    return detail::compare(empirical, etc_regret_bound(etc->m, config.horizon, d1));
  }
  if (std::holds_alternative<policy::Thompson>(config.policy)) {
    const auto g = gaps(b);
    if (!(g.delta1 > 0.0 && g.delta2 > 0.0)) return detail::not_applicable(empirical, "TS bound needs delta1, delta2 > 0");
    const auto best = optimal_policy_2arm(b);
    if (drift(b, best).degenerate()) return detail::not_applicable(empirical, "optimal policy has degenerate drift");
    const double f1 = result.own_arm_fraction(0);
    const double f2 = result.own_arm_fraction(1);
    if (!(f1 > 0.0 && f1 < 1.0 && f2 > 0.0 && f2 < 1.0)) {
      return detail::not_applicable(empirical, "measured own-arm fractions f1, f2 must lie strictly inside (0,1)");
    }
    return detail::compare(empirical, ts_regret_bound(config.horizon, g.delta1, g.delta2, asymptote(b, best), f1, f2));
  }
  return detail::not_applicable(empirical, "no regret bound for policy '" + policy_label(config.policy) + "'");
}

inline Json to_json(const BoundCheck& check) {
  Json j;
  j["status"] = std::string(to_string(check.status));
  j["empirical_cumregret"] = check.empirical;
  if (check.bound) {
    const auto& r = *check.bound;
    Json bound;
    bound["kind"] = std::string(to_string(r.kind));
    bound["value"] = r.value;
    auto put = [&](const char* key, double x) {
      if (!std::isnan(x)) bound[key] = x;
    };
    put("m", r.m);
    put("horizon", r.horizon);
    put("delta1", r.delta1);
    put("delta2", r.delta2);
    put("z_star", r.z_star);
    put("f1", r.f1);
    put("f2", r.f2);
    j["bound"] = bound;
  }
  if (!check.reason.empty()) j["reason"] = check.reason;
  return j;
}

}  // namespace prefshape::cli
