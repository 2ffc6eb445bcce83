#pragma once

// Closed-form results for fixed two-arm policies: mean trajectories,
// asymptotes, one-step regret and the cumulative regret bounds.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string_view>

#include "prefshape/model.hpp"
#include "prefshape/policies.hpp"

namespace prefshape {

/// Limit of the expected type-0 share, d2 / (d1 + d2).
inline double asymptote(const RewardMatrix& b, const TwoArmPolicy& policy) {
  const auto d = drift(b, policy);
  if (d.degenerate()) {
    throw DegenerateDynamicsError("d1 + d2 = 0: the expected share never moves");
  }
  return d.d2 / d.total();
}

/// Expected type-0 share after t steps of the growing urn started with n0
/// balls: a + (z0 - a) (1 + t/n0)^-(d1+d2).
inline double trajectory_did(const RewardMatrix& b, const TwoArmPolicy& policy, double z0,
                             double n0, double t) {
  const auto d = drift(b, policy);
  if (d.degenerate()) return z0;
  const double a = d.d2 / d.total();
  return a + (z0 - a) * std::pow(1.0 + t / n0, -d.total());
}

/// Expected type-0 share after t steps of the fixed-size voter urn:
/// a + (z0 - a) exp(-t (d1+d2) / n0).
inline double trajectory_cid(const RewardMatrix& b, const TwoArmPolicy& policy, double z0,
                             double n0, double t) {
  const auto d = drift(b, policy);
  if (d.degenerate()) return z0;
  const double a = d.d2 / d.total();
  return a + (z0 - a) * std::exp(-t * d.total() / n0);
}

/// E[increase of type-0 balls | z1] for a two-arm policy:
/// z1 (1 - d1) + (1 - z1) d2.
inline double expected_gain(const RewardMatrix& b, double z1, const TwoArmPolicy& policy) {
  const auto d = drift(b, policy);
  return z1 * (1.0 - d.d1) + (1.0 - z1) * d.d2;
}

/// E[increase of type-0 balls | z] for an N-arm policy matrix under the
/// growing-urn dynamics.
inline double expected_gain(const RewardMatrix& b, std::span<const double> z, const PolicyMatrix& policy) {
  const std::size_t n = b.arms();
  if (z.size() != n || policy.arms() != n) throw DimensionError("expected_gain: size mismatch");
  double favoured = policy(0, 0) * b(0, 0);
  for (Index j = 1; j < n; ++j) favoured += policy(0, j) * (1.0 - b(0, j));
  double gain = z[0] * favoured;
  const double others = static_cast<double>(n - 1);
  for (Index i = 1; i < n; ++i) {
    gain += z[i] * (policy(i, 0) * b(i, 0) + policy(i, i) * (1.0 - b(i, i)) / others);
  }
  return gain;
}

/// One-step regret of playing `policy` at share z1, relative to the optimal
/// policy at the same state:
/// z1 |p* - p| D1 + (1 - z1) |q* - q| D2.
inline double per_step_regret(const RewardMatrix& b, double z1, const TwoArmPolicy& policy) {
  const auto best = optimal_policy_2arm(b);
  const auto g = gaps(b);
  return z1 * std::abs(best.p - policy.p) * g.delta1 +
         (1.0 - z1) * std::abs(best.q - policy.q) * g.delta2;
}

/// N-arm counterpart: optimal expected gain minus the policy's.
inline double per_step_regret(const RewardMatrix& b, std::span<const double> z, const PolicyMatrix& policy) {
  const double best = expected_gain(b, z, optimal_policy_narm(b));
  return std::max(0.0, best - expected_gain(b, z, policy));
}

/// Deterministic Robbins-Monro iterate with the martingale noise removed:
/// z(t+1) = z(t) + (d2 - (d1+d2) z(t)) / (n0 + t + 1).
inline double robbins_monro_mean_iterate(const RewardMatrix& b, const TwoArmPolicy& policy, double z0,
                                         double n0, std::int64_t steps) {
  const auto d = drift(b, policy);
  double z = z0;
  for (std::int64_t t = 0; t < steps; ++t) {
    z += (d.d2 - d.total() * z) / (n0 + static_cast<double>(t) + 1.0);
  }
  return z;
}

// ---------------------------------------------------------------------------
// Regret bounds

enum class BoundKind { EtcRaw, EtcLog, Ts };

inline std::string_view to_string(BoundKind k) {
  switch (k) {
    case BoundKind::EtcRaw: return "etc";
    case BoundKind::EtcLog: return "etc-log";
    case BoundKind::Ts: return "ts";
  }
  return "?";
}

struct BoundReport {
  static constexpr double kUnused = std::numeric_limits<double>::quiet_NaN();

  BoundKind kind;
  double value;
  double m = kUnused;
  double horizon = kUnused;
  double delta1 = kUnused;
  double delta2 = kUnused;
  double z_star = kUnused;
  double f1 = kUnused;
  double f2 = kUnused;
};

/// Exploration length giving logarithmic ETC regret: ceil(8 ln T / D1^2).
inline std::size_t etc_exploration_length(std::size_t horizon, double delta1) {
  if (!(delta1 > 0.0)) throw DomainError("ETC exploration length is infinite when delta1 = 0");
  if (horizon < 1) throw DomainError("horizon must be at least 1");
  return static_cast<std::size_t>(std::ceil(8.0 * std::log(static_cast<double>(horizon)) / (delta1 * delta1)));
}

/// Cumulative ETC regret bound for symmetric B (b00 = b11, b01 = b10):
/// m D1 / 2 + (T - m) D1 exp(-m D1^2 / 8).
inline BoundReport etc_regret_bound(std::size_t m, std::size_t horizon, double delta1) {
  if (!(delta1 > 0.0)) throw DomainError("ETC bound needs delta1 > 0 (optimal m is infinite)");
  if (m < 1 || m > horizon) throw DomainError("ETC bound needs 1 <= m <= T");
  const double md = static_cast<double>(m);
  const double value = md * delta1 / 2.0 +
                       static_cast<double>(horizon - m) * delta1 * std::exp(-md * delta1 * delta1 / 8.0);
  BoundReport r{BoundKind::EtcRaw, value};
  r.m = md;
  r.horizon = static_cast<double>(horizon);
  r.delta1 = delta1;
  return r;
}

/// Leading term of the ETC bound at m = 8 ln T / D1^2: (4 / D1) ln T.
inline BoundReport etc_log_regret_bound(std::size_t horizon, double delta1) {
  if (!(delta1 > 0.0)) throw DomainError("ETC bound needs delta1 > 0");
  BoundReport r{BoundKind::EtcLog, 4.0 / delta1 * std::log(static_cast<double>(horizon))};
  r.horizon = static_cast<double>(horizon);
  r.delta1 = delta1;
  return r;
}

/// Thompson sampling bound:
/// (z*)^2 / 4 (1 / (f1 (1-f1) D1) + 1 / (f2 (1-f2) D2)) ln T.
inline BoundReport ts_regret_bound(std::size_t horizon, double delta1, double delta2, double z_star,
                                   double f1, double f2) {
  if (!(f1 > 0.0 && f1 < 1.0) || !(f2 > 0.0 && f2 < 1.0)) {
    throw DomainError("TS bound needs 0 < f1, f2 < 1");
  }
  if (!(delta1 > 0.0) || !(delta2 > 0.0)) throw DomainError("TS bound needs delta1, delta2 > 0");
  if (!(z_star >= 0.0 && z_star <= 1.0)) throw DomainError("z* must lie in [0,1]");
  const double value = z_star * z_star / 4.0 *
                       (1.0 / (f1 * (1.0 - f1) * delta1) + 1.0 / (f2 * (1.0 - f2) * delta2)) *
                       std::log(static_cast<double>(horizon));
  BoundReport r{BoundKind::Ts, value};
  r.horizon = static_cast<double>(horizon);
  r.delta1 = delta1;
  r.delta2 = delta2;
  r.z_star = z_star;
  r.f1 = f1;
  r.f2 = f2;
  return r;
}

// ---------------------------------------------------------------------------
// Comparison with the trajectory-based regret definition

namespace detail {

inline double positive_part(double x) { return std::max(x, 0.0); }

inline double regret_comparison_lhs(const RewardMatrix& b) {
  return positive_part(b(0, 0) + b(0, 1) - 1.0) + (1.0 - b(0, 1));
}

inline double regret_comparison_rhs(const RewardMatrix& b) {
  return positive_part(1.0 - b(1, 0) - b(1, 1)) + b(1, 0);
}

}  // namespace detail

/// R_t - R'_t, the state-conditioned regret minus the trajectory regret,
/// when the evaluated policy sits at z1 and the optimal one at z1_star.
inline double regret_definition_gap(const RewardMatrix& b, double z1, double z1_star) {
  b.require_two_arm("regret_definition_gap");
  return (z1 - z1_star) * (detail::regret_comparison_lhs(b) - detail::regret_comparison_rhs(b));
}

/// True iff the trajectory regret never exceeds the state-conditioned one.
inline bool alt_regret_dominated(const RewardMatrix& b) {
  b.require_two_arm("alt_regret_dominated");
  return detail::regret_comparison_lhs(b) <= detail::regret_comparison_rhs(b);
}

}  // namespace prefshape
