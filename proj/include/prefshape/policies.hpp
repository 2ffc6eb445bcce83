#pragma once

// Decision rules: the known-B optimal policies, explore-then-commit, and
// Thompson sampling over Beta posteriors.
//
// Indicator conventions follow the optimality conditions literally and are
// strict where the conditions are strict. At a tie both actions produce
// the same expected drift, so the convention only has to be consistent:
// the N-arm rule at N = 2 reproduces the two-arm rule bit for bit,
// including ties (type 0 gets arm 1, type 1 gets arm 0).

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "prefshape/model.hpp"
#include "prefshape/random.hpp"

namespace prefshape {

/// Policy maximising the expected one-step gain of type-0 balls:
/// p = 1{b00 + b01 - 1 > 0}, q = 1{b10 + b11 - 1 < 0}.
inline TwoArmPolicy optimal_policy_2arm(const RewardMatrix& b) {
  b.require_two_arm("optimal_policy_2arm");
  const double p = b(0, 0) + b(0, 1) - 1.0 > 0.0 ? 1.0 : 0.0;
  const double q = b(1, 0) + b(1, 1) - 1.0 < 0.0 ? 1.0 : 0.0;
  return {p, q};
}

/// Arm assigned to each type by the N-arm optimal policy.
///
/// Type 0 gets arm 0 when b00 > 1 - b0k for every k >= 1, and otherwise
/// the arm k >= 1 it dislikes most (lowest index on ties). Type i >= 1 gets
/// arm 0 when b_i0 >= (1 - b_ii) / (N - 1), and its own arm otherwise.
inline std::vector<Index> optimal_arms_narm(const RewardMatrix& b) {
  const std::size_t n = b.arms();
  std::vector<Index> arms(n);

  bool favoured_wins = true;
  Index most_disliked = 1;
  for (Index k = 1; k < n; ++k) {
    if (!(b(0, 0) + b(0, k) - 1.0 > 0.0)) favoured_wins = false;
    if (b(0, k) < b(0, most_disliked)) most_disliked = k;
  }
  arms[0] = favoured_wins ? 0 : most_disliked;

  const double others = static_cast<double>(n - 1);
  for (Index i = 1; i < n; ++i) {
    arms[i] = others * b(i, 0) + b(i, i) - 1.0 >= 0.0 ? 0 : i;
  }
  return arms;
}

inline PolicyMatrix optimal_policy_narm(const RewardMatrix& b) {
  const auto arms = optimal_arms_narm(b);
  return PolicyMatrix::deterministic(arms);
}

/// Samples the arm shown to a user of `type` under a two-arm policy.
/// Always consumes exactly one uniform, so runs of different fixed
/// policies on the same seed stay aligned.
inline Index choose_arm(const TwoArmPolicy& policy, Index type, RandomSource& rng) {
  const double u = rng.uniform();
  if (type == 0) return u < policy.p ? 0 : 1;
  return u < policy.q ? 1 : 0;
}

/// Deterministic arm for a policy whose parameters are 0/1 indicators.
inline Index indicated_arm(const TwoArmPolicy& policy, Index type) {
  if (type == 0) return policy.p > 0.5 ? 0 : 1;
  return policy.q > 0.5 ? 1 : 0;
}

/// Samples an arm from row `type` of a stochastic policy matrix.
inline Index choose_arm(const PolicyMatrix& policy, Index type, RandomSource& rng) {
  const double u = rng.uniform();
  const auto row = policy.row(type);
  double cumulative = 0.0;
  Index last_positive = 0;
  for (Index j = 0; j < row.size(); ++j) {
    if (row[j] <= 0.0) continue;
    cumulative += row[j];
    last_positive = j;
    if (u < cumulative) return j;
  }
  return last_positive;
}

// ---------------------------------------------------------------------------
// Explore-then-commit

enum class EtcEstimator {
  /// Counts start at 1: b = sum / (n + 1).
  Paper,
  /// Plain sample mean; cells never observed estimate to 0.
  Unbiased,
};

inline std::string_view to_string(EtcEstimator e) {
  return e == EtcEstimator::Paper ? "paper" : "unbiased";
}

enum class EtcPhase { Explore, Commit };

/// Explores uniformly (type-independent) for the first m steps, then
/// commits to the optimal policy of the estimated reward matrix.
class EtcState {
 public:
  explicit EtcState(std::size_t m, EtcEstimator estimator = EtcEstimator::Paper)
      : m_(m), estimator_(estimator) {
    if (m == 0) throw DomainError("ETC exploration length must be positive");
    const double initial = estimator == EtcEstimator::Paper ? 1.0 : 0.0;
    for (auto& c : counts_) c = initial;
  }

  std::size_t exploration_length() const { return m_; }
  EtcEstimator estimator() const { return estimator_; }
  EtcPhase phase() const { return committed_ ? EtcPhase::Commit : EtcPhase::Explore; }
  const std::optional<TwoArmPolicy>& committed() const { return committed_; }

  double reward_sum(Index type, Index arm) const { return sums_[type * 2 + arm]; }
  double pull_count(Index type, Index arm) const { return counts_[type * 2 + arm]; }

  RewardMatrix estimate() const {
    std::vector<double> b(4, 0.0);
    for (Index k = 0; k < 4; ++k) b[k] = counts_[k] > 0.0 ? sums_[k] / counts_[k] : 0.0;
    return RewardMatrix(2, std::move(b));
  }

  /// Arm for step t (1-based). Uniform while t <= m; from t = m + 1 on the
  /// committed indicator policy.
  Index choose(std::size_t t, Index type, RandomSource& rng) {
    if (t == 0) throw DomainError("ETC steps are numbered from 1");
    if (t <= m_) return rng.index(2);
    if (!committed_) commit();
    return indicated_arm(*committed_, type);
  }

  /// Folds an exploration observation into the estimate. Ignored once
  /// committed.
  void update(Index type, Index arm, bool reward) {
    if (committed_) return;
    sums_[type * 2 + arm] += reward ? 1.0 : 0.0;
    counts_[type * 2 + arm] += 1.0;
    ++observations_;
  }

  /// Policy parameters in force at step t, as seen by the regret formula.
  TwoArmPolicy parameters(std::size_t t) const {
    if (t <= m_ || !committed_) return {0.5, 0.5};
    return *committed_;
  }

 private:
  void commit() {
    if (observations_ == 0) {
      throw StateError("ETC cannot commit before any exploration observation");
    }
    committed_ = optimal_policy_2arm(estimate());
  }

  std::size_t m_;
  EtcEstimator estimator_;
  double sums_[4] = {0.0, 0.0, 0.0, 0.0};
  double counts_[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t observations_ = 0;
  std::optional<TwoArmPolicy> committed_;
};

// ---------------------------------------------------------------------------
// Thompson sampling

struct TsDecision {
  Index arm;
  RewardMatrix sample;
  TwoArmPolicy parameters;  // optimal policy of the sampled matrix
};

class TsState {
 public:
  explicit TsState(std::size_t arms = 2) : posterior_(arms) {}
  explicit TsState(PosteriorState posterior) : posterior_(std::move(posterior)) {}

  const PosteriorState& posterior() const { return posterior_; }
  std::size_t arms() const { return posterior_.arms(); }

  /// Draws every cell of the reward matrix from its posterior, row-major.
  RewardMatrix sample(RandomSource& rng) const {
    const std::size_t n = posterior_.arms();
    std::vector<double> b(n * n);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) b[i * n + j] = rng.beta(posterior_.alpha(i, j), posterior_.beta(i, j));
    }
    return RewardMatrix(n, std::move(b));
  }

  /// Two-arm decision: apply the known-B optimal rule to a posterior draw.
  TsDecision choose(Index type, RandomSource& rng) const {
    if (arms() != 2) throw DimensionError("two-arm Thompson sampling needs a 2x2 posterior");
    auto sampled = sample(rng);
    const auto params = optimal_policy_2arm(sampled);
    return {indicated_arm(params, type), std::move(sampled), params};
  }

  /// N-arm decision: the arm the N-arm optimal policy of a posterior draw
  /// assigns to `type`.
  Index choose_narm(Index type, RandomSource& rng) const {
    return optimal_arms_narm(sample(rng))[type];
  }

  void update(Index type, Index arm, bool reward) { posterior_.observe(type, arm, reward); }

 private:
  PosteriorState posterior_;
};

// ---------------------------------------------------------------------------
// Policy specifications

namespace policy {

struct Fixed {
  TwoArmPolicy params;
};
struct OptimalKnownB {};
struct Etc {
  std::size_t m;
  EtcEstimator estimator = EtcEstimator::Paper;
};
struct Thompson {};
struct NArmMatrix {
  PolicyMatrix probs;
};
struct NArmOptimal {};
struct NArmThompson {};

}  // namespace policy

using PolicySpec = std::variant<policy::Fixed, policy::OptimalKnownB, policy::Etc, policy::Thompson,
                                policy::NArmMatrix, policy::NArmOptimal, policy::NArmThompson>;

/// Short label used in file names and reports.
inline std::string policy_label(const PolicySpec& spec) {
  struct Visitor {
    std::string operator()(const policy::Fixed& f) const {
      auto fmt = [](double x) {
        std::string s = std::to_string(x);
        while (s.size() > 1 && s.back() == '0') s.pop_back();
        if (s.back() == '.') s.pop_back();
        return s;
      };
      return "fixed:" + fmt(f.params.p) + "," + fmt(f.params.q);
    }
    std::string operator()(const policy::OptimalKnownB&) const { return "optimal"; }
    std::string operator()(const policy::Etc& e) const { return "etc-m" + std::to_string(e.m); }
    std::string operator()(const policy::Thompson&) const { return "ts"; }
    std::string operator()(const policy::NArmMatrix&) const { return "narm-matrix"; }
    std::string operator()(const policy::NArmOptimal&) const { return "narm-optimal"; }
    std::string operator()(const policy::NArmThompson&) const { return "narm-ts"; }
  };
  return std::visit(Visitor{}, spec);
}

inline bool is_two_arm_only(const PolicySpec& spec) {
  return std::holds_alternative<policy::Fixed>(spec) || std::holds_alternative<policy::OptimalKnownB>(spec) ||
         std::holds_alternative<policy::Etc>(spec) || std::holds_alternative<policy::Thompson>(spec);
}

}  // namespace prefshape
