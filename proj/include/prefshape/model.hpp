#pragma once

// Domain types for preference-shaping bandits.
//
// Indices are 0-based throughout the library: type/arm 0 is the favoured
// type (the one whose population share the recommender tries to maximise)
// and arm 0 is that type's preferred arm.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace prefshape {

using Index = std::size_t;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Wrong matrix or vector size for the requested operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A value outside its mathematical domain (probability > 1, f at 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Urn or learner state that cannot support the requested operation.
class StateError : public Error {
 public:
  using Error::Error;
};

/// d1 + d2 == 0: the expected dynamics are frozen and have no asymptote.
class DegenerateDynamicsError : public Error {
 public:
  using Error::Error;
};

class UnsupportedDynamicsError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline std::string cell_name(const char* name, Index i, Index j) {
  return std::string(name) + "[" + std::to_string(i) + "][" +
         std::to_string(j) + "]";
}

inline bool is_probability(double x) {
  return std::isfinite(x) && x >= 0.0 && x <= 1.0;
}

}  // namespace detail

/// Square matrix of Bernoulli reward means; entry (i, j) is the mean reward
/// when a type-i user is shown arm j.
class RewardMatrix {
 public:
  RewardMatrix(std::size_t arms, std::vector<double> row_major)
      : arms_(arms), entries_(std::move(row_major)) {
    if (arms_ < 2) {
      throw DimensionError("reward matrix needs at least 2 arms, got " +
                           std::to_string(arms_));
    }
    if (entries_.size() != arms_ * arms_) {
      throw DimensionError("reward matrix with " + std::to_string(arms_) +
                           " arms needs " + std::to_string(arms_ * arms_) +
                           " entries, got " +
                           std::to_string(entries_.size()));
    }
    for (Index i = 0; i < arms_; ++i) {
      for (Index j = 0; j < arms_; ++j) {
        if (!detail::is_probability((*this)(i, j))) {
          throw DomainError(detail::cell_name("B", i, j) + " = " +
                            std::to_string((*this)(i, j)) +
                            " is outside [0,1]");
        }
      }
    }
  }

  static RewardMatrix two_arm(double b11, double b12, double b21, double b22) {
    return RewardMatrix(2, {b11, b12, b21, b22});
  }

  /// Constant diagonal and constant off-diagonal, as in the N-arm examples.
  static RewardMatrix constant_diagonal(std::size_t arms, double diagonal,
                                        double off_diagonal) {
    std::vector<double> entries(arms * arms, off_diagonal);
    for (Index i = 0; i < arms; ++i) entries[i * arms + i] = diagonal;
    return RewardMatrix(arms, std::move(entries));
  }

  std::size_t arms() const { return arms_; }
  double operator()(Index type, Index arm) const {
    return entries_[type * arms_ + arm];
  }
  std::span<const double> entries() const { return entries_; }

  /// Swaps the roles of type/arm 0 and 1. A recommender that wants to grow
  /// type 1 sees the relabelled matrix as its own type-0 problem.
  RewardMatrix relabeled() const {
    require_two_arm("relabeled");
    const auto& b = *this;
    return two_arm(b(1, 1), b(1, 0), b(0, 1), b(0, 0));
  }

  void require_two_arm(const char* op) const {
    if (arms_ != 2) {
      throw DimensionError(std::string(op) + " requires a 2x2 reward matrix, got " +
                           std::to_string(arms_) + "x" + std::to_string(arms_));
    }
  }

  friend bool operator==(const RewardMatrix&, const RewardMatrix&) = default;

 private:
  std::size_t arms_;
  std::vector<double> entries_;
};

/// Ball counts of an urn with one colour per user type. Proportions are
/// always derived from the integer counts.
class UrnState {
 public:
  explicit UrnState(std::vector<std::int64_t> counts)
      : UrnState(std::move(counts), 0, 0) {
    initial_total_ = total();
  }

  UrnState(std::vector<std::int64_t> counts, std::int64_t time,
           std::int64_t initial_total)
      : counts_(std::move(counts)), time_(time), initial_total_(initial_total) {
    if (counts_.size() < 2) {
      throw DimensionError("urn needs at least 2 colours");
    }
    for (Index i = 0; i < counts_.size(); ++i) {
      if (counts_[i] < 0) {
        throw StateError("negative ball count for colour " + std::to_string(i));
      }
    }
  }

  std::size_t colors() const { return counts_.size(); }
  std::int64_t count(Index color) const { return counts_[color]; }
  std::span<const std::int64_t> counts() const { return counts_; }
  std::int64_t total() const {
    return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0});
  }
  std::int64_t time() const { return time_; }
  std::int64_t initial_total() const { return initial_total_; }

  double proportion(Index color) const {
    return static_cast<double>(counts_[color]) / static_cast<double>(total());
  }

  std::vector<double> proportions() const {
    std::vector<double> z(counts_.size());
    const double n = static_cast<double>(total());
    for (Index i = 0; i < z.size(); ++i) z[i] = static_cast<double>(counts_[i]) / n;
    return z;
  }

  /// Next-step state with one ball of `color` added.
  UrnState with_ball_added(Index color) const {
    auto next = counts_;
    ++next[color];
    return UrnState(std::move(next), time_ + 1, initial_total_);
  }

  /// Next-step state with one ball recoloured from `from` to `to`.
  UrnState with_ball_recolored(Index from, Index to) const {
    auto next = counts_;
    --next[from];
    ++next[to];
    return UrnState(std::move(next), time_ + 1, initial_total_);
  }

  /// Next-step state with the same composition.
  UrnState advanced() const { return UrnState(counts_, time_ + 1, initial_total_); }

  friend bool operator==(const UrnState&, const UrnState&) = default;

 private:
  std::vector<std::int64_t> counts_;
  std::int64_t time_;
  std::int64_t initial_total_;
};

/// Two-arm contextual policy: p = P(arm 0 | type 0), q = P(arm 1 | type 1).
struct TwoArmPolicy {
  double p = 0.0;
  double q = 0.0;

  TwoArmPolicy() = default;
  TwoArmPolicy(double p_, double q_) : p(p_), q(q_) {
    if (!detail::is_probability(p) || !detail::is_probability(q)) {
      throw DomainError("policy parameters must lie in [0,1], got (" +
                        std::to_string(p) + ", " + std::to_string(q) + ")");
    }
  }

  friend bool operator==(const TwoArmPolicy&, const TwoArmPolicy&) = default;
};

/// Row-stochastic matrix; entry (i, j) is the probability that a type-i
/// user is shown arm j.
class PolicyMatrix {
 public:
  static constexpr double kRowTolerance = 1e-9;

  PolicyMatrix(std::size_t arms, std::vector<double> row_major)
      : arms_(arms), probs_(std::move(row_major)) {
    if (arms_ < 2 || probs_.size() != arms_ * arms_) {
      throw DimensionError("policy matrix must be N x N with N >= 2");
    }
    for (Index i = 0; i < arms_; ++i) {
      double sum = 0.0;
      for (Index j = 0; j < arms_; ++j) {
        const double v = (*this)(i, j);
        if (!std::isfinite(v) || v < 0.0) {
          throw DomainError(detail::cell_name("P", i, j) + " = " +
                            std::to_string(v) + " is negative");
        }
        sum += v;
      }
      if (std::abs(sum - 1.0) > kRowTolerance) {
        throw DomainError("row " + std::to_string(i) +
                          " of the policy matrix sums to " +
                          std::to_string(sum) + ", expected 1");
      }
    }
  }

  /// Deterministic policy: type i is always shown `arm_for_type[i]`.
  static PolicyMatrix deterministic(std::span<const Index> arm_for_type) {
    const std::size_t n = arm_for_type.size();
    std::vector<double> probs(n * n, 0.0);
    for (Index i = 0; i < n; ++i) {
      if (arm_for_type[i] >= n) throw DimensionError("arm index out of range");
      probs[i * n + arm_for_type[i]] = 1.0;
    }
    return PolicyMatrix(n, std::move(probs));
  }

  static PolicyMatrix from_two_arm(const TwoArmPolicy& policy) {
    return PolicyMatrix(2, {policy.p, 1.0 - policy.p, 1.0 - policy.q, policy.q});
  }

  std::size_t arms() const { return arms_; }
  double operator()(Index type, Index arm) const { return probs_[type * arms_ + arm]; }
  std::span<const double> row(Index type) const {
    return std::span<const double>(probs_).subspan(type * arms_, arms_);
  }

  friend bool operator==(const PolicyMatrix&, const PolicyMatrix&) = default;

 private:
  std::size_t arms_;
  std::vector<double> probs_;
};

/// Distances of the two row sums from 1; they scale every regret term.
struct Gaps {
  double delta1 = 0.0;
  double delta2 = 0.0;
};

/// Rates at which type-0 balls leave (d1) and arrive (d2) under a fixed
/// two-arm policy.
struct DriftPair {
  double d1 = 0.0;
  double d2 = 0.0;

  double total() const { return d1 + d2; }
  /// Expected dynamics frozen: every z is a fixed point.
  bool degenerate() const { return d1 + d2 == 0.0; }
};

inline Gaps gaps(const RewardMatrix& b) {
  b.require_two_arm("gaps");
  return {std::abs(b(0, 0) + b(0, 1) - 1.0), std::abs(b(1, 1) + b(1, 0) - 1.0)};
}

inline DriftPair drift(const RewardMatrix& b, const TwoArmPolicy& policy) {
  b.require_two_arm("drift");
  const double p = policy.p;
  const double q = policy.q;
  return {p * (1.0 - b(0, 0)) + (1.0 - p) * b(0, 1),
          q * (1.0 - b(1, 1)) + (1.0 - q) * b(1, 0)};
}

/// Beta posteriors over every (type, arm) reward mean, starting from
/// uniform Beta(1, 1) priors.
class PosteriorState {
 public:
  explicit PosteriorState(std::size_t arms)
      : arms_(arms), alpha_(arms * arms, 1.0), beta_(arms * arms, 1.0) {
    if (arms < 2) throw DimensionError("posterior needs at least 2 arms");
  }

  PosteriorState(std::size_t arms, std::vector<double> alpha, std::vector<double> beta)
      : arms_(arms), alpha_(std::move(alpha)), beta_(std::move(beta)) {
    if (arms < 2 || alpha_.size() != arms * arms || beta_.size() != arms * arms) {
      throw DimensionError("posterior parameters must be N x N with N >= 2");
    }
    for (Index k = 0; k < alpha_.size(); ++k) {
      if (!(alpha_[k] >= 1.0) || !(beta_[k] >= 1.0)) {
        throw DomainError("Beta parameters must be >= 1");
      }
    }
  }

  std::size_t arms() const { return arms_; }
  double alpha(Index type, Index arm) const { return alpha_[type * arms_ + arm]; }
  double beta(Index type, Index arm) const { return beta_[type * arms_ + arm]; }

  /// Number of Bernoulli observations folded into cell (type, arm).
  double observations(Index type, Index arm) const {
    return alpha(type, arm) + beta(type, arm) - 2.0;
  }

  void observe(Index type, Index arm, bool reward) {
    const Index k = type * arms_ + arm;
    if (reward) {
      alpha_[k] += 1.0;
    } else {
      beta_[k] += 1.0;
    }
  }

 private:
  std::size_t arms_;
  std::vector<double> alpha_;
  std::vector<double> beta_;
};

/// Popularity of two competing recommenders: row = user type, column =
/// recommender. Routing probabilities are row-normalised entries.
class PopularityMatrix {
 public:
  PopularityMatrix() : PopularityMatrix(1.0, 1.0, 1.0, 1.0) {}
  PopularityMatrix(double p11, double p12, double p21, double p22)
      : counts_{p11, p12, p21, p22} {
    for (Index k = 0; k < 4; ++k) {
      if (!std::isfinite(counts_[k]) || counts_[k] <= 0.0) {
        throw DomainError(detail::cell_name("popularity", k / 2, k % 2) +
                          " must be strictly positive");
      }
    }
  }

  double operator()(Index type, Index system) const { return counts_[type * 2 + system]; }

  /// Probability that a user of `type` picks `system`.
  double share(Index type, Index system) const {
    return (*this)(type, system) / ((*this)(type, 0) + (*this)(type, 1));
  }

  double total() const { return counts_[0] + counts_[1] + counts_[2] + counts_[3]; }

  /// The serving system gains one unit on reward, the other system on no
  /// reward; exactly one unit is added to the arriving type's row.
  void record_service(Index type, Index serving_system, bool reward) {
    const Index winner = reward ? serving_system : 1 - serving_system;
    counts_[type * 2 + winner] += 1.0;
  }

 private:
  double counts_[4];
};

/// Per-step log of one episode. Entry k describes step t = k + 1: the
/// decision and reward of that step and z1 after the urn update.
struct TrajectoryRecord {
  double z1_initial = 0.0;
  std::vector<double> z1;
  std::vector<double> per_step_regret;
  std::vector<double> cumulative_regret;
  std::vector<std::uint32_t> action;
  std::vector<std::uint32_t> user_type;
  std::vector<std::uint8_t> reward;

  std::size_t steps() const { return z1.size(); }

  void reserve(std::size_t n) {
    z1.reserve(n);
    per_step_regret.reserve(n);
    cumulative_regret.reserve(n);
    action.reserve(n);
    user_type.reserve(n);
    reward.reserve(n);
  }

  void append(double z1_after, double regret, Index arm, Index type, bool rewarded) {
    const double previous = cumulative_regret.empty() ? 0.0 : cumulative_regret.back();
    z1.push_back(z1_after);
    per_step_regret.push_back(regret);
    cumulative_regret.push_back(previous + regret);
    action.push_back(static_cast<std::uint32_t>(arm));
    user_type.push_back(static_cast<std::uint32_t>(type));
    reward.push_back(rewarded ? 1 : 0);
  }
};

}  // namespace prefshape
