#pragma once

// Episode runner, Monte Carlo harness and the two-recommender simulation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <thread>
#include <type_traits>
#include <variant>
#include <vector>

#include "prefshape/analysis.hpp"
#include "prefshape/dynamics.hpp"
#include "prefshape/model.hpp"
#include "prefshape/policies.hpp"
#include "prefshape/random.hpp"

namespace prefshape {

inline constexpr std::uint64_t kDefaultSeed = 20210601;
inline constexpr std::int64_t kDefaultBallsPerColor = 10;

inline std::vector<std::int64_t> default_initial_counts(std::size_t colors) {
  return std::vector<std::int64_t>(colors, kDefaultBallsPerColor);
}

// ---------------------------------------------------------------------------
// Runtime policy state

/// Owns the learner state of one episode and turns a PolicySpec into arm
/// choices. Each decision also reports the one-step regret of the policy
/// parameters actually in force at that step.
class PolicyRunner {
 public:
  struct Decision {
    Index arm;
    double regret;
  };

  PolicyRunner(const PolicySpec& spec, const RewardMatrix& reward) : reward_(reward) {
    std::visit([this](const auto& s) { init(s); }, spec);
  }

  Decision decide(std::size_t t, const UrnState& state, Index type, RandomSource& rng) {
    return std::visit([&](auto& s) { return decide(s, t, state, type, rng); }, state_);
  }

  void observe(Index type, Index arm, bool reward) {
    std::visit(
        [&](auto& s) {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, EtcState> || std::is_same_v<S, TsState> ||
                        std::is_same_v<S, NArmTs>) {
            learner(s).update(type, arm, reward);
          }
        },
        state_);
  }

 private:
  struct NArmTs {
    TsState ts;
  };
  using State = std::variant<TwoArmPolicy, EtcState, TsState, PolicyMatrix, NArmTs>;

  static TsState& learner(NArmTs& s) { return s.ts; }
  template <class S>
  static S& learner(S& s) { return s; }

  void init(const policy::Fixed& f) { state_ = f.params; }
  void init(const policy::OptimalKnownB&) { state_ = optimal_policy_2arm(reward_); }
  void init(const policy::Etc& e) { state_ = EtcState(e.m, e.estimator); }
  void init(const policy::Thompson&) { state_ = TsState(2); }
  void init(const policy::NArmMatrix& m) { state_ = m.probs; }
  void init(const policy::NArmOptimal&) { state_ = optimal_policy_narm(reward_); }
  void init(const policy::NArmThompson&) { state_ = NArmTs{TsState(reward_.arms())}; }

  Decision decide(TwoArmPolicy& params, std::size_t, const UrnState& state, Index type, RandomSource& rng) {
    const double regret = per_step_regret(reward_, state.proportion(0), params);
    return {choose_arm(params, type, rng), regret};
  }

  Decision decide(EtcState& etc, std::size_t t, const UrnState& state, Index type, RandomSource& rng) {
    const Index arm = etc.choose(t, type, rng);
    return {arm, per_step_regret(reward_, state.proportion(0), etc.parameters(t))};
  }

  Decision decide(TsState& ts, std::size_t, const UrnState& state, Index type, RandomSource& rng) {
    const auto d = ts.choose(type, rng);
    return {d.arm, per_step_regret(reward_, state.proportion(0), d.parameters)};
  }

  Decision decide(PolicyMatrix& probs, std::size_t, const UrnState& state, Index type, RandomSource& rng) {
    const auto z = state.proportions();
    const double regret = per_step_regret(reward_, z, probs);
    return {choose_arm(probs, type, rng), regret};
  }

  Decision decide(NArmTs& s, std::size_t, const UrnState& state, Index type, RandomSource& rng) {
    const auto arms = optimal_arms_narm(s.ts.sample(rng));
    const auto z = state.proportions();
    return {arms[type], per_step_regret(reward_, z, PolicyMatrix::deterministic(arms))};
  }

  RewardMatrix reward_;
  State state_;
};

// ---------------------------------------------------------------------------
// Configuration

struct SimConfig {
  SimConfig(RewardMatrix b, PolicySpec p)
      : reward(std::move(b)), policy(std::move(p)), initial_counts(default_initial_counts(reward.arms())) {}

  Dynamics dynamics = Dynamics::Did;
  RewardMatrix reward;
  PolicySpec policy;
  std::size_t horizon = 1000;
  std::vector<std::int64_t> initial_counts;
  std::size_t replications = 1000;
  std::uint64_t base_seed = kDefaultSeed;

  std::size_t arms() const { return reward.arms(); }

  std::int64_t n0() const {
    std::int64_t n = 0;
    for (auto c : initial_counts) n += c;
    return n;
  }

  void validate() const {
    if (horizon < 1) throw ConfigError("horizon must be at least 1");
    if (replications < 1) throw ConfigError("replications must be at least 1");
    if (initial_counts.size() != arms()) {
      throw ConfigError("initial_counts has " + std::to_string(initial_counts.size()) + " entries for " +
                        std::to_string(arms()) + " arms");
    }
    for (Index i = 0; i < initial_counts.size(); ++i) {
      if (initial_counts[i] < 0) throw ConfigError("initial_counts[" + std::to_string(i) + "] is negative");
    }
    if (n0() < 1) throw ConfigError("initial urn must contain at least one ball");
    if (dynamics == Dynamics::Cid && arms() != 2) {
      throw UnsupportedDynamicsError("constant-influence dynamics are defined for 2 arms only");
    }
    if (is_two_arm_only(policy) && arms() != 2) {
      throw ConfigError("policy '" + policy_label(policy) + "' needs a 2x2 reward matrix");
    }
    if (const auto* m = std::get_if<policy::NArmMatrix>(&policy); m && m->probs.arms() != arms()) {
      throw ConfigError("policy matrix size does not match the reward matrix");
    }
    if (const auto* e = std::get_if<policy::Etc>(&policy); e && e->m > horizon) {
      throw ConfigError("ETC exploration length exceeds the horizon");
    }
  }
};

// ---------------------------------------------------------------------------
// Episodes

/// Runs one episode of `config.horizon` steps from the initial urn.
inline TrajectoryRecord run_episode(const SimConfig& config, std::uint64_t seed) {
  config.validate();
  RandomSource rng(seed);
  UrnState state(config.initial_counts);
  PolicyRunner runner(config.policy, config.reward);

  TrajectoryRecord record;
  record.reserve(config.horizon);
  record.z1_initial = state.proportion(0);
  for (std::size_t t = 1; t <= config.horizon; ++t) {
    const Index type = sample_user(state, rng);
    const auto decision = runner.decide(t, state, type, rng);
    const bool reward = rng.bernoulli(config.reward(type, decision.arm));
    state = step(config.dynamics, state, type, decision.arm, reward, rng);
    runner.observe(type, decision.arm, reward);
    record.append(state.proportion(0), decision.regret, decision.arm, type, reward);
  }
  return record;
}

/// Replication statistics, step k describing t = k + 1.
struct AggregateResult {
  std::size_t replications = 0;
  std::size_t arms = 0;
  double z1_initial = 0.0;
  std::vector<double> z1_mean;
  std::vector<double> z1_std;
  std::vector<double> regret_mean;
  std::vector<double> cumregret_mean;
  std::vector<double> final_z1;         // one per replication
  std::vector<double> final_cumregret;  // one per replication
  std::vector<std::uint64_t> arm_counts;  // arms x arms, row = user type

  std::size_t steps() const { return z1_mean.size(); }

  /// Fraction of type-i arrivals that were shown arm i, over all
  /// replications. NaN when the type never arrived.
  double own_arm_fraction(Index type) const {
    std::uint64_t total = 0;
    for (Index j = 0; j < arms; ++j) total += arm_counts[type * arms + j];
    if (total == 0) return std::numeric_limits<double>::quiet_NaN();
    return static_cast<double>(arm_counts[type * arms + type]) / static_cast<double>(total);
  }
};

namespace detail {

inline constexpr std::size_t kReductionBlock = 64;

/// Runs `run(r)` for r in [0, count) on up to `threads` threads, block by
/// block, and hands each result to `fold` in index order. The fold order
/// never depends on the thread count.
template <class Run, class Fold>
void for_each_replication(std::size_t count, std::size_t threads, Run run, Fold fold) {
  using Episode = std::invoke_result_t<Run&, std::size_t>;
  threads = std::max<std::size_t>(1, threads);
  for (std::size_t begin = 0; begin < count; begin += kReductionBlock) {
    const std::size_t end = std::min(count, begin + kReductionBlock);
    std::vector<Episode> block(end - begin);
    if (threads == 1) {
      for (std::size_t r = begin; r < end; ++r) block[r - begin] = run(r);
    } else {
      std::vector<std::jthread> workers;
      const std::size_t n = std::min(threads, end - begin);
      for (std::size_t w = 0; w < n; ++w) {
        workers.emplace_back([&, w] {
          for (std::size_t r = begin + w; r < end; r += n) block[r - begin] = run(r);
        });
      }
    }
    for (std::size_t r = begin; r < end; ++r) fold(block[r - begin]);
  }
}

/// Accumulates trajectory records in replication order.
class Accumulator {
 public:
  Accumulator(std::size_t steps, std::size_t arms, std::size_t replications)
      : z1_sum_(steps, 0.0), z1_sq_sum_(steps, 0.0), regret_sum_(steps, 0.0), cumregret_sum_(steps, 0.0) {
    result_.arms = arms;
    result_.arm_counts.assign(arms * arms, 0);
    result_.final_z1.reserve(replications);
    result_.final_cumregret.reserve(replications);
  }

  void add(const TrajectoryRecord& rec) {
    if (result_.replications == 0) result_.z1_initial = rec.z1_initial;
    for (std::size_t k = 0; k < rec.steps(); ++k) {
      z1_sum_[k] += rec.z1[k];
      z1_sq_sum_[k] += rec.z1[k] * rec.z1[k];
      regret_sum_[k] += rec.per_step_regret[k];
      cumregret_sum_[k] += rec.cumulative_regret[k];
      ++result_.arm_counts[rec.user_type[k] * result_.arms + rec.action[k]];
    }
    result_.final_z1.push_back(rec.z1.back());
    result_.final_cumregret.push_back(rec.cumulative_regret.back());
    ++result_.replications;
  }

  AggregateResult finish() && {
    const std::size_t steps = z1_sum_.size();
    const double n = static_cast<double>(result_.replications);
    result_.z1_mean.resize(steps);
    result_.z1_std.resize(steps);
    result_.regret_mean.resize(steps);
    result_.cumregret_mean.resize(steps);
    for (std::size_t k = 0; k < steps; ++k) {
      const double mean = z1_sum_[k] / n;
      result_.z1_mean[k] = mean;
      result_.z1_std[k] =
          result_.replications > 1 ? std::sqrt(std::max(0.0, (z1_sq_sum_[k] - n * mean * mean) / (n - 1.0))) : 0.0;
      result_.regret_mean[k] = regret_sum_[k] / n;
      result_.cumregret_mean[k] = cumregret_sum_[k] / n;
    }
    return std::move(result_);
  }

 private:
  AggregateResult result_;
  std::vector<double> z1_sum_;
  std::vector<double> z1_sq_sum_;
  std::vector<double> regret_sum_;
  std::vector<double> cumregret_sum_;
};

}  // namespace detail

/// Replication r runs with seed base_seed + r. The aggregate is a pure
/// function of the config: thread count and scheduling do not change a bit.
inline AggregateResult run_monte_carlo(const SimConfig& config, std::size_t threads = 1) {
  config.validate();
  detail::Accumulator acc(config.horizon, config.arms(), config.replications);
  detail::for_each_replication(
      config.replications, threads, [&](std::size_t r) { return run_episode(config, config.base_seed + r); },
      [&](const TrajectoryRecord& rec) { acc.add(rec); });
  return std::move(acc).finish();
}

// ---------------------------------------------------------------------------
// Two competing recommenders

/// Shaping-optimal policy of the recommender that wants to grow type 1:
/// the two-arm optimum of the relabelled matrix, mapped back.
inline TwoArmPolicy opposing_optimal_policy(const RewardMatrix& b) {
  const auto mirrored = optimal_policy_2arm(b.relabeled());
  // Relabelled p is P(arm 1 | type 1) and q is P(arm 0 | type 0).
  return {mirrored.q, mirrored.p};
}

struct CompetingConfig {
  explicit CompetingConfig(RewardMatrix b)
      : reward(std::move(b)),
        policy1(optimal_policy_2arm(reward)),
        policy2(opposing_optimal_policy(reward)),
        initial_counts(default_initial_counts(2)) {}

  RewardMatrix reward;
  TwoArmPolicy policy1;  // S1, grows type 0
  TwoArmPolicy policy2;  // S2, grows type 1
  PopularityMatrix initial_popularity;
  Dynamics dynamics = Dynamics::Did;
  std::size_t horizon = 1000;
  std::vector<std::int64_t> initial_counts;
  std::size_t replications = 1000;
  std::uint64_t base_seed = kDefaultSeed;

  std::int64_t n0() const { return initial_counts.empty() ? 0 : initial_counts[0] + initial_counts[1]; }

  void validate() const {
    reward.require_two_arm("competing recommenders");
    if (horizon < 1) throw ConfigError("horizon must be at least 1");
    if (replications < 1) throw ConfigError("replications must be at least 1");
    if (initial_counts.size() != 2) throw ConfigError("initial_counts must have 2 entries");
    if (initial_counts[0] < 0 || initial_counts[1] < 0) throw ConfigError("initial_counts must be non-negative");
    if (n0() < 1) throw ConfigError("initial urn must contain at least one ball");
  }
};

struct CompetingEpisode {
  TrajectoryRecord trajectory;
  std::vector<double> s1_share_type0;  // after each step
  std::vector<double> s1_share_type1;
  PopularityMatrix final_popularity;
};

/// One episode: the arriving user picks a recommender with probability
/// proportional to its popularity among the user's type, the recommender
/// applies its own policy, and both the urn and the popularity row move.
/// The regret column measures S1's shaping loss for the mixture of the
/// two policies the population effectively sees.
inline CompetingEpisode run_competing_episode(const CompetingConfig& config, std::uint64_t seed) {
  config.validate();
  RandomSource rng(seed);
  UrnState state(config.initial_counts);
  PopularityMatrix popularity = config.initial_popularity;
  const TwoArmPolicy* policies[2] = {&config.policy1, &config.policy2};

  CompetingEpisode ep;
  ep.trajectory.reserve(config.horizon);
  ep.s1_share_type0.reserve(config.horizon);
  ep.s1_share_type1.reserve(config.horizon);
  ep.trajectory.z1_initial = state.proportion(0);
  for (std::size_t t = 1; t <= config.horizon; ++t) {
    const double s0 = popularity.share(0, 0);
    const double s1 = popularity.share(1, 0);
    const TwoArmPolicy effective{s0 * config.policy1.p + (1.0 - s0) * config.policy2.p,
                                 s1 * config.policy1.q + (1.0 - s1) * config.policy2.q};
    const double regret = per_step_regret(config.reward, state.proportion(0), effective);

    const Index type = sample_user(state, rng);
    const Index system = rng.bernoulli(popularity.share(type, 0)) ? 0 : 1;
    const Index arm = choose_arm(*policies[system], type, rng);
    const bool reward = rng.bernoulli(config.reward(type, arm));
    popularity.record_service(type, system, reward);
    state = step(config.dynamics, state, type, arm, reward, rng);

    ep.trajectory.append(state.proportion(0), regret, arm, type, reward);
    ep.s1_share_type0.push_back(popularity.share(0, 0));
    ep.s1_share_type1.push_back(popularity.share(1, 0));
  }
  ep.final_popularity = popularity;
  return ep;
}

struct CompetingResult {
  AggregateResult population;
  std::vector<double> s1_share_type0_mean;
  std::vector<double> s1_share_type1_mean;
  std::vector<PopularityMatrix> final_popularity;  // one per replication
};

inline CompetingResult run_competing(const CompetingConfig& config, std::size_t threads = 1) {
  config.validate();
  detail::Accumulator acc(config.horizon, 2, config.replications);
  CompetingResult result;
  result.s1_share_type0_mean.assign(config.horizon, 0.0);
  result.s1_share_type1_mean.assign(config.horizon, 0.0);
  result.final_popularity.reserve(config.replications);
  detail::for_each_replication(
      config.replications, threads,
      [&](std::size_t r) { return run_competing_episode(config, config.base_seed + r); },
      [&](const CompetingEpisode& ep) {
        acc.add(ep.trajectory);
        for (std::size_t k = 0; k < config.horizon; ++k) {
          result.s1_share_type0_mean[k] += ep.s1_share_type0[k];
          result.s1_share_type1_mean[k] += ep.s1_share_type1[k];
        }
        result.final_popularity.push_back(ep.final_popularity);
      });
  const double n = static_cast<double>(config.replications);
  for (std::size_t k = 0; k < config.horizon; ++k) {
    result.s1_share_type0_mean[k] /= n;
    result.s1_share_type1_mean[k] /= n;
  }
  result.population = std::move(acc).finish();
  return result;
}

}  // namespace prefshape
