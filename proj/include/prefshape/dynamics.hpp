#pragma once

// One-step evolution of the preference urn.
//
// DID (decreasing influence): one ball is added per step, so the urn grows
// and each step moves the proportions less. CID (constant influence, voter
// model): the urn size is fixed and at most one ball changes colour.

#include <string>
#include <string_view>

#include "prefshape/model.hpp"
#include "prefshape/random.hpp"

namespace prefshape {

enum class Dynamics { Did, Cid };

inline std::string_view to_string(Dynamics d) { return d == Dynamics::Did ? "did" : "cid"; }

inline Dynamics parse_dynamics(std::string_view name) {
  if (name == "did") return Dynamics::Did;
  if (name == "cid") return Dynamics::Cid;
  throw ConfigError("unknown dynamics '" + std::string(name) + "' (expected did or cid)");
}

struct StepOutcome {
  Index user_type;
  Index arm;
  bool reward;
  UrnState new_state;
};

/// Draws the type of the arriving user: type i with probability z_i.
inline Index sample_user(const UrnState& state, RandomSource& rng) {
  const std::int64_t total = state.total();
  if (total <= 0) throw StateError("cannot draw a user from an empty urn");
  const auto ball = static_cast<std::int64_t>(rng.index(static_cast<Index>(total)));
  std::int64_t seen = 0;
  for (Index i = 0; i < state.colors(); ++i) {
    seen += state.count(i);
    if (ball < seen) return i;
  }
  return state.colors() - 1;  // unreachable
}

namespace detail {

inline void check_indices(const UrnState& state, Index type, Index arm) {
  if (type >= state.colors() || arm >= state.colors()) {
    throw DimensionError("type/arm index out of range for a " +
                         std::to_string(state.colors()) + "-colour urn");
  }
}

}  // namespace detail

/// Growing-urn update. A rewarded recommendation adds a ball of the shown
/// arm's colour; an unrewarded one of a foreign arm adds the user's own
/// colour; an unrewarded own-arm recommendation adds a uniformly chosen
/// other colour (the other colour when N = 2, so no randomness is drawn).
inline UrnState step_did(const UrnState& state, Index type, Index arm, bool reward,
                         RandomSource& rng) {
  detail::check_indices(state, type, arm);
  if (reward) return state.with_ball_added(arm);
  if (arm != type) return state.with_ball_added(type);
  const std::size_t n = state.colors();
  if (n == 2) return state.with_ball_added(1 - type);
  Index other = rng.index(n - 1);
  if (other >= type) ++other;
  return state.with_ball_added(other);
}

/// Voter-model update for two colours. A ball of the user's colour flips
/// when a foreign arm is liked or the own arm is disliked. An empty colour
/// cannot lose a ball, so the flip is skipped.
inline UrnState step_cid(const UrnState& state, Index type, Index arm, bool reward) {
  if (state.colors() != 2) {
    throw UnsupportedDynamicsError("constant-influence dynamics are defined for 2 types only");
  }
  detail::check_indices(state, type, arm);
  const bool flip = (arm != type) == reward;
  if (!flip || state.count(type) == 0) return state.advanced();
  return state.with_ball_recolored(type, 1 - type);
}

inline UrnState step(Dynamics dynamics, const UrnState& state, Index type, Index arm,
                     bool reward, RandomSource& rng) {
  return dynamics == Dynamics::Did ? step_did(state, type, arm, reward, rng)
                                   : step_cid(state, type, arm, reward);
}

}  // namespace prefshape
