#pragma once

// Two-world signal model, posteriors, and the agent decision rules.
//
// World A is the better action by convention. Agents share a uniform prior,
// observe the informative part of the action history, receive one private
// signal of strength p, and pick the action with the larger expected payoff.
// An indifferent agent follows its own signal.

#include <cstdint>
#include <string_view>

namespace cascade {

enum class WorldState { WorldA, WorldB };
enum class Signal { SignalA, SignalB };
enum class Action { ActionA, ActionB };

constexpr WorldState flip(WorldState w) {
  return w == WorldState::WorldA ? WorldState::WorldB : WorldState::WorldA;
}
constexpr Signal flip(Signal s) {
  return s == Signal::SignalA ? Signal::SignalB : Signal::SignalA;
}
constexpr Action flip(Action a) {
  return a == Action::ActionA ? Action::ActionB : Action::ActionA;
}

/// The action an agent takes when following signal `s`.
constexpr Action action_for(Signal s) {
  return s == Signal::SignalA ? Action::ActionA : Action::ActionB;
}

/// Probability that a private signal names the true world. Always in (1/2, 1).
class SignalStrength {
 public:
  /// Throws std::invalid_argument unless 0.5 < p < 1.0.
  explicit SignalStrength(double p);

  double value() const { return p_; }
  /// (1 - p) / p, always in (0, 1).
  double odds_against() const { return (1.0 - p_) / p_; }

 private:
  double p_;
};

/// Net payoff for choosing the correct action.
class Reward {
 public:
  /// Throws std::invalid_argument for negative or non-finite values.
  explicit Reward(double r);

  double value() const { return r_; }
  bool positive() const { return r_ > 0.0; }

 private:
  double r_;
};

struct Belief {
  double prob_world_A = 0.5;
  double prob_world_B = 0.5;
};

struct InformativeCounts;

/// Pr{s | w}: p if the signal names w, else 1 - p.
double signal_likelihood(Signal s, WorldState w, SignalStrength p);

class RandomStream;

/// Draws one signal from the stream; matches `w` with probability p.
Signal sample_signal(WorldState w, SignalStrength p, RandomStream& rng);

/// Posterior over worlds for an agent holding `s` after the informative
/// history summarised by `counts`. With d = nA - nB, q = (1-p)/p and
/// sigma = +1 for SignalA, -1 for SignalB:  Pr{A} = 1 / (1 + q^(d + sigma)).
Belief posterior_world_A(Signal s, const InformativeCounts& counts,
                         SignalStrength p);

/// Integer form of the unsubsidised rule: d >= 2 -> A, d <= -2 -> B,
/// otherwise follow the signal.
Action decide_unsubsidized(Signal s, const InformativeCounts& counts,
                           SignalStrength p);

/// Absolute tie tolerance on utilities: 1e-9 * max(R, 1).
double tie_tolerance(Reward R);

/// Expected-utility rule with a payment `r` attached to action A:
///   u_A = r + R Pr{A | s, H},  u_B = R Pr{B | s, H}.
/// Utilities within tie_tolerance(R) of each other resolve to the signal.
/// Throws std::invalid_argument for negative or non-finite r.
Action decide_subsidized(Signal s, const InformativeCounts& counts,
                         SignalStrength p, Reward R, double r);

std::string_view to_string(WorldState w);
std::string_view to_string(Signal s);
std::string_view to_string(Action a);

}  // namespace cascade
