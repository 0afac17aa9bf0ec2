#include "cascade/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cascade/rng.hpp"
#include "cascade/walk.hpp"

namespace cascade {

SignalStrength::SignalStrength(double p) : p_(p) {
  if (!(p > 0.5 && p < 1.0)) {
    throw std::invalid_argument("signal strength p must satisfy 0.5 < p < 1.0, got " +
                                std::to_string(p));
  }
}

Reward::Reward(double r) : r_(r) {
  if (!(r >= 0.0) || !std::isfinite(r)) {
    throw std::invalid_argument("reward R must be finite and >= 0, got " +
                                std::to_string(r));
  }
}

double signal_likelihood(Signal s, WorldState w, SignalStrength p) {
  const bool matches = (s == Signal::SignalA) == (w == WorldState::WorldA);
  return matches ? p.value() : 1.0 - p.value();
}

Signal sample_signal(WorldState w, SignalStrength p, RandomStream& rng) {
  const bool correct = rng.next_unit() < p.value();
  const Signal truthful =
      w == WorldState::WorldA ? Signal::SignalA : Signal::SignalB;
  return correct ? truthful : flip(truthful);
}

namespace {

// Pr{A} = 1 / (1 + q^k) evaluated without overflow for any integer k.
Belief logistic_in_q(double q, std::int64_t k) {
  Belief b;
  if (k >= 0) {
    const double x = std::pow(q, static_cast<double>(k));
    b.prob_world_A = 1.0 / (1.0 + x);
    b.prob_world_B = x / (1.0 + x);
  } else {
    const double y = std::pow(q, static_cast<double>(-k));
    b.prob_world_A = y / (1.0 + y);
    b.prob_world_B = 1.0 / (1.0 + y);
  }
  return b;
}

std::int64_t sigma(Signal s) { return s == Signal::SignalA ? 1 : -1; }

}  // namespace

Belief posterior_world_A(Signal s, const InformativeCounts& counts,
                         SignalStrength p) {
  return logistic_in_q(p.odds_against(), counts.d() + sigma(s));
}

Action decide_unsubsidized(Signal s, const InformativeCounts& counts,
                           SignalStrength /*p*/) {
  const auto d = counts.d();
  if (d >= 2) return Action::ActionA;
  if (d <= -2) return Action::ActionB;
  return action_for(s);
}

double tie_tolerance(Reward R) { return 1e-9 * std::max(R.value(), 1.0); }

Action decide_subsidized(Signal s, const InformativeCounts& counts,
                         SignalStrength p, Reward R, double r) {
  if (!(r >= 0.0) || !std::isfinite(r)) {
    throw std::invalid_argument("subsidy r must be finite and >= 0");
  }
  const Belief b = posterior_world_A(s, counts, p);
  const double u_a = r + R.value() * b.prob_world_A;
  const double u_b = R.value() * b.prob_world_B;
  const double eps = tie_tolerance(R);
  if (u_a > u_b + eps) return Action::ActionA;
  if (u_b > u_a + eps) return Action::ActionB;
  return action_for(s);
}

std::string_view to_string(WorldState w) {
  return w == WorldState::WorldA ? "WorldA" : "WorldB";
}
std::string_view to_string(Signal s) {
  return s == Signal::SignalA ? "SignalA" : "SignalB";
}
std::string_view to_string(Action a) {
  return a == Action::ActionA ? "ActionA" : "ActionB";
}

}  // namespace cascade
