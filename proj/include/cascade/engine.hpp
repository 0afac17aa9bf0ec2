#pragma once

// One sequential population run with the optional subsidy mechanism.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "cascade/model.hpp"
#include "cascade/walk.hpp"

namespace cascade {

struct SimConfig {
  std::int64_t num_agents = 1;
  SignalStrength p{0.75};
  Reward R{1.0};
  bool subsidy_enabled = false;
  WorldState world = WorldState::WorldA;
  std::uint64_t seed = 0;
  /// Walk state before agent 1 acts. (0, 0) for a fresh population.
  InformativeCounts initial_counts{};

  /// Throws std::invalid_argument if num_agents < 1.
  void validate() const;
};

struct StepRecord {
  std::int64_t t = 0;
  Signal signal = Signal::SignalA;
  Action action = Action::ActionA;
  Phase phase_before = Phase::FollowSignal;
  double subsidy_paid = 0.0;
  std::int64_t d_after = 0;
};

enum class Outcome { CorrectCascade, IncorrectCascade, NoCascade };

struct RunRecord {
  SimConfig config;
  std::vector<StepRecord> steps;
  Outcome outcome = Outcome::NoCascade;
  /// First round after which the walk sits in a cascade; 0 when the run
  /// starts inside one.
  std::optional<std::int64_t> onset_time;
  double subsidy_total = 0.0;
  std::int64_t subsidy_rounds = 0;
  std::optional<std::int64_t> subsidy_start;
};

constexpr Outcome outcome_of(Phase ph) {
  switch (ph) {
    case Phase::CorrectCascade: return Outcome::CorrectCascade;
    case Phase::IncorrectCascade: return Outcome::IncorrectCascade;
    case Phase::FollowSignal: break;
  }
  return Outcome::NoCascade;
}

/// Deterministic in `cfg`: round t consumes draw t of RandomStream(seed).
RunRecord simulate_run(const SimConfig& cfg);

/// Final-phase classification of a finished run.
Outcome classify_outcome(const RunRecord& rec);

/// Compact per-run figures used by the sweep harness. Produces exactly the
/// values simulate_run would, without materialising the step list.
struct RunSummary {
  Outcome outcome = Outcome::NoCascade;
  std::optional<std::int64_t> onset_time;
  double subsidy_total = 0.0;
  std::int64_t subsidy_rounds = 0;
  std::optional<std::int64_t> subsidy_start;
  /// (round, amount) for every paid round, in round order.
  std::vector<std::pair<std::int64_t, double>> payments;
};

RunSummary summarize_run(const SimConfig& cfg);
RunSummary summarize(const RunRecord& rec);

std::string_view to_string(Outcome o);

void to_json(nlohmann::json& j, const SimConfig& cfg);
void to_json(nlohmann::json& j, const StepRecord& step);
void to_json(nlohmann::json& j, const RunRecord& rec);

/// Serialised RunRecord, pretty-printed when indent >= 0.
std::string run_record_json(const RunRecord& rec, int indent = -1);

}  // namespace cascade
