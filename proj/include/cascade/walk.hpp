#pragma once

// Informative-count random walk.
//
// Only decisions that depended on a private signal enter the counts. The
// walk position d = nA - nB fully determines the phase.

#include <cstdint>
#include <string_view>

#include "cascade/model.hpp"

namespace cascade {

struct InformativeCounts {
  std::int64_t nA = 0;
  std::int64_t nB = 0;

  /// Throws std::invalid_argument on negative counts.
  static InformativeCounts make(std::int64_t nA, std::int64_t nB);
  /// Smallest counts with the given difference: (d, 0) or (0, -d).
  static InformativeCounts at(std::int64_t d);

  std::int64_t d() const { return nA - nB; }
  std::int64_t informative_rounds() const { return nA + nB; }

  friend bool operator==(const InformativeCounts&,
                         const InformativeCounts&) = default;
};

enum class Phase { FollowSignal, CorrectCascade, IncorrectCascade };

constexpr Phase phase_of(std::int64_t d) {
  if (d >= 2) return Phase::CorrectCascade;
  if (d <= -2) return Phase::IncorrectCascade;
  return Phase::FollowSignal;
}

inline Phase phase(const InformativeCounts& counts) {
  return phase_of(counts.d());
}

/// Adds the action to the counts iff it was taken on the agent's signal.
InformativeCounts update_counts(const InformativeCounts& counts, Action a,
                                bool acted_on_signal);

/// A round is informative when agents follow signals on their own, or when
/// the subsidy makes them do so inside a wrong cascade.
constexpr bool is_informative(Phase ph, bool subsidy_active) {
  return ph == Phase::FollowSignal || subsidy_active;
}

std::string_view to_string(Phase ph);

}  // namespace cascade
