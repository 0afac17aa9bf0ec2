#include "cascade/walk.hpp"

#include <stdexcept>

namespace cascade {

InformativeCounts InformativeCounts::make(std::int64_t nA, std::int64_t nB) {
  if (nA < 0 || nB < 0) {
    throw std::invalid_argument("informative counts must be non-negative");
  }
  return {nA, nB};
}

InformativeCounts InformativeCounts::at(std::int64_t d) {
  return d >= 0 ? InformativeCounts{d, 0} : InformativeCounts{0, -d};
}

InformativeCounts update_counts(const InformativeCounts& counts, Action a,
                                bool acted_on_signal) {
  if (!acted_on_signal) return counts;
  InformativeCounts next = counts;
  if (a == Action::ActionA) {
    ++next.nA;
  } else {
    ++next.nB;
  }
  return next;
}

std::string_view to_string(Phase ph) {
  switch (ph) {
    case Phase::FollowSignal: return "FollowSignal";
    case Phase::CorrectCascade: return "CorrectCascade";
    case Phase::IncorrectCascade: return "IncorrectCascade";
  }
  return "FollowSignal";
}

}  // namespace cascade
