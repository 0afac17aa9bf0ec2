#pragma once

// Subsidy for action A that restores signal-following inside a wrong cascade.

#include "cascade/model.hpp"
#include "cascade/walk.hpp"

namespace cascade {

struct SubsidyBounds {
  double lower = 0.0;
  double upper = 0.0;
};

struct SubsidyQuote {
  double gamma = 1.0;
  double lower = 0.0;
  double upper = 0.0;
  double payment = 0.0;
};

/// Likelihood ratio Pr{H | B} / Pr{H | A} = ((1-p)/p)^(nA - nB).
/// Switches to log space for |d| > 300; may return +inf or 0 when the
/// result is outside double range.
double gamma(const InformativeCounts& counts, SignalStrength p);

/// Admissible payments for action A. With q = (1-p)/p:
///   lower = R (q gamma - 1) / (1 + q gamma)
///   upper = R (gamma - q) / (gamma + q)
/// Any r in [lower, upper] makes both signal holders follow their signal;
/// at r = lower the SignalA holder is exactly indifferent.
/// Throws std::invalid_argument unless R > 0 and gamma > 0.
SubsidyBounds subsidy_bounds(double gamma, SignalStrength p, Reward R);

/// Same bounds computed from the walk position without forming gamma.
/// Stays accurate for arbitrarily deep states.
SubsidyBounds subsidy_bounds_at(const InformativeCounts& counts,
                                SignalStrength p, Reward R);

/// Payment for the next agent: the lower bound inside a wrong cascade, 0
/// elsewhere. Always in [0, R). Throws std::invalid_argument unless R > 0.
double subsidy_amount(const InformativeCounts& counts, SignalStrength p,
                      Reward R);

SubsidyQuote quote(const InformativeCounts& counts, SignalStrength p,
                   Reward R);

}  // namespace cascade
