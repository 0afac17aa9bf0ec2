#pragma once

// Closed forms for the cascade walk and an exact forward DP that arbitrates
// them.
//
// Two families are exposed side by side. The `*_paper` functions evaluate
// the expressions as originally published; the `*_exact` functions are the
// gambler's-ruin values that the DP reproduces. The two disagree (see
// README, "Errata").

#include <cstdint>
#include <vector>

#include "cascade/model.hpp"

namespace cascade {

/// (1-p)^2 / p^2 as published. This is the one-barrier ruin probability.
double wrong_cascade_prob_paper(SignalStrength p);

/// q^2 / (p^2 + q^2): walk from 0 hits -2 before +2.
double wrong_cascade_prob_exact(SignalStrength p);

/// (8p - 4 - 2p^2) / (2p^3 - p^2) as published. Negative for p < 2 - sqrt 2.
double expected_onset_paper(SignalStrength p);

/// 2 / (p^2 + q^2): expected absorption time at +-2 from 0.
double expected_onset_exact(SignalStrength p);

/// 4 / (2p - 1): expected rounds for the signal-following walk to go from
/// -2 to +2.
double expected_escape_rounds(SignalStrength p);

/// R * 4 / (2p - 1). Throws std::invalid_argument unless R > 0.
double expected_budget_bound(SignalStrength p, Reward R);

struct OracleResult {
  double prob_wrong_cascade = 0.0;
  double prob_correct_cascade = 0.0;
  double prob_no_cascade_at_T = 0.0;
  /// Unsubsidised walk: expected rounds until |d| = 2 (0 when subsidised).
  double expected_onset = 0.0;
  /// Subsidised walk: expected rounds from d = -2 until d = +2.
  double expected_escape_rounds = 0.0;
  /// Subsidised walk: expected rounds with d <= -2, i.e. with a payment.
  double expected_subsidized_rounds = 0.0;
  double expected_budget = 0.0;
  /// Mass removed at the lower truncation boundary.
  double truncation_leakage = 0.0;
  /// Largest |total mass - 1| seen over all DP steps.
  double max_mass_defect = 0.0;
  std::int64_t steps = 0;
};

struct OracleOptions {
  std::int64_t horizon = 100000;
  bool subsidized = false;
  std::int64_t lower_truncation = 60;
  /// Reward used to price subsidised rounds.
  double reward = 1.0;
  /// Subsidised walk only: stop early once the live mass drops below this.
  double live_mass_cutoff = 1e-16;
};

/// Exact forward DP over walk positions.
///
/// Unsubsidised: start at 0, absorb at -2 and +2, run `horizon` steps.
/// Subsidised: start at -2, absorb at +2 only, remove mass that reaches
/// -lower_truncation, and weight every d <= -2 occupation by the payment.
/// In the subsidised result, prob_wrong_cascade is the live mass with
/// d <= -2 at the end plus the leaked mass.
///
/// Throws std::invalid_argument if horizon < 1, lower_truncation < 10, or
/// the measured leakage exceeds 1e-6.
OracleResult dp_oracle(SignalStrength p, const OracleOptions& options);

/// Truncation depth whose gambler's-ruin leakage from -2 is below `leak`.
std::int64_t truncation_for(SignalStrength p, double leak = 1e-13);

/// Expected payment in each round t = 1..num_agents of a subsidised run
/// started at d = 0. Exact within the given truncation.
std::vector<double> expected_subsidy_by_round(SignalStrength p, Reward R,
                                              std::int64_t num_agents,
                                              std::int64_t lower_truncation);

struct ClosedFormReport {
  double paper_value = 0.0;
  double rederived_value = 0.0;
  double oracle_value = 0.0;
  bool agree_paper = false;
  bool agree_rederived = false;
};

/// Agreement uses relative tolerance 1e-9 against the oracle value.
ClosedFormReport make_report(double paper_value, double rederived_value,
                             double oracle_value);

struct OracleRow {
  double p = 0.0;
  ClosedFormReport wrong_cascade;
  ClosedFormReport onset;
  /// Escape time: closed form is both the published and the
  /// re-derived value.
  ClosedFormReport escape_rounds;
  double expected_subsidized_rounds = 0.0;
  double expected_budget = 0.0;
  double budget_bound = 0.0;
  double truncation_leakage = 0.0;
};

/// Everything the `oracle` subcommand prints for one p (R = 1).
OracleRow oracle_row(SignalStrength p);

}  // namespace cascade
