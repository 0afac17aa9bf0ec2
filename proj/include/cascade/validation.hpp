#pragma once

// Property suites and acceptance checks shared by `cascade_lab validate`
// and the acceptance test binary.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cascade/model.hpp"
#include "cascade/walk.hpp"

namespace cascade {

struct CriterionResult {
  std::string id;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  /// Wall-clock budget; 0 for none. Exceeding it fails the criterion.
  double budget_seconds = 0.0;
};

using DecisionRule =
    std::function<Action(Signal, const InformativeCounts&, SignalStrength)>;

/// Exact-rational Bayes decision for p = numerator / 100 after a history of
/// signal-following actions: A when the posterior of world A exceeds 1/2,
/// B when it is below, the signal on a tie.
Action bayes_threshold_decision(Signal s, std::int64_t history_a,
                                std::int64_t history_b, int p_percent);

/// Integer percentages of the default p grid: 51, 55, ..., 99.
std::vector<int> p_grid_percent();

CriterionResult check_signal_following_exhaustion(std::int64_t deepest_d = -40);
CriterionResult check_walk_equivalence(int max_length = 12,
                                       const DecisionRule& rule = {});
CriterionResult check_wrong_cascade_rate(std::int64_t reps = 20000,
                                         int threads = 0);
CriterionResult check_onset_time(std::int64_t reps = 20000, int threads = 0);
CriterionResult check_escape_budget(std::int64_t reps = 10000);
CriterionResult check_post_subsidy_stability(std::int64_t runs = 10000);
CriterionResult check_figure_correct_cascades(int threads = 0);
CriterionResult check_figure_subsidy_progression(int threads = 0);
CriterionResult check_sweep_determinism(const std::vector<int>& thread_counts);

struct ValidationOptions {
  bool quick = false;
  int threads = 0;
};

std::vector<CriterionResult> run_validation(const ValidationOptions& options);

nlohmann::json to_json(const std::vector<CriterionResult>& results);

}  // namespace cascade
