#include "cascade/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cascade/subsidy.hpp"
#include "cascade/walk.hpp"

namespace cascade {

double wrong_cascade_prob_paper(SignalStrength p) {
  const double pv = p.value();
  const double q = 1.0 - pv;
  return (q * q) / (pv * pv);
}

double wrong_cascade_prob_exact(SignalStrength p) {
  const double pv = p.value();
  const double q = 1.0 - pv;
  return (q * q) / (pv * pv + q * q);
}

double expected_onset_paper(SignalStrength p) {
  const double pv = p.value();
  return (8.0 * pv - 4.0 - 2.0 * pv * pv) / (2.0 * pv * pv * pv - pv * pv);
}

double expected_onset_exact(SignalStrength p) {
  const double pv = p.value();
  const double q = 1.0 - pv;
  return 2.0 / (pv * pv + q * q);
}

double expected_escape_rounds(SignalStrength p) {
  return 4.0 / (2.0 * p.value() - 1.0);
}

double expected_budget_bound(SignalStrength p, Reward R) {
  if (!R.positive()) throw std::invalid_argument("budget bound needs reward R > 0");
  return R.value() * expected_escape_rounds(p);
}

namespace {

constexpr double kMaxLeakage = 1e-6;

OracleResult unsubsidized_dp(SignalStrength p, std::int64_t horizon) {
  const double up = p.value();
  const double down = 1.0 - up;
  // live[i] holds the mass at d = i - 1 for d in {-1, 0, 1}.
  double live[3] = {0.0, 1.0, 0.0};
  OracleResult res;
  double absorbed_low = 0.0;
  double absorbed_high = 0.0;
  double onset_sum = 0.0;
  std::int64_t t = 0;
  while (t < horizon) {
    ++t;
    const double to_high = live[2] * up;
    const double to_low = live[0] * down;
    const double next[3] = {live[1] * down, live[0] * up + live[2] * down,
                            live[1] * up};
    std::copy(std::begin(next), std::end(next), std::begin(live));
    absorbed_high += to_high;
    absorbed_low += to_low;
    onset_sum += static_cast<double>(t) * (to_high + to_low);
    const double total = live[0] + live[1] + live[2] + absorbed_low + absorbed_high;
    res.max_mass_defect = std::max(res.max_mass_defect, std::abs(total - 1.0));
    if (live[0] == 0.0 && live[1] == 0.0 && live[2] == 0.0) break;
  }
  res.steps = t;
  res.prob_wrong_cascade = absorbed_low;
  res.prob_correct_cascade = absorbed_high;
  res.prob_no_cascade_at_T = live[0] + live[1] + live[2];
  res.expected_onset = onset_sum;
  return res;
}

OracleResult subsidized_dp(SignalStrength p, const OracleOptions& opt) {
  const double up = p.value();
  const double down = 1.0 - up;
  const Reward R{opt.reward};
  const std::int64_t depth = opt.lower_truncation;
  // Live positions d = -depth + 1 .. 1; index i <-> d = i - depth + 1.
  const std::size_t width = static_cast<std::size_t>(depth + 1);
  const auto index_of = [depth](std::int64_t d) {
    return static_cast<std::size_t>(d + depth - 1);
  };
  std::vector<double> payment(width, 0.0);
  for (std::size_t i = 0; i < width; ++i) {
    const std::int64_t d = static_cast<std::int64_t>(i) - depth + 1;
    if (d <= -2) payment[i] = subsidy_amount(InformativeCounts::at(d), p, R);
  }
  std::vector<double> live(width, 0.0);
  std::vector<double> next(width, 0.0);
  live[index_of(-2)] = 1.0;

  OracleResult res;
  double absorbed = 0.0;
  double leaked = 0.0;
  std::int64_t t = 0;
  while (t < opt.horizon) {
    ++t;
    std::fill(next.begin(), next.end(), 0.0);
    double live_total = 0.0;
    for (std::size_t i = 0; i < width; ++i) {
      const double m = live[i];
      if (m == 0.0) continue;
      res.expected_escape_rounds += m;
      if (payment[i] > 0.0) {
        res.expected_subsidized_rounds += m;
        res.expected_budget += m * payment[i];
      }
      // Upward step.
      if (i + 1 < width) {
        next[i + 1] += m * up;
      } else {
        absorbed += m * up;
      }
      // Downward step.
      if (i > 0) {
        next[i - 1] += m * down;
      } else {
        leaked += m * down;
      }
    }
    live.swap(next);
    for (double m : live) live_total += m;
    res.max_mass_defect =
        std::max(res.max_mass_defect, std::abs(live_total + absorbed + leaked - 1.0));
    if (live_total < opt.live_mass_cutoff) break;
  }
  res.steps = t;
  res.truncation_leakage = leaked;
  res.prob_correct_cascade = absorbed;
  double wrong_live = 0.0;
  double free_live = 0.0;
  for (std::size_t i = 0; i < width; ++i) {
    (payment[i] > 0.0 ? wrong_live : free_live) += live[i];
  }
  res.prob_wrong_cascade = wrong_live + leaked;
  res.prob_no_cascade_at_T = free_live;
  if (leaked > kMaxLeakage) {
    throw std::invalid_argument("dp_oracle: truncation at -" + std::to_string(depth) +
                                " leaks " + std::to_string(leaked) +
                                " of the mass; increase lower_truncation");
  }
  return res;
}

}  // namespace

OracleResult dp_oracle(SignalStrength p, const OracleOptions& options) {
  if (options.horizon < 1) throw std::invalid_argument("dp_oracle: horizon must be >= 1");
  if (options.lower_truncation < 10) {
    throw std::invalid_argument("dp_oracle: lower_truncation must be >= 10");
  }
  if (options.subsidized) return subsidized_dp(p, options);
  return unsubsidized_dp(p, options.horizon);
}

std::int64_t truncation_for(SignalStrength p, double leak) {
  // Gambler's ruin from -2 with barriers -K and +2.
  const double ratio = (1.0 - p.value()) / p.value();
  for (std::int64_t depth = 10; depth < 1000000; ++depth) {
    const double r_start = std::pow(ratio, static_cast<double>(depth - 2));
    const double r_top = std::pow(ratio, static_cast<double>(depth + 2));
    const double ruin = (r_start - r_top) / (1.0 - r_top);
    if (ruin < leak) return depth;
  }
  return 1000000;
}

std::vector<double> expected_subsidy_by_round(SignalStrength p, Reward R,
                                              std::int64_t num_agents,
                                              std::int64_t lower_truncation) {
  const double up = p.value();
  const double down = 1.0 - up;
  const std::int64_t depth = std::max<std::int64_t>(lower_truncation, 10);
  // Positions d = -depth + 1 .. 2, where d = 2 absorbs.
  const std::size_t width = static_cast<std::size_t>(depth + 2);
  const auto index_of = [depth](std::int64_t d) {
    return static_cast<std::size_t>(d + depth - 1);
  };
  std::vector<double> payment(width, 0.0);
  for (std::size_t i = 0; i < width; ++i) {
    const std::int64_t d = static_cast<std::int64_t>(i) - depth + 1;
    payment[i] = subsidy_amount(InformativeCounts::at(d), p, R);
  }
  std::vector<double> live(width, 0.0);
  std::vector<double> next(width, 0.0);
  live[index_of(0)] = 1.0;
  const std::size_t top = index_of(2);

  std::vector<double> by_round;
  by_round.reserve(static_cast<std::size_t>(std::max<std::int64_t>(num_agents, 0)));
  for (std::int64_t t = 1; t <= num_agents; ++t) {
    double expected = 0.0;
    for (std::size_t i = 0; i < width; ++i) expected += live[i] * payment[i];
    by_round.push_back(expected);
    std::fill(next.begin(), next.end(), 0.0);
    next[top] = live[top];
    for (std::size_t i = 0; i < top; ++i) {
      const double m = live[i];
      if (m == 0.0) continue;
      next[i + 1] += m * up;
      if (i > 0) next[i - 1] += m * down;
    }
    live.swap(next);
  }
  return by_round;
}

ClosedFormReport make_report(double paper_value, double rederived_value,
                             double oracle_value) {
  const double tol = 1e-9 * std::abs(oracle_value);
  return {paper_value, rederived_value, oracle_value,
          std::abs(paper_value - oracle_value) <= tol,
          std::abs(rederived_value - oracle_value) <= tol};
}

OracleRow oracle_row(SignalStrength p) {
  OracleRow row;
  row.p = p.value();
  const OracleResult free_walk = dp_oracle(p, OracleOptions{});
  row.wrong_cascade = make_report(wrong_cascade_prob_paper(p),
                                  wrong_cascade_prob_exact(p),
                                  free_walk.prob_wrong_cascade);
  row.onset = make_report(expected_onset_paper(p), expected_onset_exact(p),
                          free_walk.expected_onset);

  OracleOptions trapped;
  trapped.subsidized = true;
  trapped.lower_truncation = truncation_for(p);
  const OracleResult escape = dp_oracle(p, trapped);
  // Wald gives the escape time exactly; the DP is accurate to ~1e-12, so
  // agreement here is checked at the looser Wald tolerance 1e-6.
  const double wald = expected_escape_rounds(p);
  row.escape_rounds = {wald, wald, escape.expected_escape_rounds,
                       std::abs(wald - escape.expected_escape_rounds) <= 1e-6 * wald,
                       std::abs(wald - escape.expected_escape_rounds) <= 1e-6 * wald};
  row.expected_subsidized_rounds = escape.expected_subsidized_rounds;
  row.expected_budget = escape.expected_budget;
  row.budget_bound = expected_budget_bound(p, Reward{1.0});
  row.truncation_leakage = escape.truncation_leakage;
  return row;
}

}  // namespace cascade
