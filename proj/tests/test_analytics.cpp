#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "cascade/analytics.hpp"
#include "cascade/subsidy.hpp"

using namespace cascade;

namespace {

std::vector<double> p_grid() {
  std::vector<double> grid;
  for (int pct = 51; pct <= 99; pct += 4) grid.push_back(pct / 100.0);
  return grid;
}

// Dense Gaussian elimination with partial pivoting.
std::vector<double> solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

// First-step analysis on transient states lo..hi with absorbing lo-1, hi+1:
//   h(d) = cost(d) + q h(d-1) + p h(d+1), h(lo-1) = at_low, h(hi+1) = at_high.
std::vector<double> first_step(double p, std::int64_t lo, std::int64_t hi,
                               const std::vector<double>& cost, double at_low, double at_high) {
  const auto n = static_cast<std::size_t>(hi - lo + 1);
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  std::vector<double> b(cost);
  for (std::size_t i = 0; i < n; ++i) {
    a[i][i] = 1.0;
    if (i > 0) {
      a[i][i - 1] = -(1.0 - p);
    } else {
      b[i] += (1.0 - p) * at_low;
    }
    if (i + 1 < n) {
      a[i][i + 1] = -p;
    } else {
      b[i] += p * at_high;
    }
  }
  return solve(a, b);
}

// Unsubsidised walk: transient {-1, 0, 1}; entry 1 is d = 0.
double ruin_from_zero(double p) { return first_step(p, -1, 1, {0, 0, 0}, 1.0, 0.0)[1]; }
double onset_from_zero(double p) { return first_step(p, -1, 1, {1, 1, 1}, 0.0, 0.0)[1]; }

}  // namespace

TEST_SUITE("analytics") {
  TEST_CASE("first-step oracle reproduces the frozen values") {
    CHECK(ruin_from_zero(2.0 / 3.0) == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(ruin_from_zero(0.6) == doctest::Approx(0.16 / 0.52).epsilon(1e-14));
    CHECK(onset_from_zero(0.6) == doctest::Approx(2.0 / 0.52).epsilon(1e-14));
    CHECK(onset_from_zero(2.0 / 3.0) == doctest::Approx(3.6).epsilon(1e-14));
  }

  TEST_CASE("published closed forms") {
    CHECK(wrong_cascade_prob_paper(SignalStrength{2.0 / 3.0}) == doctest::Approx(0.25));
    CHECK(wrong_cascade_prob_paper(SignalStrength{0.75}) == doctest::Approx(1.0 / 9.0));
    CHECK(wrong_cascade_prob_paper(SignalStrength{1.0 - 1e-12}) < 1e-20);
    CHECK(expected_onset_paper(SignalStrength{0.9}) == doctest::Approx(1.58 / 0.648));
    CHECK(expected_onset_paper(SignalStrength{0.51}) == doctest::Approx(-84.62).epsilon(1e-4));
    CHECK(expected_onset_paper(SignalStrength{1.0 - 1e-12}) == doctest::Approx(2.0));
    // Negative below 2 - sqrt(2).
    CHECK(expected_onset_paper(SignalStrength{0.58}) < 0.0);
    CHECK(expected_onset_paper(SignalStrength{0.59}) > 0.0);
  }

  TEST_CASE("re-derived closed forms") {
    CHECK(wrong_cascade_prob_exact(SignalStrength{2.0 / 3.0}) == doctest::Approx(0.2));
    CHECK(wrong_cascade_prob_exact(SignalStrength{0.6}) == doctest::Approx(0.16 / 0.52));
    CHECK(wrong_cascade_prob_exact(SignalStrength{1.0 - 1e-12}) < 1e-20);
    CHECK(expected_onset_exact(SignalStrength{0.6}) == doctest::Approx(3.84615).epsilon(1e-6));
    CHECK(expected_onset_exact(SignalStrength{2.0 / 3.0}) == doctest::Approx(3.6));
    CHECK(expected_onset_exact(SignalStrength{1.0 - 1e-12}) == doctest::Approx(2.0));
  }

  TEST_CASE("escape-time closed forms") {
    CHECK(expected_escape_rounds(SignalStrength{0.75}) == doctest::Approx(8.0));
    CHECK(expected_escape_rounds(SignalStrength{1.0 - 1e-12}) == doctest::Approx(4.0));
    CHECK(expected_escape_rounds(SignalStrength{0.51}) == doctest::Approx(200.0));
    CHECK(expected_budget_bound(SignalStrength{0.75}, Reward{1.0}) == doctest::Approx(8.0));
    CHECK(expected_budget_bound(SignalStrength{0.75}, Reward{2.0}) == doctest::Approx(16.0));
    CHECK(expected_budget_bound(SignalStrength{0.6}, Reward{1.0}) == doctest::Approx(20.0));
    CHECK_THROWS_AS(expected_budget_bound(SignalStrength{0.6}, Reward{0.0}),
                    std::invalid_argument);
  }

  TEST_CASE("unsubsidised DP agrees with closed forms and first-step analysis") {
    for (double pv : p_grid()) {
      const SignalStrength p{pv};
      OracleOptions opt;
      const auto res = dp_oracle(p, opt);
      CHECK(res.prob_wrong_cascade == doctest::Approx(wrong_cascade_prob_exact(p)).epsilon(1e-12));
      CHECK(res.expected_onset == doctest::Approx(expected_onset_exact(p)).epsilon(1e-12));
      CHECK(res.prob_wrong_cascade == doctest::Approx(ruin_from_zero(pv)).epsilon(1e-12));
      CHECK(res.expected_onset == doctest::Approx(onset_from_zero(pv)).epsilon(1e-12));
      CHECK(std::abs(res.prob_wrong_cascade + res.prob_correct_cascade + res.prob_no_cascade_at_T -
                     1.0) <= 1e-12);
      CHECK(res.max_mass_defect <= 1e-12);
      CHECK(res.prob_no_cascade_at_T < 1e-9);
    }
  }

  TEST_CASE("dp_oracle example: p = 2/3") {
    OracleOptions opt;
    opt.horizon = 10000;
    const auto res = dp_oracle(SignalStrength{2.0 / 3.0}, opt);
    CHECK(std::abs(res.prob_wrong_cascade - 0.2) <= 1e-9);
  }

  TEST_CASE("short horizon leaves residual mass") {
    OracleOptions opt;
    opt.horizon = 3;
    const auto res = dp_oracle(SignalStrength{0.6}, opt);
    // After three rounds only the +-2 paths of length two have absorbed.
    CHECK(res.prob_correct_cascade == doctest::Approx(0.36));
    CHECK(res.prob_wrong_cascade == doctest::Approx(0.16));
    CHECK(res.prob_no_cascade_at_T == doctest::Approx(0.48));
  }

  TEST_CASE("subsidised DP: Wald identity and budget bound") {
    OracleOptions opt;
    opt.subsidized = true;
    opt.lower_truncation = 60;
    const auto res = dp_oracle(SignalStrength{0.75}, opt);
    CHECK(std::abs(res.expected_escape_rounds - 8.0) <= 1e-6);
    CHECK(res.truncation_leakage < 1e-9);
    CHECK(res.expected_subsidized_rounds < 8.0);
    CHECK(res.expected_budget <= 8.0);

    for (double pv : p_grid()) {
      const SignalStrength p{pv};
      OracleOptions grid_opt;
      grid_opt.subsidized = true;
      grid_opt.lower_truncation = truncation_for(p);
      const auto r = dp_oracle(p, grid_opt);
      CHECK(std::abs(r.expected_escape_rounds * (2.0 * pv - 1.0) - 4.0) <= 1e-6);
      CHECK(r.expected_budget <= expected_budget_bound(p, Reward{1.0}));
      CHECK(r.expected_subsidized_rounds < expected_escape_rounds(p));
      CHECK(r.max_mass_defect <= 1e-12);
      CHECK(r.truncation_leakage < 1e-9);
    }
  }

  TEST_CASE("subsidised DP matches a backward first-step solve") {
    // Same truncated chain solved backwards: states -K+1..1, absorbing at
    // -K (leak) and +2.
    const double pv = 0.63;
    const SignalStrength p{pv};
    const std::int64_t depth = 40;
    const std::int64_t lo = -depth + 1;
    std::vector<double> ones, pay;
    for (std::int64_t d = lo; d <= 1; ++d) {
      ones.push_back(1.0);
      pay.push_back(subsidy_amount(InformativeCounts::at(d), p, Reward{1.0}));
    }
    const auto rounds = first_step(pv, lo, 1, ones, 0.0, 0.0);
    const auto budget = first_step(pv, lo, 1, pay, 0.0, 0.0);
    const auto start = static_cast<std::size_t>(-2 - lo);
    OracleOptions opt;
    opt.subsidized = true;
    opt.lower_truncation = depth;
    const auto res = dp_oracle(p, opt);
    CHECK(res.expected_escape_rounds == doctest::Approx(rounds[start]).epsilon(1e-10));
    CHECK(res.expected_budget == doctest::Approx(budget[start]).epsilon(1e-10));
  }

  TEST_CASE("dp_oracle input checks") {
    OracleOptions bad;
    bad.horizon = 0;
    CHECK_THROWS_AS(dp_oracle(SignalStrength{0.7}, bad), std::invalid_argument);
    OracleOptions shallow;
    shallow.subsidized = true;
    shallow.lower_truncation = 9;
    CHECK_THROWS_AS(dp_oracle(SignalStrength{0.7}, shallow), std::invalid_argument);
    OracleOptions leaky;
    leaky.subsidized = true;
    leaky.lower_truncation = 60;
    CHECK_THROWS_AS(dp_oracle(SignalStrength{0.51}, leaky), std::invalid_argument);
  }

  TEST_CASE("report flags: published forms disagree, re-derived forms agree") {
    for (double pv : p_grid()) {
      const auto row = oracle_row(SignalStrength{pv});
      CHECK_FALSE(row.wrong_cascade.agree_paper);
      CHECK(row.wrong_cascade.agree_rederived);
      CHECK_FALSE(row.onset.agree_paper);
      CHECK(row.onset.agree_rederived);
      CHECK(row.escape_rounds.agree_rederived);
      CHECK(row.expected_budget <= row.budget_bound);
    }
    const auto r = make_report(1.0, 2.0, 2.0 * (1 + 1e-12));
    CHECK_FALSE(r.agree_paper);
    CHECK(r.agree_rederived);
  }

  TEST_CASE("expected subsidy by round") {
    const SignalStrength p{0.75};
    const auto curve = expected_subsidy_by_round(p, Reward{1.0}, 50, 60);
    REQUIRE(curve.size() == 50);
    // No trap is reachable before round 3.
    CHECK(curve[0] == 0.0);
    CHECK(curve[1] == 0.0);
    // Round 3: d = -2 with probability q^2, paying L(-2).
    const double q = 0.25;
    CHECK(curve[2] == doctest::Approx(q * q * subsidy_amount(InformativeCounts::at(-2), p,
                                                             Reward{1.0})));
    double total = 0.0;
    for (double v : curve) total += v;
    // Mean total payment over a 50-agent run cannot exceed the chance of
    // ever being trapped times the escape budget.
    OracleOptions opt;
    opt.subsidized = true;
    const auto escape = dp_oracle(p, opt);
    CHECK(total <= wrong_cascade_prob_exact(p) * escape.expected_budget + 1e-12);
    // Long runs finish every excursion.
    const auto long_curve = expected_subsidy_by_round(p, Reward{1.0}, 2000, 60);
    double long_total = 0.0;
    for (double v : long_curve) long_total += v;
    CHECK(long_total == doctest::Approx(wrong_cascade_prob_exact(p) * escape.expected_budget)
                            .epsilon(1e-9));
  }
}
