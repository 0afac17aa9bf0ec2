#include "cascade/validation.hpp"

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "cascade/analytics.hpp"
#include "cascade/engine.hpp"
#include "cascade/harness.hpp"
#include "cascade/subsidy.hpp"

namespace cascade {

namespace {

__extension__ typedef __int128 Wide;

using Clock = std::chrono::steady_clock;

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(Clock::now() - start_).count();
  }

 private:
  Clock::time_point start_ = Clock::now();
};

CriterionResult finish(std::string id, bool passed, std::string detail, const Timer& timer,
                       double budget) {
  CriterionResult r;
  r.id = std::move(id);
  r.seconds = timer.seconds();
  r.budget_seconds = budget;
  r.passed = passed && (budget <= 0.0 || r.seconds < budget);
  r.detail = std::move(detail);
  if (passed && !r.passed) r.detail += "; exceeded time budget";
  return r;
}

std::string fmt(const char* format, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, a);
  return buf;
}

// Exact product p^x (1-p)^y with p = pct / 100, scaled by 100^(x+y).
Wide weight(int pct, std::int64_t with_p, std::int64_t with_q) {
  Wide w = 1;
  for (std::int64_t i = 0; i < with_p; ++i) w *= pct;
  for (std::int64_t i = 0; i < with_q; ++i) w *= 100 - pct;
  return w;
}

// Bayes decision from a raw history of signal-following actions.
Action bayes_from_history(const std::vector<Action>& history, Signal s, int pct) {
  // Likelihood of the history and the private signal under each world,
  // multiplied out factor by factor.
  Wide under_a = 1;
  Wide under_b = 1;
  for (Action h : history) {
    under_a *= h == Action::ActionA ? pct : 100 - pct;
    under_b *= h == Action::ActionB ? pct : 100 - pct;
  }
  under_a *= s == Signal::SignalA ? pct : 100 - pct;
  under_b *= s == Signal::SignalB ? pct : 100 - pct;
  if (under_a > under_b) return Action::ActionA;
  if (under_a < under_b) return Action::ActionB;
  return action_for(s);
}

struct WalkEnumeration {
  const DecisionRule& rule;
  const std::vector<int>& grid;
  int max_length;
  std::int64_t histories = 0;
  std::int64_t checks = 0;
  std::int64_t failures = 0;
  std::string first_failure;

  void visit(std::vector<Action>& history, InformativeCounts counts) {
    ++histories;
    for (int pct : grid) {
      const SignalStrength p{pct / 100.0};
      for (Signal s : {Signal::SignalA, Signal::SignalB}) {
        ++checks;
        const Action expected = bayes_from_history(history, s, pct);
        const Action got = rule(s, counts, p);
        if (expected != got) {
          if (failures == 0) {
            first_failure = "p=0." + std::to_string(pct) + " d=" + std::to_string(counts.d()) +
                            " len=" + std::to_string(history.size()) + " " +
                            std::string(to_string(s));
          }
          ++failures;
        }
      }
    }
    if (static_cast<int>(history.size()) == max_length) return;
    // Not cut at |d| = 2: subsidised rounds keep deep states informative.
    for (Action a : {Action::ActionA, Action::ActionB}) {
      history.push_back(a);
      visit(history, update_counts(counts, a, true));
      history.pop_back();
    }
  }
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::filesystem::path make_temp_dir() {
  std::string pattern = (std::filesystem::temp_directory_path() / "cascade_lab_XXXXXX").string();
  if (::mkdtemp(pattern.data()) == nullptr) {
    throw IoError("cannot create temporary directory", pattern);
  }
  return pattern;
}

}  // namespace

std::vector<int> p_grid_percent() {
  std::vector<int> grid;
  for (int pct = 51; pct <= 99; pct += 4) grid.push_back(pct);
  return grid;
}

Action bayes_threshold_decision(Signal s, std::int64_t history_a, std::int64_t history_b,
                                int p_percent) {
  const std::int64_t sa = s == Signal::SignalA ? 1 : 0;
  const Wide under_a = weight(p_percent, history_a + sa, history_b + 1 - sa);
  const Wide under_b = weight(p_percent, history_b + 1 - sa, history_a + sa);
  if (under_a > under_b) return Action::ActionA;
  if (under_a < under_b) return Action::ActionB;
  return action_for(s);
}

CriterionResult check_signal_following_exhaustion(std::int64_t deepest_d) {
  Timer timer;
  const Reward R{1.0};
  std::int64_t checks = 0;
  std::int64_t failures = 0;
  std::string first;
  for (int pct : p_grid_percent()) {
    const SignalStrength p{pct / 100.0};
    for (std::int64_t d = deepest_d; d <= -2; ++d) {
      const auto counts = InformativeCounts::at(d);
      const double r = subsidy_amount(counts, p, R);
      for (Signal s : {Signal::SignalA, Signal::SignalB}) {
        ++checks;
        if (decide_subsidized(s, counts, p, R, r) != action_for(s) || !(r > 0.0)) {
          if (failures++ == 0) {
            first = " first: p=0." + std::to_string(pct) + " d=" + std::to_string(d) + " " +
                    std::string(to_string(s));
          }
        }
      }
    }
  }
  return finish("signal_following_exhaustion", failures == 0,
                std::to_string(checks) + " checks, " + std::to_string(failures) + " failures" + first,
                timer, 5.0);
}

CriterionResult check_walk_equivalence(int max_length, const DecisionRule& rule) {
  Timer timer;
  const DecisionRule active = rule ? rule : DecisionRule(decide_unsubsidized);
  const auto grid = p_grid_percent();
  WalkEnumeration walk{active, grid, max_length, 0, 0, 0, {}};
  std::vector<Action> history;
  walk.visit(history, InformativeCounts{});
  std::string detail = std::to_string(walk.histories) + " histories, " +
                       std::to_string(walk.checks) + " checks, " +
                       std::to_string(walk.failures) + " failures";
  if (walk.failures > 0) detail += " first: " + walk.first_failure;
  return finish("walk_equivalence", walk.failures == 0, detail, timer, 30.0);
}

CriterionResult check_wrong_cascade_rate(std::int64_t reps, int threads) {
  Timer timer;
  const SignalStrength p{2.0 / 3.0};
  SweepConfig cfg;
  cfg.populations = {200};
  cfg.p_values = {p};
  cfg.replications = reps;
  const auto stats = run_sweep(cfg, {threads}).front();
  const double target = dp_oracle(p, OracleOptions{}).prob_wrong_cascade;
  const double band = 0.010;
  const bool in_band = std::abs(stats.frac_incorrect - target) <= band;
  const double printed = wrong_cascade_prob_paper(p);
  const bool printed_outside = std::abs(printed - target) > band;
  const bool flagged = !oracle_row(p).wrong_cascade.agree_paper;
  std::string detail = "frac_incorrect=" + fmt("%.5f", stats.frac_incorrect) + " oracle=" +
                       fmt("%.6f", target) + " band=+-0.010; published " + fmt("%.4f", printed) +
                       (printed_outside ? " outside band" : " INSIDE band") +
                       (flagged ? ", flagged in oracle report" : ", NOT flagged");
  return finish("wrong_cascade_rate", in_band && printed_outside && flagged, detail, timer, 20.0);
}

CriterionResult check_onset_time(std::int64_t reps, int threads) {
  Timer timer;
  const SignalStrength p{0.6};
  SweepConfig cfg;
  cfg.populations = {200};
  cfg.p_values = {p};
  cfg.replications = reps;
  const auto stats = run_sweep(cfg, {threads}).front();
  const double target = dp_oracle(p, OracleOptions{}).expected_onset;
  const double se = stats.onset_stddev / std::sqrt(static_cast<double>(stats.onset_count));
  const bool ok = stats.onset_count == reps && std::abs(stats.mean_onset - target) <= 3.0 * se;
  std::string detail = "mean_onset=" + fmt("%.5f", stats.mean_onset) + " oracle=" +
                       fmt("%.5f", target) + " se=" + fmt("%.5f", se) + " z=" +
                       fmt("%.3f", (stats.mean_onset - target) / se);
  return finish("onset_time", ok, detail, timer, 20.0);
}

CriterionResult check_escape_budget(std::int64_t reps) {
  Timer timer;
  const SignalStrength p{0.75};
  const Reward R{1.0};
  double rounds_sum = 0.0;
  double subsidized_sum = 0.0;
  double total_sum = 0.0;
  std::int64_t unescaped = 0;
  for (std::int64_t i = 0; i < reps; ++i) {
    SimConfig cfg;
    cfg.num_agents = 400;
    cfg.p = p;
    cfg.R = R;
    cfg.subsidy_enabled = true;
    cfg.seed = run_seed(0, static_cast<std::uint64_t>(i));
    cfg.initial_counts = InformativeCounts::at(-2);
    const RunRecord rec = simulate_run(cfg);
    std::int64_t escape = 0;
    for (const auto& step : rec.steps) {
      if (step.d_after == 2) {
        escape = step.t;
        break;
      }
    }
    if (escape == 0) ++unescaped;
    rounds_sum += static_cast<double>(escape);
    subsidized_sum += static_cast<double>(rec.subsidy_rounds);
    total_sum += rec.subsidy_total;
  }
  const double n = static_cast<double>(reps);
  const double mean_rounds = rounds_sum / n;
  const double mean_subsidized = subsidized_sum / n;
  const double mean_total = total_sum / n;
  const double wald = expected_escape_rounds(p);
  const double bound = expected_budget_bound(p, R);
  OracleOptions opt;
  opt.subsidized = true;
  const auto oracle = dp_oracle(p, opt);
  const bool ok = unescaped == 0 && std::abs(mean_rounds - wald) <= 0.3 &&
                  mean_subsidized < wald && mean_total <= bound;
  std::string detail = "mean_rounds=" + fmt("%.4f", mean_rounds) + " (Wald 8 +-0.3)" +
                       " mean_subsidized_rounds=" + fmt("%.4f", mean_subsidized) +
                       " (oracle " + fmt("%.4f", oracle.expected_subsidized_rounds) + ")" +
                       " mean_total=" + fmt("%.4f", mean_total) + " (oracle " +
                       fmt("%.4f", oracle.expected_budget) + ", bound 8)";
  return finish("escape_budget", ok, detail, timer, 10.0);
}

CriterionResult check_post_subsidy_stability(std::int64_t runs) {
  Timer timer;
  const auto grid = paper_p_grid();
  std::int64_t escaped = 0;
  std::int64_t violations = 0;
  std::int64_t signal_violations = 0;
  for (std::int64_t i = 0; i < runs; ++i) {
    SimConfig cfg;
    cfg.num_agents = 200;
    cfg.p = grid[static_cast<std::size_t>(i) % grid.size()];
    cfg.subsidy_enabled = true;
    cfg.seed = run_seed(1, static_cast<std::uint64_t>(i));
    const RunRecord rec = simulate_run(cfg);
    bool reached = false;
    bool was_trapped = false;
    for (const auto& step : rec.steps) {
      if (step.subsidy_paid > 0.0 && step.action != action_for(step.signal)) ++signal_violations;
      if (reached && (step.subsidy_paid != 0.0 || step.action != Action::ActionA ||
                      step.d_after != 2)) {
        ++violations;
      }
      was_trapped = was_trapped || step.phase_before == Phase::IncorrectCascade;
      if (!reached && step.d_after == 2) {
        reached = true;
        if (was_trapped) ++escaped;
      }
    }
  }
  std::string detail = std::to_string(runs) + " subsidised runs, " + std::to_string(escaped) +
                       " escaped a trap, " + std::to_string(violations) +
                       " post-escape violations, " + std::to_string(signal_violations) +
                       " subsidised steps not following the signal";
  return finish("post_subsidy_stability", violations == 0 && signal_violations == 0 && escaped > 0,
                detail, timer, 0.0);
}

CriterionResult check_figure_correct_cascades(int threads) {
  Timer timer;
  const auto on = run_sweep(paper_sweep_config(true), {threads});
  const auto off = run_sweep(paper_sweep_config(false), {threads});
  std::int64_t compared = 0;
  std::vector<std::string> failures;
  for (std::size_t i = 0; i < on.size(); ++i) {
    const auto& a = on[i];
    const auto& b = off[i];
    const std::string cell =
        "(N=" + std::to_string(a.population) + ",p=" + fmt("%.2f", a.p.value()) + ")";
    if (a.p.value() <= 0.9) {
      ++compared;
      if (!(a.frac_correct > b.frac_correct)) {
        failures.push_back(cell + " on=" + fmt("%.2f", a.frac_correct) + " off=" +
                           fmt("%.2f", b.frac_correct));
      }
    }
    if (a.population == 1000 && a.p.value() >= 0.6 && a.frac_correct < 0.95) {
      failures.push_back(cell + " on=" + fmt("%.2f", a.frac_correct) + " < 0.95");
    }
  }
  std::string detail = std::to_string(compared) + " cells compared, " +
                       std::to_string(failures.size()) + " failures";
  for (const auto& f : failures) detail += "; " + f;
  return finish("figure_correct_cascades", failures.empty(), detail, timer, 60.0);
}

CriterionResult check_figure_subsidy_progression(int threads) {
  Timer timer;
  const auto on = run_sweep(paper_sweep_config(true), {threads});
  const double threshold = 0.01;  // times R = 1
  std::vector<std::string> failures;
  std::int64_t cells = 0;
  for (const auto& s : on) {
    const std::string cell =
        "(N=" + std::to_string(s.population) + ",p=" + fmt("%.2f", s.p.value()) + ")";
    if (s.population >= 100) {
      const double last = s.mean_subsidy_by_round.back();
      const bool weakest = std::abs(s.p.value() - 0.51) < 1e-12;
      const bool decays = last < threshold;
      if (weakest || s.p.value() >= 0.55) {
        ++cells;
        if (weakest == decays) {
          const double expected =
              expected_subsidy_by_round(s.p, Reward{1.0}, s.population, truncation_for(s.p))
                  .back();
          failures.push_back(cell + " mean_subsidy(t=N)=" + fmt("%.5f", last) +
                             (weakest ? " below" : " not below") + " 0.01 (exact expectation " +
                             fmt("%.5f", expected) + ")");
        }
      }
    }
    if (s.p.value() >= 0.6) {
      ++cells;
      const double early = s.frac_subsidy_start_by(10);
      if (early < 0.9) {
        failures.push_back(cell + " subsidy starts by round 10: " + fmt("%.3f", early));
      }
    }
  }
  std::string detail =
      std::to_string(cells) + " cell checks, " + std::to_string(failures.size()) + " failures";
  for (const auto& f : failures) detail += "; " + f;
  return finish("figure_subsidy_progression", failures.empty(), detail, timer, 0.0);
}

CriterionResult check_sweep_determinism(const std::vector<int>& thread_counts) {
  Timer timer;
  const auto root = make_temp_dir();
  SweepConfig cfg = paper_sweep_config(true);
  cfg.base_seed = 12345;
  std::vector<std::string> reference;
  std::vector<std::string> mismatches;
  const auto serial = export_csv(run_sweep_serial(cfg), root / "serial");
  for (const auto& path : serial) reference.push_back(read_file(path));
  for (int threads : thread_counts) {
    const auto dir = root / ("threads_" + std::to_string(threads));
    const auto files = export_csv(run_sweep(cfg, {threads}), dir);
    for (std::size_t i = 0; i < files.size(); ++i) {
      if (read_file(files[i]) != reference[i]) {
        mismatches.push_back(files[i].filename().string() + "@" + std::to_string(threads));
      }
    }
  }
  std::error_code ec;
  std::filesystem::remove_all(root, ec);
  std::string detail = "threads {";
  for (std::size_t i = 0; i < thread_counts.size(); ++i) {
    detail += (i ? "," : "") + std::to_string(thread_counts[i]);
  }
  detail += "} vs serial reference: " + std::to_string(mismatches.size()) + " mismatching files";
  for (const auto& m : mismatches) detail += " " + m;
  return finish("sweep_determinism", mismatches.empty(), detail, timer, 0.0);
}

std::vector<CriterionResult> run_validation(const ValidationOptions& options) {
  std::vector<CriterionResult> results;
  const bool quick = options.quick;
  results.push_back(check_signal_following_exhaustion(quick ? -20 : -40));
  results.push_back(check_walk_equivalence(quick ? 10 : 12));
  results.push_back(check_wrong_cascade_rate(20000, options.threads));
  results.push_back(check_onset_time(20000, options.threads));
  results.push_back(check_escape_budget(10000));
  results.push_back(check_post_subsidy_stability(quick ? 2000 : 10000));
  results.push_back(check_figure_correct_cascades(options.threads));
  results.push_back(check_figure_subsidy_progression(options.threads));
  results.push_back(check_sweep_determinism(quick ? std::vector<int>{1, 4}
                                                  : std::vector<int>{1, 4, 16}));
  return results;
}

nlohmann::json to_json(const std::vector<CriterionResult>& results) {
  nlohmann::json suites = nlohmann::json::array();
  bool all = true;
  for (const auto& r : results) {
    all = all && r.passed;
    suites.push_back({{"id", r.id},
                      {"passed", r.passed},
                      {"seconds", r.seconds},
                      {"budget_seconds", r.budget_seconds},
                      {"detail", r.detail}});
  }
  return {{"passed", all}, {"suites", suites}};
}

}  // namespace cascade
