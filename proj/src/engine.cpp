#include "cascade/engine.hpp"

#include <stdexcept>

#include "cascade/rng.hpp"
#include "cascade/subsidy.hpp"

namespace cascade {

void SimConfig::validate() const {
  if (num_agents < 1) throw std::invalid_argument("num_agents must be >= 1");
  if (initial_counts.nA < 0 || initial_counts.nB < 0) {
    throw std::invalid_argument("initial counts must be non-negative");
  }
  if (subsidy_enabled && !R.positive()) {
    throw std::invalid_argument("subsidy requires reward R > 0");
  }
}

namespace {

// Shared loop body. `on_step` sees every StepRecord in round order.
template <typename OnStep>
RunSummary run_loop(const SimConfig& cfg, OnStep&& on_step) {
  cfg.validate();
  RandomStream rng(cfg.seed);
  InformativeCounts counts = cfg.initial_counts;
  RunSummary out;
  if (phase(counts) != Phase::FollowSignal) out.onset_time = 0;

  for (std::int64_t t = 1; t <= cfg.num_agents; ++t) {
    StepRecord step;
    step.t = t;
    step.signal = sample_signal(cfg.world, cfg.p, rng);
    step.phase_before = phase(counts);
    const double r = (cfg.subsidy_enabled && step.phase_before == Phase::IncorrectCascade)
                         ? subsidy_amount(counts, cfg.p, cfg.R)
                         : 0.0;
    step.action = r > 0.0 ? decide_subsidized(step.signal, counts, cfg.p, cfg.R, r)
                          : decide_unsubsidized(step.signal, counts, cfg.p);
    step.subsidy_paid = r;
    counts = update_counts(counts, step.action, is_informative(step.phase_before, r > 0.0));
    step.d_after = counts.d();

    if (r > 0.0) {
      out.subsidy_total += r;
      ++out.subsidy_rounds;
      if (!out.subsidy_start) out.subsidy_start = t;
      out.payments.emplace_back(t, r);
    }
    if (!out.onset_time && phase(counts) != Phase::FollowSignal) out.onset_time = t;
    on_step(step);
  }
  out.outcome = outcome_of(phase(counts));
  return out;
}

}  // namespace

RunRecord simulate_run(const SimConfig& cfg) {
  RunRecord rec;
  rec.config = cfg;
  rec.steps.reserve(static_cast<std::size_t>(cfg.num_agents > 0 ? cfg.num_agents : 0));
  RunSummary s = run_loop(cfg, [&rec](const StepRecord& step) { rec.steps.push_back(step); });
  rec.outcome = s.outcome;
  rec.onset_time = s.onset_time;
  rec.subsidy_total = s.subsidy_total;
  rec.subsidy_rounds = s.subsidy_rounds;
  rec.subsidy_start = s.subsidy_start;
  return rec;
}

RunSummary summarize_run(const SimConfig& cfg) {
  return run_loop(cfg, [](const StepRecord&) {});
}

Outcome classify_outcome(const RunRecord& rec) {
  const std::int64_t d =
      rec.steps.empty() ? rec.config.initial_counts.d() : rec.steps.back().d_after;
  return outcome_of(phase_of(d));
}

RunSummary summarize(const RunRecord& rec) {
  RunSummary s;
  s.outcome = rec.outcome;
  s.onset_time = rec.onset_time;
  s.subsidy_total = rec.subsidy_total;
  s.subsidy_rounds = rec.subsidy_rounds;
  s.subsidy_start = rec.subsidy_start;
  for (const auto& step : rec.steps) {
    if (step.subsidy_paid > 0.0) s.payments.emplace_back(step.t, step.subsidy_paid);
  }
  return s;
}

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::CorrectCascade: return "CorrectCascade";
    case Outcome::IncorrectCascade: return "IncorrectCascade";
    case Outcome::NoCascade: return "NoCascade";
  }
  return "NoCascade";
}

void to_json(nlohmann::json& j, const SimConfig& cfg) {
  j = nlohmann::json{{"num_agents", cfg.num_agents},
                     {"p", cfg.p.value()},
                     {"R", cfg.R.value()},
                     {"subsidy_enabled", cfg.subsidy_enabled},
                     {"world", to_string(cfg.world)},
                     {"seed", cfg.seed},
                     {"initial_counts",
                      {{"nA", cfg.initial_counts.nA}, {"nB", cfg.initial_counts.nB}}}};
}

void to_json(nlohmann::json& j, const StepRecord& step) {
  j = nlohmann::json{{"t", step.t},
                     {"signal", to_string(step.signal)},
                     {"action", to_string(step.action)},
                     {"phase_before", to_string(step.phase_before)},
                     {"subsidy_paid", step.subsidy_paid},
                     {"d_after", step.d_after}};
}

void to_json(nlohmann::json& j, const RunRecord& rec) {
  j = nlohmann::json{{"config", rec.config},
                     {"steps", rec.steps},
                     {"outcome", to_string(rec.outcome)},
                     {"onset_time", nullptr},
                     {"subsidy_total", rec.subsidy_total},
                     {"subsidy_rounds", rec.subsidy_rounds},
                     {"subsidy_start", nullptr}};
  if (rec.onset_time) j["onset_time"] = *rec.onset_time;
  if (rec.subsidy_start) j["subsidy_start"] = *rec.subsidy_start;
}

std::string run_record_json(const RunRecord& rec, int indent) {
  return nlohmann::json(rec).dump(indent);
}

}  // namespace cascade
