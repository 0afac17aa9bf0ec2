#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cascade/engine.hpp"
#include "cascade/harness.hpp"
#include "cascade/rng.hpp"
#include "cascade/subsidy.hpp"
#include "json.hpp"

using namespace cascade;

namespace {

// Textbook splitmix64: advance the state by the golden gamma, then finalise.
struct SplitMix64 {
  std::uint64_t state;
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
};

// Unsubsidised reference walk on d alone: follow the signal while |d| < 2,
// herd afterwards.
std::vector<std::int64_t> reference_path(std::uint64_t seed, double p, std::int64_t n) {
  SplitMix64 gen{seed};
  std::int64_t d = 0;
  std::vector<std::int64_t> path;
  for (std::int64_t t = 0; t < n; ++t) {
    const bool correct = static_cast<double>(gen.next() >> 11) / 9007199254740992.0 < p;
    if (d > -2 && d < 2) d += correct ? 1 : -1;
    path.push_back(d);
  }
  return path;
}

SimConfig make(std::int64_t n, double p, bool subsidy, std::uint64_t seed) {
  SimConfig cfg;
  cfg.num_agents = n;
  cfg.p = SignalStrength{p};
  cfg.subsidy_enabled = subsidy;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_SUITE("rng") {
  TEST_CASE("stream matches published splitmix64 outputs") {
    RandomStream s(1234567);
    CHECK(s.next_bits() == 6457827717110365317ULL);
    CHECK(s.next_bits() == 3203168211198807973ULL);
    CHECK(s.next_bits() == 9817491932198370423ULL);
    CHECK(s.next_bits() == 4593380528125082431ULL);
    CHECK(s.next_bits() == 16408922859458223821ULL);
  }

  TEST_CASE("to_unit range") {
    CHECK(to_unit(0) == 0.0);
    CHECK(to_unit(~0ULL) < 1.0);
    CHECK(to_unit(1ULL << 63) == 0.5);
  }
}

TEST_SUITE("sim_engine") {
  TEST_CASE("config validation") {
    CHECK_THROWS_AS(simulate_run(make(0, 0.7, false, 1)), std::invalid_argument);
    SimConfig cfg = make(5, 0.7, true, 1);
    cfg.R = Reward{0.0};
    CHECK_THROWS_AS(simulate_run(cfg), std::invalid_argument);
  }

  TEST_CASE("path matches an independent reference walk") {
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
      for (double p : {0.51, 0.67, 0.9}) {
        const auto rec = simulate_run(make(40, p, false, seed));
        const auto ref = reference_path(seed, p, 40);
        REQUIRE(rec.steps.size() == ref.size());
        bool same = true;
        for (std::size_t i = 0; i < ref.size(); ++i) same &= rec.steps[i].d_after == ref[i];
        CHECK(same);
      }
    }
  }

  TEST_CASE("T = 3 with strong signals") {
    int correct = 0;
    for (std::uint64_t seed = 0; seed < 10000; ++seed) {
      correct += simulate_run(make(3, 0.999, false, seed)).outcome == Outcome::CorrectCascade;
    }
    CHECK(std::abs(correct / 10000.0 - 0.998001) <= 0.0014);
  }

  TEST_CASE("wrong cascade rate at p = 2/3") {
    int wrong = 0;
    const int n = 20000;
    for (std::uint64_t seed = 0; seed < static_cast<std::uint64_t>(n); ++seed) {
      wrong += simulate_run(make(200, 2.0 / 3.0, false, run_seed(0, seed))).outcome ==
               Outcome::IncorrectCascade;
    }
    CHECK(std::abs(wrong / static_cast<double>(n) - 0.2) <= 0.01);
  }

  TEST_CASE("subsidy drives long runs to the correct cascade") {
    int correct = 0;
    for (std::uint64_t seed = 0; seed < 2000; ++seed) {
      correct += simulate_run(make(1000, 0.75, true, run_seed(3, seed))).outcome ==
                 Outcome::CorrectCascade;
    }
    CHECK(correct / 2000.0 >= 0.999);
  }

  TEST_CASE("per-step invariants") {
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
      for (bool subsidy : {false, true}) {
        const auto cfg = make(120, 0.55, subsidy, run_seed(11, seed));
        const auto rec = simulate_run(cfg);
        std::int64_t d = 0;
        bool entered_correct = false;
        double total = 0.0;
        for (const auto& step : rec.steps) {
          const auto ph = phase_of(d);
          CHECK(step.phase_before == ph);
          if (entered_correct) CHECK(ph == Phase::CorrectCascade);
          if (ph == Phase::CorrectCascade) {
            entered_correct = true;
            CHECK(step.action == Action::ActionA);
            CHECK(step.d_after == d);
          }
          if (ph == Phase::IncorrectCascade) {
            if (subsidy) {
              // A purchased round follows the signal and moves the walk.
              CHECK(step.subsidy_paid > 0.0);
              CHECK(step.subsidy_paid < 1.0);
              CHECK(step.action == action_for(step.signal));
              CHECK(std::llabs(step.d_after - d) == 1);
              CHECK(step.subsidy_paid ==
                    subsidy_amount(InformativeCounts::at(d), cfg.p, cfg.R));
            } else {
              CHECK(step.action == Action::ActionB);
              CHECK(step.d_after == d);
            }
          } else {
            CHECK(step.subsidy_paid == 0.0);
          }
          if (ph == Phase::FollowSignal) CHECK(step.action == action_for(step.signal));
          total += step.subsidy_paid;
          d = step.d_after;
        }
        CHECK(rec.subsidy_total == doctest::Approx(total).epsilon(1e-15));
        CHECK(classify_outcome(rec) == rec.outcome);
        if (!subsidy) CHECK(rec.subsidy_rounds == 0);
      }
    }
  }

  TEST_CASE("onset and subsidy start bookkeeping") {
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
      const auto rec = simulate_run(make(60, 0.6, true, seed));
      std::optional<std::int64_t> onset, start;
      for (const auto& step : rec.steps) {
        if (!onset && std::llabs(step.d_after) >= 2) onset = step.t;
        if (!start && step.subsidy_paid > 0.0) start = step.t;
      }
      CHECK(rec.onset_time == onset);
      CHECK(rec.subsidy_start == start);
      if (start) CHECK(*start >= 3);
    }
    SimConfig forced = make(5, 0.75, true, 1);
    forced.initial_counts = InformativeCounts::at(-2);
    const auto rec = simulate_run(forced);
    CHECK(rec.onset_time == std::optional<std::int64_t>{0});
    CHECK(rec.subsidy_start == std::optional<std::int64_t>{1});
  }

  // Outcomes are labelled relative to world A, as is the subsidy trigger, so
  // the mirror only holds without the mechanism.
  TEST_CASE("world B is the mirror image of world A") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      {
        SimConfig a = make(80, 0.6, false, seed);
        SimConfig b = a;
        b.world = WorldState::WorldB;
        const auto ra = simulate_run(a);
        const auto rb = simulate_run(b);
        bool mirror = true;
        for (std::size_t i = 0; i < ra.steps.size(); ++i) {
          mirror &= rb.steps[i].signal == flip(ra.steps[i].signal);
          mirror &= rb.steps[i].action == flip(ra.steps[i].action);
          mirror &= rb.steps[i].d_after == -ra.steps[i].d_after;
        }
        CHECK(mirror);
        CHECK(rb.outcome == (ra.outcome == Outcome::CorrectCascade    ? Outcome::IncorrectCascade
                             : ra.outcome == Outcome::IncorrectCascade ? Outcome::CorrectCascade
                                                                       : Outcome::NoCascade));
      }
    }
  }

  TEST_CASE("summarize_run matches summarize(simulate_run)") {
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
      const auto cfg = make(150, 0.53, true, seed);
      const auto a = summarize_run(cfg);
      const auto b = summarize(simulate_run(cfg));
      CHECK(a.outcome == b.outcome);
      CHECK(a.onset_time == b.onset_time);
      CHECK(a.subsidy_total == b.subsidy_total);
      CHECK(a.subsidy_rounds == b.subsidy_rounds);
      CHECK(a.subsidy_start == b.subsidy_start);
      CHECK(a.payments == b.payments);
    }
  }

  TEST_CASE("identical config gives identical record") {
    const auto cfg = make(500, 0.57, true, 42);
    CHECK(run_record_json(simulate_run(cfg)) == run_record_json(simulate_run(cfg)));
  }

  TEST_CASE("JSON shape") {
    const auto rec = simulate_run(make(4, 0.999, false, 7));
    const auto j = nlohmann::json::parse(run_record_json(rec, 2));
    CHECK(j["config"]["num_agents"] == 4);
    CHECK(j["config"]["world"] == "WorldA");
    CHECK(j["steps"].size() == 4);
    CHECK(j["steps"][0]["t"] == 1);
    CHECK(j["steps"][0].contains("phase_before"));
    CHECK(j["subsidy_start"].is_null());
    CHECK(j["subsidy_total"] == 0.0);
    // Golden: with p = 0.999 and seed 7 every signal is correct, so the walk
    // gets to +2 after two rounds.
    const auto ref = reference_path(7, 0.999, 4);
    CHECK(ref == std::vector<std::int64_t>{1, 2, 2, 2});
    CHECK(j["outcome"] == "CorrectCascade");
    CHECK(j["onset_time"] == 2);
    CHECK(j["steps"][3]["action"] == "ActionA");
    CHECK(j["steps"][3]["phase_before"] == "CorrectCascade");
  }
}
