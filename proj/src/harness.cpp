#include "cascade/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <system_error>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cascade/analytics.hpp"
#include "cascade/rng.hpp"

namespace cascade {

void SweepConfig::validate() const {
  if (populations.empty()) throw std::invalid_argument("sweep: populations is empty");
  if (p_values.empty()) throw std::invalid_argument("sweep: p_values is empty");
  if (replications < 1) throw std::invalid_argument("sweep: replications must be >= 1");
  for (auto n : populations) {
    if (n < 1) throw std::invalid_argument("sweep: populations must be >= 1");
  }
  if (subsidy_enabled && !R.positive()) {
    throw std::invalid_argument("sweep: subsidy requires R > 0");
  }
}

std::vector<SignalStrength> paper_p_grid() {
  std::vector<SignalStrength> grid;
  for (int pct = 51; pct <= 99; pct += 4) grid.emplace_back(pct / 100.0);
  return grid;
}

SweepConfig paper_sweep_config(bool subsidy_enabled) {
  SweepConfig cfg;
  cfg.populations = {10, 100, 1000};
  cfg.p_values = paper_p_grid();
  cfg.replications = 100;
  cfg.subsidy_enabled = subsidy_enabled;
  return cfg;
}

double AggregateStats::frac_subsidy_start_by(std::int64_t round) const {
  if (subsidized_runs == 0) return 1.0;
  std::int64_t early = 0;
  for (std::int64_t t = 1; t <= round && t <= static_cast<std::int64_t>(subsidy_start_counts.size());
       ++t) {
    early += subsidy_start_counts[static_cast<std::size_t>(t - 1)];
  }
  return static_cast<double>(early) / static_cast<double>(subsidized_runs);
}

std::uint64_t run_seed(std::uint64_t base_seed, std::uint64_t run_index) {
  return mix(base_seed, run_index);
}

namespace {

std::uint64_t first_run_index(const SweepConfig& cfg, std::size_t pop_idx,
                              std::size_t p_idx) {
  const auto cell = pop_idx * cfg.p_values.size() + p_idx;
  return static_cast<std::uint64_t>(cell) * static_cast<std::uint64_t>(cfg.replications);
}

SimConfig run_config(const SweepConfig& cfg, std::size_t pop_idx, std::size_t p_idx,
                     std::int64_t rep) {
  SimConfig sim;
  sim.num_agents = cfg.populations[pop_idx];
  sim.p = cfg.p_values[p_idx];
  sim.R = cfg.R;
  sim.subsidy_enabled = cfg.subsidy_enabled;
  sim.seed = run_seed(cfg.base_seed,
                      first_run_index(cfg, pop_idx, p_idx) + static_cast<std::uint64_t>(rep));
  return sim;
}

// Merges replications in index order; the result depends only on `runs`.
AggregateStats aggregate(const SweepConfig& cfg, std::size_t pop_idx, std::size_t p_idx,
                         const std::vector<RunSummary>& runs) {
  AggregateStats s;
  s.population = cfg.populations[pop_idx];
  s.p = cfg.p_values[p_idx];
  s.subsidy_enabled = cfg.subsidy_enabled;
  s.replications = static_cast<std::int64_t>(runs.size());
  const auto n = static_cast<std::size_t>(s.population);
  std::vector<double> paid_sum(n, 0.0);
  std::vector<std::int64_t> paid_count(n, 0);
  s.subsidy_start_counts.assign(n, 0);

  std::int64_t correct = 0, incorrect = 0, none = 0;
  double onset_sum = 0.0;
  double subsidy_sum = 0.0;
  for (const auto& run : runs) {
    switch (run.outcome) {
      case Outcome::CorrectCascade: ++correct; break;
      case Outcome::IncorrectCascade: ++incorrect; break;
      case Outcome::NoCascade: ++none; break;
    }
    if (run.onset_time) {
      onset_sum += static_cast<double>(*run.onset_time);
      ++s.onset_count;
    }
    subsidy_sum += run.subsidy_total;
    if (run.subsidy_start) {
      ++s.subsidized_runs;
      ++s.subsidy_start_counts[static_cast<std::size_t>(*run.subsidy_start - 1)];
    }
    for (const auto& [t, amount] : run.payments) {
      paid_sum[static_cast<std::size_t>(t - 1)] += amount;
      ++paid_count[static_cast<std::size_t>(t - 1)];
    }
  }
  const double reps = static_cast<double>(s.replications);
  s.frac_correct = static_cast<double>(correct) / reps;
  s.frac_incorrect = static_cast<double>(incorrect) / reps;
  s.frac_none = static_cast<double>(none) / reps;
  s.mean_subsidy_total = subsidy_sum / reps;

  if (s.onset_count > 0) {
    s.mean_onset = onset_sum / static_cast<double>(s.onset_count);
    double ss = 0.0;
    for (const auto& run : runs) {
      if (!run.onset_time) continue;
      const double dev = static_cast<double>(*run.onset_time) - s.mean_onset;
      ss += dev * dev;
    }
    s.onset_stddev =
        s.onset_count > 1 ? std::sqrt(ss / static_cast<double>(s.onset_count - 1)) : 0.0;
  } else {
    s.mean_onset = std::numeric_limits<double>::quiet_NaN();
  }

  s.mean_subsidy_by_round.resize(n);
  s.mean_subsidy_given_paid.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.mean_subsidy_by_round[i] = paid_sum[i] / reps;
    s.mean_subsidy_given_paid[i] =
        paid_count[i] > 0 ? paid_sum[i] / static_cast<double>(paid_count[i]) : 0.0;
  }
  return s;
}

AggregateStats cell_parallel(const SweepConfig& cfg, std::size_t pop_idx, std::size_t p_idx,
                             int threads) {
  const std::int64_t reps = cfg.replications;
  std::vector<RunSummary> runs(static_cast<std::size_t>(reps));
#ifdef _OPENMP
  const int team = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 16) num_threads(team)
#else
  (void)threads;
#endif
  for (std::int64_t rep = 0; rep < reps; ++rep) {
    runs[static_cast<std::size_t>(rep)] = summarize_run(run_config(cfg, pop_idx, p_idx, rep));
  }
  return aggregate(cfg, pop_idx, p_idx, runs);
}

}  // namespace

AggregateStats run_cell(const SweepConfig& cfg, std::size_t population_index,
                        std::size_t p_index, const SweepOptions& options) {
  cfg.validate();
  if (population_index >= cfg.populations.size() || p_index >= cfg.p_values.size()) {
    throw std::out_of_range("run_cell: cell index out of range");
  }
  return cell_parallel(cfg, population_index, p_index, options.threads);
}

std::vector<AggregateStats> run_sweep(const SweepConfig& cfg, const SweepOptions& options) {
  cfg.validate();
  std::vector<AggregateStats> out;
  out.reserve(cfg.populations.size() * cfg.p_values.size());
  for (std::size_t i = 0; i < cfg.populations.size(); ++i) {
    for (std::size_t j = 0; j < cfg.p_values.size(); ++j) {
      out.push_back(cell_parallel(cfg, i, j, options.threads));
    }
  }
  return out;
}

std::vector<AggregateStats> run_sweep_serial(const SweepConfig& cfg) {
  cfg.validate();
  std::vector<AggregateStats> out;
  out.reserve(cfg.populations.size() * cfg.p_values.size());
  for (std::size_t i = 0; i < cfg.populations.size(); ++i) {
    for (std::size_t j = 0; j < cfg.p_values.size(); ++j) {
      std::vector<RunSummary> runs;
      runs.reserve(static_cast<std::size_t>(cfg.replications));
      for (std::int64_t rep = 0; rep < cfg.replications; ++rep) {
        runs.push_back(summarize_run(run_config(cfg, i, j, rep)));
      }
      out.push_back(aggregate(cfg, i, j, runs));
    }
  }
  return out;
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string outcomes_csv(const std::vector<AggregateStats>& stats) {
  std::ostringstream os;
  os << "population,p,subsidy,frac_correct,frac_incorrect,frac_none,mean_onset,"
        "mean_subsidy_total\n";
  for (const auto& s : stats) {
    os << s.population << ',' << format_real(s.p.value()) << ','
       << (s.subsidy_enabled ? "on" : "off") << ',' << format_real(s.frac_correct) << ','
       << format_real(s.frac_incorrect) << ',' << format_real(s.frac_none) << ','
       << format_real(s.mean_onset) << ',' << format_real(s.mean_subsidy_total) << '\n';
  }
  return os.str();
}

std::string progression_csv(const std::vector<AggregateStats>& stats) {
  std::ostringstream os;
  os << "population,p,t,mean_subsidy\n";
  for (const auto& s : stats) {
    const std::string p = format_real(s.p.value());
    for (std::size_t i = 0; i < s.mean_subsidy_by_round.size(); ++i) {
      os << s.population << ',' << p << ',' << (i + 1) << ','
         << format_real(s.mean_subsidy_by_round[i]) << '\n';
    }
  }
  return os.str();
}

std::string progression_diagnostics_csv(const std::vector<AggregateStats>& stats) {
  std::ostringstream os;
  os << "population,p,t,mean_subsidy,mean_subsidy_given_paid\n";
  for (const auto& s : stats) {
    const std::string p = format_real(s.p.value());
    for (std::size_t i = 0; i < s.mean_subsidy_by_round.size(); ++i) {
      os << s.population << ',' << p << ',' << (i + 1) << ','
         << format_real(s.mean_subsidy_by_round[i]) << ','
         << format_real(s.mean_subsidy_given_paid[i]) << '\n';
    }
  }
  return os.str();
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing", path);
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  out.close();
  if (!out) throw IoError("write failed", path);
}

}  // namespace

std::vector<std::filesystem::path> export_csv(const std::vector<AggregateStats>& stats,
                                              const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory", dir);
  }
  const std::vector<std::pair<std::filesystem::path, std::string>> files = {
      {dir / kOutcomesCsv, outcomes_csv(stats)},
      {dir / kProgressionCsv, progression_csv(stats)},
      {dir / kProgressionDiagnosticsCsv, progression_diagnostics_csv(stats)},
      {dir / kStatsJson, nlohmann::json(stats).dump(1) + "\n"},
  };
  std::vector<std::filesystem::path> written;
  for (const auto& [path, body] : files) {
    write_file(path, body);
    written.push_back(path);
  }
  return written;
}

bool OracleComparison::any_flagged() const {
  for (const auto& row : rows) {
    if (row.flagged) return true;
  }
  return false;
}

OracleComparison compare_to_oracle(const std::vector<AggregateStats>& stats) {
  OracleComparison report;
  for (const auto& s : stats) {
    if (s.subsidy_enabled) {
      throw std::invalid_argument("compare_to_oracle: needs an unsubsidised sweep");
    }
    if (s.replications < kMinOracleReplications) {
      throw std::invalid_argument("compare_to_oracle: cell (N=" + std::to_string(s.population) +
                                  ") has " + std::to_string(s.replications) +
                                  " replications, need >= 10000");
    }
    OracleComparisonRow row;
    row.population = s.population;
    row.p = s.p.value();
    row.frac_incorrect = s.frac_incorrect;
    row.expected_incorrect = wrong_cascade_prob_exact(s.p);
    const double se_incorrect = std::sqrt(row.expected_incorrect * (1.0 - row.expected_incorrect) /
                                          static_cast<double>(s.replications));
    row.z_incorrect = (row.frac_incorrect - row.expected_incorrect) / se_incorrect;
    row.mean_onset = s.mean_onset;
    row.expected_onset = expected_onset_exact(s.p);
    const double se_onset =
        s.onset_count > 1 ? s.onset_stddev / std::sqrt(static_cast<double>(s.onset_count)) : 0.0;
    row.z_onset = se_onset > 0.0 ? (row.mean_onset - row.expected_onset) / se_onset
                                 : std::numeric_limits<double>::infinity();
    row.flagged = !(std::abs(row.z_incorrect) <= 3.0) || !(std::abs(row.z_onset) <= 3.0);
    report.rows.push_back(row);
  }
  return report;
}

namespace {

// JSON has no NaN; an undefined mean is written as null.
nlohmann::json real_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

void to_json(nlohmann::json& j, const AggregateStats& s) {
  j = nlohmann::json{{"population", s.population},
                     {"p", s.p.value()},
                     {"subsidy_enabled", s.subsidy_enabled},
                     {"replications", s.replications},
                     {"frac_correct", s.frac_correct},
                     {"frac_incorrect", s.frac_incorrect},
                     {"frac_none", s.frac_none},
                     {"mean_onset", real_or_null(s.mean_onset)},
                     {"onset_stddev", s.onset_stddev},
                     {"onset_count", s.onset_count},
                     {"mean_subsidy_total", s.mean_subsidy_total},
                     {"mean_subsidy_by_round", s.mean_subsidy_by_round},
                     {"mean_subsidy_given_paid", s.mean_subsidy_given_paid},
                     {"subsidized_runs", s.subsidized_runs},
                     {"subsidy_start_counts", s.subsidy_start_counts}};
}

void to_json(nlohmann::json& j, const SweepConfig& cfg) {
  std::vector<double> ps;
  for (const auto& p : cfg.p_values) ps.push_back(p.value());
  j = nlohmann::json{{"populations", cfg.populations},
                     {"p_values", ps},
                     {"replications", cfg.replications},
                     {"base_seed", cfg.base_seed},
                     {"R", cfg.R.value()},
                     {"subsidy_enabled", cfg.subsidy_enabled},
                     {"output_dir", cfg.output_dir.string()}};
}

SweepConfig sweep_config_from_json(const nlohmann::json& j) {
  static const char* const known[] = {"populations", "p_values",        "replications",
                                      "base_seed",   "R",               "subsidy_enabled",
                                      "output_dir"};
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || item.key() == k;
    if (!ok) throw std::invalid_argument("sweep config: unknown field '" + item.key() + "'");
  }
  SweepConfig cfg;
  if (j.contains("populations")) cfg.populations = j.at("populations").get<std::vector<std::int64_t>>();
  if (j.contains("p_values")) {
    for (double p : j.at("p_values").get<std::vector<double>>()) cfg.p_values.emplace_back(p);
  }
  if (j.contains("replications")) cfg.replications = j.at("replications").get<std::int64_t>();
  if (j.contains("base_seed")) cfg.base_seed = j.at("base_seed").get<std::uint64_t>();
  if (j.contains("R")) cfg.R = Reward{j.at("R").get<double>()};
  if (j.contains("subsidy_enabled")) cfg.subsidy_enabled = j.at("subsidy_enabled").get<bool>();
  if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
  return cfg;
}

}  // namespace cascade
