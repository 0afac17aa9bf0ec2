#pragma once

// Monte Carlo sweeps over (population, p) grids.
//
// Run k of a sweep (k counts populations-major, then p, then replication)
// uses seed mix(base_seed, k). The subsidy flag does not enter k, so an
// on/off pair of sweeps with the same base seed sees the same signals.
//
// run_sweep parallelises replications inside each cell with OpenMP;
// run_sweep_serial is the single-threaded reference. Both merge results in
// replication order, so their outputs match bit for bit.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "cascade/engine.hpp"
#include "cascade/model.hpp"

namespace cascade {

struct SweepConfig {
  std::vector<std::int64_t> populations;
  std::vector<SignalStrength> p_values;
  std::int64_t replications = 100;
  std::uint64_t base_seed = 0;
  Reward R{1.0};
  bool subsidy_enabled = false;
  std::filesystem::path output_dir = "results";

  /// Throws std::invalid_argument on empty lists, non-positive populations
  /// or replications < 1.
  void validate() const;
};

/// {0.51, 0.55, ..., 0.99}.
std::vector<SignalStrength> paper_p_grid();

/// Populations {10, 100, 1000}, the p grid, 100 replications.
SweepConfig paper_sweep_config(bool subsidy_enabled);

struct AggregateStats {
  std::int64_t population = 0;
  SignalStrength p{0.75};
  bool subsidy_enabled = false;
  std::int64_t replications = 0;
  double frac_correct = 0.0;
  double frac_incorrect = 0.0;
  double frac_none = 0.0;
  /// Mean over runs that reached a cascade; NaN if none did.
  double mean_onset = 0.0;
  double onset_stddev = 0.0;
  std::int64_t onset_count = 0;
  double mean_subsidy_total = 0.0;
  /// Average payment per round over all replications, zeros included.
  std::vector<double> mean_subsidy_by_round;
  /// Average payment per round over replications that paid in that round;
  /// 0 where nobody was paid.
  std::vector<double> mean_subsidy_given_paid;
  std::int64_t subsidized_runs = 0;
  /// Number of runs whose first payment fell in round t (index t - 1).
  std::vector<std::int64_t> subsidy_start_counts;

  /// Fraction of paying runs whose first payment came at or before `round`.
  /// Returns 1 when no run paid.
  double frac_subsidy_start_by(std::int64_t round) const;
};

/// Seed of run number `run_index` in a sweep.
std::uint64_t run_seed(std::uint64_t base_seed, std::uint64_t run_index);

struct SweepOptions {
  /// Worker cap; 0 keeps the OpenMP default.
  int threads = 0;
};

/// Aggregate for one (population, p) cell. Deterministic and independent of
/// which other cells have run.
AggregateStats run_cell(const SweepConfig& cfg, std::size_t population_index,
                        std::size_t p_index, const SweepOptions& options = {});

std::vector<AggregateStats> run_sweep(const SweepConfig& cfg,
                                      const SweepOptions& options = {});
std::vector<AggregateStats> run_sweep_serial(const SweepConfig& cfg);

/// Filesystem failure with the offending path attached.
class IoError : public std::runtime_error {
 public:
  IoError(const std::string& what, std::filesystem::path path)
      : std::runtime_error(what + ": " + path.string()), path_(std::move(path)) {}
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline constexpr const char* kOutcomesCsv = "cascade_outcomes.csv";
inline constexpr const char* kProgressionCsv = "subsidy_progression.csv";
inline constexpr const char* kProgressionDiagnosticsCsv =
    "subsidy_progression_diagnostics.csv";
inline constexpr const char* kStatsJson = "aggregate_stats.json";

/// Writes the outcome and progression CSVs plus the diagnostics CSV and the
/// JSON mirror into `dir` (created if missing). Returns the written paths.
/// Throws IoError.
std::vector<std::filesystem::path> export_csv(
    const std::vector<AggregateStats>& stats, const std::filesystem::path& dir);

/// CSV bodies, exposed for tests.
std::string outcomes_csv(const std::vector<AggregateStats>& stats);
std::string progression_csv(const std::vector<AggregateStats>& stats);
std::string progression_diagnostics_csv(const std::vector<AggregateStats>& stats);

/// %.17g formatting used in every CSV.
std::string format_real(double v);

struct OracleComparisonRow {
  std::int64_t population = 0;
  double p = 0.0;
  double frac_incorrect = 0.0;
  double expected_incorrect = 0.0;
  double z_incorrect = 0.0;
  double mean_onset = 0.0;
  double expected_onset = 0.0;
  double z_onset = 0.0;
  bool flagged = false;
};

struct OracleComparison {
  std::vector<OracleComparisonRow> rows;
  bool any_flagged() const;
};

inline constexpr std::int64_t kMinOracleReplications = 10000;

/// z-scores of unsubsidised cells against the exact closed forms; |z| > 3
/// is flagged. Throws std::invalid_argument for subsidised cells or cells
/// with fewer than 10^4 replications.
OracleComparison compare_to_oracle(const std::vector<AggregateStats>& stats);

void to_json(nlohmann::json& j, const AggregateStats& s);
void to_json(nlohmann::json& j, const SweepConfig& cfg);
/// Reads the JSON form of SweepConfig. Missing fields keep their defaults.
/// Throws nlohmann::json exceptions or std::invalid_argument.
SweepConfig sweep_config_from_json(const nlohmann::json& j);

}  // namespace cascade
