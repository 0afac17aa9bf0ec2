#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cascade/analytics.hpp"
#include "cascade/engine.hpp"
#include "cascade/harness.hpp"
#include "cascade/validation.hpp"

namespace cascade::cli {

namespace {

// Usage errors raised after parsing (bad domain values, unreadable config).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool parse_on_off(const std::string& v) { return v == "on"; }

int resolve_threads(int flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("CASCADE_LAB_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
    throw UsageError("CASCADE_LAB_THREADS must be a positive integer");
  }
  return 0;
}

std::vector<SignalStrength> to_strengths(const std::vector<double>& values) {
  std::vector<SignalStrength> out;
  for (double v : values) out.emplace_back(v);
  return out;
}

struct RunFlags {
  double p = 0.0;
  std::int64_t agents = 0;
  double reward = 1.0;
  std::string subsidy = "off";
  std::uint64_t seed = 0;
  std::string world = "A";
  std::string out;
};

struct SweepFlags {
  std::string config;
  bool paper_defaults = false;
  std::vector<std::int64_t> populations;
  std::vector<double> p_values;
  std::int64_t reps = 100;
  std::uint64_t seed = 0;
  double reward = 1.0;
  std::string subsidy = "off";
  std::string out_dir = "results";
  int threads = 0;
};

struct OracleFlags {
  std::vector<double> p_values;
  std::string out;
};

struct ValidateFlags {
  bool quick = false;
  int threads = 0;
};

int cmd_run(const RunFlags& f, std::ostream& out, std::ostream& err) {
  SimConfig cfg;
  cfg.p = SignalStrength{f.p};
  cfg.num_agents = f.agents;
  cfg.R = Reward{f.reward};
  cfg.subsidy_enabled = parse_on_off(f.subsidy);
  cfg.seed = f.seed;
  cfg.world = f.world == "A" ? WorldState::WorldA : WorldState::WorldB;
  cfg.validate();
  const RunRecord rec = simulate_run(cfg);
  const std::string body = run_record_json(rec) + "\n";
  if (f.out.empty()) {
    out << body;
  } else {
    std::ofstream file(f.out, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError("cannot open for writing", f.out);
    file << body;
    if (!file) throw IoError("write failed", f.out);
  }
  err << "outcome=" << to_string(rec.outcome) << " onset="
      << (rec.onset_time ? std::to_string(*rec.onset_time) : std::string("none"))
      << " subsidy_total=" << format_real(rec.subsidy_total) << '\n';
  return kOk;
}

SweepConfig build_sweep_config(const SweepFlags& f, const CLI::App& sub) {
  SweepConfig cfg;
  if (f.paper_defaults) cfg = paper_sweep_config(false);
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw UsageError("cannot read sweep config: " + f.config);
    try {
      cfg = sweep_config_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw UsageError("invalid sweep config " + f.config + ": " + e.what());
    }
  }
  const auto given = [&sub](const char* name) { return sub.count(name) > 0; };
  if (given("--populations")) cfg.populations = f.populations;
  if (given("--p-values")) cfg.p_values = to_strengths(f.p_values);
  if (given("--reps")) cfg.replications = f.reps;
  if (given("--seed")) cfg.base_seed = f.seed;
  if (given("--reward")) cfg.R = Reward{f.reward};
  if (given("--subsidy")) cfg.subsidy_enabled = parse_on_off(f.subsidy);
  if (given("--out-dir") || (f.config.empty())) cfg.output_dir = f.out_dir;
  cfg.validate();
  return cfg;
}

int cmd_sweep(const SweepFlags& f, const CLI::App& sub, std::ostream& out, std::ostream& err) {
  const SweepConfig cfg = build_sweep_config(f, sub);
  const int threads = resolve_threads(f.threads);
  const auto stats = run_sweep(cfg, {threads});
  const auto paths = export_csv(stats, cfg.output_dir);
  for (const auto& p : paths) out << p.string() << '\n';
  err << "sweep: " << stats.size() << " cells, " << cfg.replications << " replications each\n";
  return kOk;
}

std::string oracle_csv(const std::vector<OracleRow>& rows) {
  std::ostringstream os;
  os << "p,wrong_cascade_paper,wrong_cascade_rederived,wrong_cascade_oracle,"
        "wrong_cascade_agree_paper,wrong_cascade_agree_rederived,"
        "onset_paper,onset_rederived,onset_oracle,onset_agree_paper,onset_agree_rederived,"
        "expected_escape_rounds,escape_rounds_oracle,escape_agree,"
        "expected_subsidized_rounds,expected_budget,budget_bound,truncation_leakage\n";
  const auto b = [](bool v) { return v ? "true" : "false"; };
  for (const auto& r : rows) {
    os << format_real(r.p) << ',' << format_real(r.wrong_cascade.paper_value) << ','
       << format_real(r.wrong_cascade.rederived_value) << ','
       << format_real(r.wrong_cascade.oracle_value) << ',' << b(r.wrong_cascade.agree_paper)
       << ',' << b(r.wrong_cascade.agree_rederived) << ',' << format_real(r.onset.paper_value)
       << ',' << format_real(r.onset.rederived_value) << ',' << format_real(r.onset.oracle_value)
       << ',' << b(r.onset.agree_paper) << ',' << b(r.onset.agree_rederived) << ','
       << format_real(r.escape_rounds.rederived_value) << ','
       << format_real(r.escape_rounds.oracle_value) << ',' << b(r.escape_rounds.agree_rederived)
       << ',' << format_real(r.expected_subsidized_rounds) << ','
       << format_real(r.expected_budget) << ',' << format_real(r.budget_bound) << ','
       << format_real(r.truncation_leakage) << '\n';
  }
  return os.str();
}

int cmd_oracle(const OracleFlags& f, std::ostream& out, std::ostream& err) {
  std::vector<SignalStrength> ps = f.p_values.empty() ? paper_p_grid() : to_strengths(f.p_values);
  std::vector<OracleRow> rows;
  for (const auto& p : ps) rows.push_back(oracle_row(p));
  const std::string body = oracle_csv(rows);
  if (f.out.empty()) {
    out << body;
  } else {
    std::ofstream file(f.out, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError("cannot open for writing", f.out);
    file << body;
    if (!file) throw IoError("write failed", f.out);
    out << f.out << '\n';
  }
  err << "oracle: " << rows.size() << " rows\n";
  return kOk;
}

int cmd_validate(const ValidateFlags& f, std::ostream& out, std::ostream& err) {
  const auto results = run_validation({f.quick, resolve_threads(f.threads)});
  out << to_json(results).dump(1) << '\n';
  bool ok = true;
  for (const auto& r : results) {
    err << (r.passed ? "PASS " : "FAIL ") << r.id << ": " << r.detail << '\n';
    ok = ok && r.passed;
  }
  if (!ok) {
    err << "failing properties:";
    for (const auto& r : results) {
      if (!r.passed) err << ' ' << r.id;
    }
    err << '\n';
  }
  return ok ? kOk : kValidationFailed;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sequential Bayesian cascade simulator with a subsidy mechanism", "cascade_lab"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  RunFlags run_flags;
  auto* run_cmd = app.add_subcommand("run", "Simulate one population and print its RunRecord JSON");
  run_cmd->add_option("--p", run_flags.p, "Signal strength, 0.5 < p < 1")->required();
  run_cmd->add_option("--agents", run_flags.agents, "Number of agents T")->required()
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--reward", run_flags.reward, "Reward R for the correct action");
  run_cmd->add_option("--subsidy", run_flags.subsidy, "Subsidy mechanism")
      ->check(CLI::IsMember({"on", "off"}));
  run_cmd->add_option("--seed", run_flags.seed, "Run seed");
  run_cmd->add_option("--world", run_flags.world, "True world")->check(CLI::IsMember({"A", "B"}));
  run_cmd->add_option("--out", run_flags.out, "Write JSON here instead of stdout");

  SweepFlags sweep_flags;
  auto* sweep_cmd = app.add_subcommand("sweep", "Monte Carlo sweep over (population, p)");
  sweep_cmd->add_option("--config", sweep_flags.config, "JSON SweepConfig file");
  sweep_cmd->add_flag("--paper-defaults", sweep_flags.paper_defaults,
                      "Populations {10,100,1000}, p in 0.51..0.99 step 0.04, 100 reps");
  sweep_cmd->add_option("--populations", sweep_flags.populations, "Population sizes")
      ->delimiter(',');
  sweep_cmd->add_option("--p-values", sweep_flags.p_values, "Signal strengths")->delimiter(',');
  sweep_cmd->add_option("--reps", sweep_flags.reps, "Replications per cell")
      ->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--seed", sweep_flags.seed, "Base seed");
  sweep_cmd->add_option("--reward", sweep_flags.reward, "Reward R");
  sweep_cmd->add_option("--subsidy", sweep_flags.subsidy, "Subsidy mechanism")
      ->check(CLI::IsMember({"on", "off"}));
  sweep_cmd->add_option("--out-dir", sweep_flags.out_dir, "Output directory");
  sweep_cmd->add_option("--threads", sweep_flags.threads,
                        "Worker cap (0: CASCADE_LAB_THREADS or OpenMP default)")
      ->check(CLI::NonNegativeNumber);

  OracleFlags oracle_flags;
  auto* oracle_cmd =
      app.add_subcommand("oracle", "Published vs re-derived closed forms vs exact DP, as CSV");
  oracle_cmd->add_option("--p-values", oracle_flags.p_values, "Signal strengths (default: p grid)")
      ->delimiter(',');
  oracle_cmd->add_option("--out", oracle_flags.out, "Write CSV here instead of stdout");

  ValidateFlags validate_flags;
  auto* validate_cmd = app.add_subcommand("validate", "Run the property and acceptance suites");
  validate_cmd->add_flag("--quick", validate_flags.quick, "Reduced grids");
  validate_cmd->add_option("--threads", validate_flags.threads, "Worker cap")
      ->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run_cmd) return cmd_run(run_flags, out, err);
    if (*sweep_cmd) return cmd_sweep(sweep_flags, *sweep_cmd, out, err);
    if (*oracle_cmd) return cmd_oracle(oracle_flags, out, err);
    if (*validate_cmd) return cmd_validate(validate_flags, out, err);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace cascade::cli
