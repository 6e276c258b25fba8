#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "edlab/data.hpp"
#include "edlab/dist.hpp"
#include "edlab/learn.hpp"

namespace edlab::cli {

struct RobustnessSpec {
  dist::Family hypothesis = dist::Family::Normal;
  // Noise families to generate the "true" data from; each keeps the base
  // synth spec's diurnal shell.
  std::vector<dist::DemandDistribution> true_families;
};

struct ExperimentConfig {
  std::string network_path;
  std::optional<std::string> csv_path;       // exactly one of csv/synth
  std::optional<data::SynthSpec> synth;
  dist::Penalties penalties{100.0, 10.0};
  std::vector<learn::Framework> frameworks;
  data::SplitSpec split{1200, 200, 400};
  learn::TrainConfig train;
  learn::CurveMode curve_mode = learn::CurveMode::FixedMean;
  std::string out_dir = "out";
  bool enforce_paper_regime = false;
  int efficiency_repeats = 1;
  std::optional<RobustnessSpec> robustness;
};

// Throws ConfigError with an actionable message. Relative paths resolve
// against base_dir.
ExperimentConfig config_from_json_text(const std::string& text,
                                       const std::string& base_dir);
ExperimentConfig load_config(const std::string& path);

struct TimingStats {
  double mean_seconds = 0.0;
  double std_seconds = 0.0;
  int repeats = 0;
};

struct FrameworkResult {
  std::string name;
  learn::EvalMetrics metrics;
  int epochs = 0;
  double best_val_loss = 0.0;
  TimingStats timing;  // excluded from the content hash
  std::string error;   // nonempty when this framework failed
};

struct RobustnessResult {
  std::string true_family;
  std::string hypothesis;
  learn::EvalMetrics task_specific;
  learn::EvalMetrics model_free;
  double cost_ratio = 0.0;  // task-specific cost loss / model-free cost loss
  double mse_ratio = 0.0;
};

struct ExperimentReport {
  int schema_version = 1;
  std::string content_hash;  // deterministic payload only, timings excluded
  std::uint64_t seed = 0;
  std::string config_echo_json;
  std::vector<FrameworkResult> frameworks;
  std::vector<RobustnessResult> robustness;
};

std::string report_to_json_text(const ExperimentReport& report);
ExperimentReport report_from_json_text(const std::string& text);
// FNV-1a over the deterministic payload (metrics and config echo; timings
// and the hash itself excluded).
std::string compute_content_hash(const ExperimentReport& report);
void write_report(const ExperimentReport& report, const std::string& out_dir,
                  bool plot_csv);

struct RunOptions {
  std::optional<std::uint64_t> seed;     // overrides config.train.seed
  std::optional<std::string> out_dir;    // overrides config.out_dir
  bool plot_csv = false;
  bool write_outputs = true;
};

// Trains every listed framework on identical splits and seeds, evaluates on
// the test split, and runs the robustness sweep when configured. Flushes a
// partial report before rethrowing if a later framework fails.
ExperimentReport run_bench(const ExperimentConfig& cfg, const RunOptions& opts = {});

// Same training pass but also writes model_<framework>.json files.
ExperimentReport run_train(const ExperimentConfig& cfg, const RunOptions& opts = {});

// Loads a saved model and evaluates it on the config's test split.
ExperimentReport run_eval(const ExperimentConfig& cfg, const std::string& model_path,
                          const RunOptions& opts = {});

// `curve` subcommand body: breakpoints as CSV (g, cost, slope, profile...).
// Returns the process exit code (0 ok, 2 infeasible).
int run_curve_command(const std::string& network_path,
                      const std::vector<double>& nodal_demand, std::ostream& out,
                      std::ostream& err);

// `dispatch` subcommand body: optimal dispatch as a JSON string.
std::string run_dispatch_command(const std::string& network_path,
                                 const std::string& dist_json,
                                 const dist::Penalties& pen,
                                 std::optional<double> curve_demand);

// Distribution spec <-> JSON (family + parameters).
dist::DemandDistribution dist_from_json_text(const std::string& text);
std::string dist_to_json_text(const dist::DemandDistribution& d);

}  // namespace edlab::cli
