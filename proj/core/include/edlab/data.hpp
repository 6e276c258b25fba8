#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "edlab/dist.hpp"

namespace edlab::data {

// Hourly load history. Timestamps are epoch seconds; per_bus is optional
// (zero columns when the file only carries the system total).
struct LoadSeries {
  std::vector<std::int64_t> timestamps;
  std::vector<double> total_load;
  Eigen::MatrixXd per_bus;  // rows = hours, cols = bus columns (may be 0x0)

  std::size_t size() const { return timestamps.size(); }
};

// Calendar helpers (proleptic Gregorian, no timezone).
std::int64_t parse_iso8601(const std::string& text);  // throws InvalidParams
std::string format_iso8601(std::int64_t epoch_seconds);
bool is_weekend(std::int64_t epoch_seconds);
int hour_of_day(std::int64_t epoch_seconds);

// CSV with header `timestamp,load_mw[,bus_0,...]` and ISO-8601 timestamps.
// Validates ordering, gaps and sign; `allow_gaps` downgrades missing hours
// from an error to accepted input.
LoadSeries load_csv(const std::string& path, bool allow_gaps = false);
void write_csv(const LoadSeries& series, const std::string& path);
LoadSeries series_from_csv_text(const std::string& text, bool allow_gaps = false);
std::string series_to_csv_text(const LoadSeries& series);

struct Sample {
  Eigen::VectorXd features;   // 24 lagged hourly loads + weekend indicator
  double target = 0.0;        // MW, strictly later than every feature
  std::int64_t timestamp = 0; // target hour
  int hour = 0;               // 0..23, target's local hour
};
using SampleSet = std::vector<Sample>;

struct SplitSpec {
  int train_days = 0;
  int val_days = 0;
  int test_days = 0;
};

struct SampleSplits {
  SampleSet train, val, test;
};

// Chronological lag-24 sampling; the first day is consumed as feature
// warmup, so the train set is one day of samples short.
SampleSplits make_samples(const LoadSeries& series, const SplitSpec& split);

struct Diurnal {
  double base = 0.0;        // MW
  double amplitude = 0.0;   // MW
  double phase_hours = 0.0; // hour of day where the sine crosses upward
};

// Synthetic generator: i.i.d. family draws, optionally shaped by a diurnal
// sinusoidal mean with heteroskedastic, centred family noise.
struct SynthSpec {
  dist::DemandDistribution family = dist::DemandDistribution::normal(1.0, 0.1);
  int hours = 0;
  std::uint64_t seed = 0;
  std::int64_t start = 1325376000;  // 2012-01-01T00:00:00
  std::optional<Diurnal> diurnal;
  double noise_scale = 1.0;   // multiplies the centred draw (diurnal mode)
  double hetero = 0.0;        // extra noise scale at the diurnal peak
  double weekend_scale = 1.0; // multiplies the mean on weekends
};

LoadSeries synth(const SynthSpec& spec);

}  // namespace edlab::data
