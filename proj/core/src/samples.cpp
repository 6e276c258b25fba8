#include "edlab/data.hpp"
#include "edlab/errors.hpp"

namespace edlab::data {

SampleSplits make_samples(const LoadSeries& series, const SplitSpec& split) {
  if (split.train_days < 0 || split.val_days < 0 || split.test_days < 0)
    throw InvalidParams("split day counts must be nonnegative");
  constexpr int kLag = 24;
  const std::size_t total_hours =
      static_cast<std::size_t>(split.train_days + split.val_days + split.test_days) *
      24;
  if (total_hours < kLag + 1 || series.size() < total_hours)
    throw InsufficientData("series shorter than the requested split plus warmup");
  for (std::size_t i = 1; i < total_hours; ++i) {
    if (series.timestamps[i] - series.timestamps[i - 1] != 3600)
      throw InsufficientData("sampling needs an hourly-contiguous series");
  }

  const std::size_t train_end = static_cast<std::size_t>(split.train_days) * 24;
  const std::size_t val_end = train_end + static_cast<std::size_t>(split.val_days) * 24;

  SampleSplits out;
  for (std::size_t h = kLag; h < total_hours; ++h) {
    Sample s;
    s.features.resize(kLag + 1);
    for (int l = 0; l < kLag; ++l) s.features[l] = series.total_load[h - kLag + l];
    s.features[kLag] = is_weekend(series.timestamps[h]) ? 1.0 : 0.0;
    s.target = series.total_load[h];
    s.timestamp = series.timestamps[h];
    s.hour = hour_of_day(series.timestamps[h]);
    if (h < train_end)
      out.train.push_back(std::move(s));
    else if (h < val_end)
      out.val.push_back(std::move(s));
    else
      out.test.push_back(std::move(s));
  }
  return out;
}

}  // namespace edlab::data
