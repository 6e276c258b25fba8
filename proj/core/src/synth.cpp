#include <cmath>

#include "edlab/data.hpp"
#include "edlab/errors.hpp"
#include "edlab/rng.hpp"

namespace edlab::data {

LoadSeries synth(const SynthSpec& spec) {
  if (spec.hours <= 0) throw InvalidParams("synth needs hours > 0");
  if (spec.noise_scale < 0.0 || spec.hetero < 0.0 || spec.weekend_scale <= 0.0)
    throw InvalidParams("synth scales must be positive");

  Rng rng(spec.seed);
  const double family_mean = spec.family.mean();
  constexpr double kTwoPi = 6.283185307179586476925287;

  LoadSeries s;
  s.timestamps.reserve(static_cast<std::size_t>(spec.hours));
  s.total_load.reserve(static_cast<std::size_t>(spec.hours));
  for (int t = 0; t < spec.hours; ++t) {
    const std::int64_t ts = spec.start + 3600LL * t;
    const double draw = spec.family.sample(rng);
    double load;
    if (spec.diurnal) {
      const auto& di = *spec.diurnal;
      const double angle =
          kTwoPi * (static_cast<double>(hour_of_day(ts)) - di.phase_hours) / 24.0;
      double mean = di.base + di.amplitude * std::sin(angle);
      if (is_weekend(ts)) mean *= spec.weekend_scale;
      // Noise grows towards the diurnal peak.
      double scale = spec.noise_scale;
      if (di.amplitude > 0.0) {
        const double phase01 = 0.5 * (1.0 + std::sin(angle));
        scale *= 1.0 + spec.hetero * phase01;
      }
      load = mean + scale * (draw - family_mean);
    } else {
      load = draw;
    }
    s.timestamps.push_back(ts);
    s.total_load.push_back(std::max(0.0, load));
  }
  return s;
}

}  // namespace edlab::data
