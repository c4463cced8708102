#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "sprsim/manifest.hpp"
#include "sprsim/runtime.hpp"
#include "sprsim/timing.hpp"

namespace sprsim {

/// Steps discarded at the start of every repetition.
inline constexpr std::size_t kBenchWarmupSteps = 10;

struct ModeReport {
  SprMode mode = SprMode::baseline;
  std::size_t measured_steps = 0;
  /// Mean over measured steps of the time summed over ranks.
  double mean_step_seconds = 0.0;
  std::array<double, kBucketCount> mean_bucket_seconds{};
  double mean_bytes_per_step = 0.0;
  double ccr = 0.0;
  double selection_share = 0.0;
  double detection_share = 0.0;
  double mean_selected_fraction = 0.0;
  /// Raw rows of every repetition, measured steps only.
  std::vector<StepTimingRow> rows;
  std::vector<int> repetition_of_row;
};

struct BenchReport {
  std::size_t steps = 0;
  std::size_t repetitions = 0;
  int ranks = 0;
  std::vector<ModeReport> modes;  // baseline, selection_only, spr

  const ModeReport& of(SprMode m) const;
  /// Relative increase of mean step time over the baseline, in percent.
  double overhead_pct(SprMode m) const;
};

/// Runs each mode from the manifest's initial conditions `repetitions`
/// times for `steps` steps. Throws ConfigError when steps does not exceed the
/// warm-up or repetitions is zero.
BenchReport run_bench(const RunManifest& manifest, std::size_t steps, std::size_t repetitions);

/// Refuses pairs that differ in anything but the mode.
void check_bench_pair(const RunManifest& a, const RunManifest& b);

}  // namespace sprsim
