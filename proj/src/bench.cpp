#include "sprsim/bench.hpp"

#include <string>

#include "sprsim/errors.hpp"
#include "sprsim/initial_conditions.hpp"

namespace sprsim {

const ModeReport& BenchReport::of(SprMode m) const {
  for (const auto& r : modes)
    if (r.mode == m) return r;
  throw Error("bench report has no entry for mode " + std::string(mode_name(m)));
}

double BenchReport::overhead_pct(SprMode m) const {
  double base = of(SprMode::baseline).mean_step_seconds;
  if (!(base > 0)) return 0.0;
  return 100.0 * (of(m).mean_step_seconds / base - 1.0);
}

void check_bench_pair(const RunManifest& a, const RunManifest& b) {
  RunManifest x = a;
  x.mode = b.mode;
  if (!(x == b)) throw ConfigError("bench manifests differ in more than the mode");
}

BenchReport run_bench(const RunManifest& manifest, std::size_t steps, std::size_t repetitions) {
  if (repetitions == 0) throw ConfigError("repetitions = 0: at least one repetition is required");
  if (steps <= kBenchWarmupSteps)
    throw ConfigError("time_step_count = " + std::to_string(steps) + ": bench discards the first " +
                      std::to_string(kBenchWarmupSteps) + " steps and needs more than that");
  validate(manifest);

  BenchReport report;
  report.steps = steps;
  report.repetitions = repetitions;
  report.ranks = manifest.config.rank_count;
  const ParticleSystem ic = generate_initial_conditions(manifest.workload, manifest.config);

  for (SprMode mode : {SprMode::baseline, SprMode::selection_only, SprMode::spr}) {
    RunManifest m = manifest;
    m.mode = mode;
    check_bench_pair(manifest, m);
    ModeReport r;
    r.mode = mode;
    double total = 0.0, comm = 0.0, sel = 0.0, det = 0.0, bytes = 0.0, frac = 0.0;
    std::size_t frac_n = 0;
    for (std::size_t rep = 0; rep < repetitions; ++rep) {
      RuntimeOptions o;
      o.mode = mode;
      o.policy = DetectionPolicy::halt;
      o.timing = true;
      Runtime rt(m.config, o, ic);
      if (!rt.run(steps)) throw Error("bench run raised a detection flag");
      for (const auto& row : rt.result().timings) {
        if (row.step < kBenchWarmupSteps) continue;
        r.rows.push_back(row);
        r.repetition_of_row.push_back(static_cast<int>(rep));
        total += row.timing.total();
        comm += row.timing.communication();
        sel += row.timing.of(Bucket::selection);
        det += row.timing.of(Bucket::detection);
        bytes += static_cast<double>(row.timing.total_bytes());
        for (std::size_t b = 0; b < kBucketCount; ++b)
          r.mean_bucket_seconds[b] += row.timing.seconds[b];
      }
      const auto& fr = rt.result().selected_fraction;
      for (std::size_t s = kBenchWarmupSteps; s < fr.size(); ++s)
        for (double f : fr[s]) {
          frac += f;
          ++frac_n;
        }
      r.measured_steps += steps - kBenchWarmupSteps;
    }
    const double n = static_cast<double>(r.measured_steps);
    r.mean_step_seconds = total / n;
    for (auto& b : r.mean_bucket_seconds) b /= n;
    r.mean_bytes_per_step = bytes / n;
    const double compute = total - comm;
    r.ccr = compute > 0 ? comm / compute : 0.0;
    r.selection_share = total > 0 ? sel / total : 0.0;
    r.detection_share = total > 0 ? det / total : 0.0;
    r.mean_selected_fraction = frac_n ? frac / static_cast<double>(frac_n) : 0.0;
    report.modes.push_back(std::move(r));
  }
  return report;
}

}  // namespace sprsim
