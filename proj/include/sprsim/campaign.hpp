#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "sprsim/checkpoint.hpp"
#include "sprsim/config.hpp"
#include "sprsim/detection.hpp"
#include "sprsim/initial_conditions.hpp"
#include "sprsim/injection.hpp"
#include "sprsim/particles.hpp"
#include "sprsim/worker.hpp"

namespace sprsim {

/// Length of the replayed window, in steps.
inline constexpr std::size_t kWindowSteps = 2;
/// Deviation above which an error counts as significant.
inline constexpr double kSignificance = 1e-6;

struct Deviation {
  bool identical = true;
  double max_dev = 0.0;
};

/// Compares the five injectable datasets of two states covering the same
/// particles in the same order. Throws Error on a shape mismatch.
Deviation compare_to_golden(const ParticleSystem& state, const ParticleSystem& golden);

/// Error-free replay window: the start checkpoint, every owner record at
/// every hook (for the phantom-detection cross check) and the final state.
struct GoldenRecord {
  SimConfig config;
  SprMode mode = SprMode::spr;
  Checkpoint start;
  ParticleSystem final_state;
  /// Indexed by (step - start.step) * kSubStepCount + sub-step.
  std::vector<std::unordered_map<std::uint64_t, ParticleRecord>> hooks;
  std::vector<std::size_t> owned_counts;
  std::vector<double> selected_fraction;
};

/// Warms the workload up for `warmup_steps`, checkpoints, then records the
/// window.
GoldenRecord record_golden(const SimConfig& config, Workload workload,
                           std::size_t warmup_steps, SprMode mode = SprMode::spr);

enum class Outcome : std::uint8_t { masked, detected, detected_by_crash, undetected, false_positive };

std::string_view outcome_name(Outcome o);

struct OutcomeRecord {
  std::size_t trial = 0;
  std::optional<InjectionPlan> plan;  // empty for control trials
  std::uint64_t particle_gid = 0;
  Outcome classification = Outcome::masked;
  bool significant = false;
  std::optional<SubStep> detect_substep;
  double max_dev = 0.0;
  /// Every mismatch of a detected trial matched the golden trace.
  bool phantom = false;
};

/// Draws rank, particle, component, bit and boundary for trial `i` of
/// `dataset` from a generator seeded by (seed, dataset, i).
InjectionPlan draw_plan(const GoldenRecord& golden, std::uint64_t seed, Dataset dataset,
                        std::size_t i);

/// Replays the window from the golden checkpoint. With no plan this is a
/// control trial.
OutcomeRecord run_trial(const GoldenRecord& golden, const std::optional<InjectionPlan>& plan,
                        std::size_t trial_index);

struct OutcomeCounts {
  std::size_t masked = 0;
  std::size_t detected = 0;
  std::size_t crashed = 0;
  std::size_t undetected = 0;
  std::size_t false_positive = 0;

  std::size_t total() const { return masked + detected + crashed + undetected + false_positive; }
  void add(Outcome o);
  OutcomeCounts& operator+=(const OutcomeCounts& o);
};

/// 100 * (1 - fp / flagged), 100 when nothing was flagged.
double precision(std::size_t false_positives, std::size_t flagged);
/// 100 * detected / (detected + undetected); empty when both are zero.
std::optional<double> recall(std::size_t detected, std::size_t undetected);

struct CampaignMetrics {
  std::array<OutcomeCounts, kDatasetCount> all{};
  std::array<OutcomeCounts, kDatasetCount> significant{};
  OutcomeCounts controls;
  std::size_t phantom_detections = 0;
  std::vector<double> selected_fraction;
  std::size_t total_injections = 0;

  OutcomeCounts pooled(bool significant_only) const;
  std::size_t flagged() const;
  std::size_t false_positives() const;
  double precision_pct() const;
  /// Crash-detected trials count as detected.
  std::optional<double> recall_pct(std::optional<Dataset> d, bool significant_only) const;
  /// Only SPR flags count as detected; crashes are left out.
  std::optional<double> spr_recall_pct(std::optional<Dataset> d, bool significant_only) const;
};

struct CampaignOptions {
  Workload workload = Workload::hot_sphere;
  std::size_t trials_per_dataset = 200;
  std::size_t control_trials = 0;
  std::size_t warmup_steps = 5;
  std::uint64_t seed = 1;
};

struct CampaignResult {
  CampaignMetrics metrics;
  std::vector<OutcomeRecord> records;
};

CampaignResult run_campaign(const SimConfig& config, const CampaignOptions& options);
/// Same, reusing an already recorded golden window.
CampaignResult run_campaign(const GoldenRecord& golden, const CampaignOptions& options);

}  // namespace sprsim
