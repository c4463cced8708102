#include "sprsim/campaign.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "sprsim/errors.hpp"
#include "sprsim/runtime.hpp"

namespace sprsim {

namespace {

constexpr Field kDatasetFields[] = {Field::position_x, Field::position_y, Field::position_z,
                                    Field::velocity_x, Field::velocity_y, Field::velocity_z,
                                    Field::mass,       Field::internal_energy, Field::density};

constexpr double kInf = std::numeric_limits<double>::infinity();

RuntimeOptions trial_options(const GoldenRecord& g) {
  RuntimeOptions o;
  o.mode = g.mode;
  o.policy = DetectionPolicy::record;
  o.timing = false;
  return o;
}

std::size_t hook_index(const GoldenRecord& g, std::uint64_t step, SubStep s) {
  return static_cast<std::size_t>(step - g.start.step) * kSubStepCount +
         static_cast<std::size_t>(s);
}

/// True when at least one mismatch differs from the golden trace.
bool genuine(const GoldenRecord& g, const std::vector<DetectionReport>& reports) {
  for (const auto& r : reports) {
    const std::size_t h = hook_index(g, r.step, r.sub_step);
    if (h >= g.hooks.size()) return true;
    for (const auto& m : r.mismatches) {
      auto it = g.hooks[h].find(m.global_id);
      if (it == g.hooks[h].end()) return true;
      std::uint64_t gold = it->second.bits[m.field];
      if (m.local_bits != gold || m.replica_bits != gold) return true;
    }
  }
  return false;
}

}  // namespace

Deviation compare_to_golden(const ParticleSystem& state, const ParticleSystem& golden) {
  if (state.size() != golden.size() || state.global_id != golden.global_id)
    throw Error("compare_to_golden: states cover different particles");
  Deviation d;
  for (Field f : kDatasetFields) {
    const auto& a = state[f];
    const auto& b = golden[f];
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (std::bit_cast<std::uint64_t>(a[i]) == std::bit_cast<std::uint64_t>(b[i])) continue;
      d.identical = false;
      double diff = std::fabs(a[i] - b[i]);
      if (!std::isfinite(diff)) diff = kInf;
      d.max_dev = std::fmax(d.max_dev, diff);
    }
  }
  return d;
}

std::string_view outcome_name(Outcome o) {
  switch (o) {
    case Outcome::masked: return "masked";
    case Outcome::detected: return "detected";
    case Outcome::detected_by_crash: return "detected_by_crash";
    case Outcome::undetected: return "undetected";
    case Outcome::false_positive: return "false_positive";
  }
  return "?";
}

GoldenRecord record_golden(const SimConfig& config, Workload workload,
                           std::size_t warmup_steps, SprMode mode) {
  GoldenRecord g;
  g.config = config;
  g.mode = mode;
  {
    RuntimeOptions o;
    o.mode = mode;
    o.policy = DetectionPolicy::halt;
    o.timing = false;
    Runtime warm(config, o, generate_initial_conditions(workload, config));
    if (!warm.run(warmup_steps)) throw Error("warm-up run raised a detection flag");
    g.start = warm.checkpoint();
  }

  RuntimeOptions o = trial_options(g);
  Runtime rt(config, o, g.start);
  g.hooks.assign(kWindowSteps * kSubStepCount, {});
  rt.on_hook([&](std::uint64_t step, SubStep s, const Runtime& r) {
    auto& map = g.hooks[hook_index(g, step, s)];
    for (const auto& w : r.workers())
      for (std::size_t i = 0; i < w.owned_count(); ++i)
        map.emplace(w.particles().global_id[i], w.local_record(i, s));
  });
  rt.run(kWindowSteps);
  if (!rt.result().flagged.empty()) throw Error("golden window raised a detection flag");
  g.final_state = rt.global_state();
  for (const auto& r : g.start.ranks) g.owned_counts.push_back(r.size());

  const auto& fr = rt.result().selected_fraction;
  g.selected_fraction.assign(config.rank_count, 0.0);
  for (const auto& step : fr)
    for (std::size_t q = 0; q < step.size(); ++q) g.selected_fraction[q] += step[q] / fr.size();
  return g;
}

InjectionPlan draw_plan(const GoldenRecord& g, std::uint64_t seed, Dataset dataset,
                        std::size_t i) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(dataset), static_cast<std::uint32_t>(i),
                    static_cast<std::uint32_t>(static_cast<std::uint64_t>(i) >> 32)};
  std::mt19937_64 rng(seq);
  auto pick = [&](std::uint64_t lo, std::uint64_t hi) {
    return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
  };
  InjectionPlan p;
  p.dataset = dataset;
  p.rank = static_cast<int>(pick(0, g.owned_counts.size() - 1));
  p.particle = static_cast<std::size_t>(pick(0, g.owned_counts[p.rank] - 1));
  p.component =
      static_cast<int>(pick(0, component_count(dataset, g.config.dimensionality) - 1));
  p.bit = static_cast<int>(pick(1, 64));
  p.boundary = static_cast<SubStep>(pick(0, kSubStepCount - 1));
  p.step = g.start.step;
  return p;
}

OutcomeRecord run_trial(const GoldenRecord& g, const std::optional<InjectionPlan>& plan,
                        std::size_t trial_index) {
  RuntimeOptions o = trial_options(g);
  o.injection = plan;
  Runtime rt(g.config, o, g.start);
  bool crashed = false;
  try {
    rt.run(kWindowSteps);
  } catch (const PhysicsError&) {
    crashed = true;
  }

  OutcomeRecord rec;
  rec.trial = trial_index;
  rec.plan = plan;
  if (plan) rec.particle_gid = g.start.ranks.at(plan->rank).global_id.at(plan->particle);

  const auto& flagged = rt.result().flagged;
  if (!flagged.empty()) rec.detect_substep = flagged.front().sub_step;
  if (crashed) {
    rec.max_dev = kInf;
  } else {
    Deviation d = compare_to_golden(rt.global_state(), g.final_state);
    rec.max_dev = d.identical ? 0.0 : d.max_dev;
    if (!d.identical && rec.max_dev == 0.0) rec.max_dev = std::numeric_limits<double>::min();
  }
  rec.significant = rec.max_dev > kSignificance;
  const bool identical = !crashed && rec.max_dev == 0.0;

  if (!plan) {
    rec.classification = !flagged.empty() ? Outcome::false_positive
                         : identical      ? Outcome::masked
                                          : Outcome::undetected;
  } else if (!flagged.empty()) {
    rec.classification = Outcome::detected;
    rec.phantom = !genuine(g, flagged);
  } else if (crashed) {
    rec.classification = Outcome::detected_by_crash;
  } else {
    rec.classification = identical ? Outcome::masked : Outcome::undetected;
  }
  return rec;
}

void OutcomeCounts::add(Outcome o) {
  switch (o) {
    case Outcome::masked: ++masked; break;
    case Outcome::detected: ++detected; break;
    case Outcome::detected_by_crash: ++crashed; break;
    case Outcome::undetected: ++undetected; break;
    case Outcome::false_positive: ++false_positive; break;
  }
}

OutcomeCounts& OutcomeCounts::operator+=(const OutcomeCounts& o) {
  masked += o.masked;
  detected += o.detected;
  crashed += o.crashed;
  undetected += o.undetected;
  false_positive += o.false_positive;
  return *this;
}

double precision(std::size_t fp, std::size_t flagged) {
  if (flagged == 0) return 100.0;
  return 100.0 * (1.0 - static_cast<double>(fp) / static_cast<double>(flagged));
}

std::optional<double> recall(std::size_t detected, std::size_t undetected) {
  if (detected + undetected == 0) return std::nullopt;
  return 100.0 * static_cast<double>(detected) / static_cast<double>(detected + undetected);
}

OutcomeCounts CampaignMetrics::pooled(bool significant_only) const {
  OutcomeCounts c;
  for (const auto& d : significant_only ? significant : all) c += d;
  return c;
}

std::size_t CampaignMetrics::flagged() const {
  return pooled(false).detected + controls.false_positive;
}

std::size_t CampaignMetrics::false_positives() const {
  return controls.false_positive + pooled(false).false_positive;
}

double CampaignMetrics::precision_pct() const { return precision(false_positives(), flagged()); }

std::optional<double> CampaignMetrics::recall_pct(std::optional<Dataset> d,
                                                  bool significant_only) const {
  OutcomeCounts c = d ? (significant_only ? significant : all)[static_cast<std::size_t>(*d)]
                      : pooled(significant_only);
  return recall(c.detected + c.crashed, c.undetected);
}

std::optional<double> CampaignMetrics::spr_recall_pct(std::optional<Dataset> d,
                                                      bool significant_only) const {
  OutcomeCounts c = d ? (significant_only ? significant : all)[static_cast<std::size_t>(*d)]
                      : pooled(significant_only);
  return recall(c.detected, c.undetected + c.crashed);
}

CampaignResult run_campaign(const SimConfig& config, const CampaignOptions& options) {
  return run_campaign(record_golden(config, options.workload, options.warmup_steps), options);
}

CampaignResult run_campaign(const GoldenRecord& golden, const CampaignOptions& options) {
  CampaignResult out;
  auto& m = out.metrics;
  m.selected_fraction = golden.selected_fraction;
  std::size_t trial = 0;
  for (std::size_t d = 0; d < kDatasetCount; ++d) {
    for (std::size_t i = 0; i < options.trials_per_dataset; ++i) {
      auto plan = draw_plan(golden, options.seed, static_cast<Dataset>(d), i);
      OutcomeRecord rec = run_trial(golden, plan, trial++);
      m.all[d].add(rec.classification);
      if (rec.significant) m.significant[d].add(rec.classification);
      if (rec.phantom) ++m.phantom_detections;
      ++m.total_injections;
      out.records.push_back(std::move(rec));
    }
  }
  for (std::size_t i = 0; i < options.control_trials; ++i) {
    OutcomeRecord rec = run_trial(golden, std::nullopt, trial++);
    m.controls.add(rec.classification);
    out.records.push_back(std::move(rec));
  }
  return out;
}

}  // namespace sprsim
