#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "sprsim/bench.hpp"
#include "sprsim/campaign.hpp"
#include "sprsim/errors.hpp"
#include "sprsim/initial_conditions.hpp"
#include "sprsim/manifest.hpp"
#include "sprsim/output.hpp"
#include "sprsim/runtime.hpp"

namespace fs = std::filesystem;
using namespace sprsim;

namespace {

struct Flags {
  std::string config;
  std::optional<std::string> mode, workload, out, inject;
  std::optional<int> ranks, tolerance_bits, threads;
  std::optional<std::size_t> particles, steps, trials, controls, repetitions, warmup;
  std::optional<std::uint64_t> seed;
  std::optional<bool> recovery;
};

void add_common(CLI::App& cmd, Flags& f) {
  cmd.add_option("--config", f.config, "flat key = value configuration file");
  cmd.add_option("--mode", f.mode, "baseline, selection-only or spr");
  cmd.add_option("--workload", f.workload, "uniform-lattice, perturbed-lattice or hot-sphere");
  cmd.add_option("--ranks", f.ranks, "number of simulated ranks");
  cmd.add_option("--particles", f.particles, "particle count (perfect square or cube)");
  cmd.add_option("--steps", f.steps, "time steps to run");
  cmd.add_option("--seed", f.seed, "rng seed");
  cmd.add_option("--tolerance-bits", f.tolerance_bits, "low mantissa bits ignored by detection");
  cmd.add_option("--threads", f.threads, "OpenMP threads per rank");
  cmd.add_option("--out", f.out, "output directory");
}

RunManifest resolve(const Flags& f) {
  RunManifest m;
  if (!f.config.empty()) m = load_manifest(f.config, m);
  auto set = [&](const char* key, const auto& v) {
    if (!v) return;
    if constexpr (std::is_same_v<std::decay_t<decltype(*v)>, std::string>)
      apply_setting(m, key, *v);
    else if constexpr (std::is_same_v<std::decay_t<decltype(*v)>, bool>)
      apply_setting(m, key, *v ? "true" : "false");
    else
      apply_setting(m, key, std::to_string(*v));
  };
  set("mode", f.mode);
  set("workload", f.workload);
  set("rank_count", f.ranks);
  set("particle_count", f.particles);
  set("time_step_count", f.steps);
  set("rng_seed", f.seed);
  set("tolerance_bits", f.tolerance_bits);
  set("threads_per_rank", f.threads);
  set("output_dir", f.out);
  set("trials_per_dataset", f.trials);
  set("control_trials", f.controls);
  set("repetitions", f.repetitions);
  set("warmup_steps", f.warmup);
  set("recovery", f.recovery);
  validate(m);
  return m;
}

/// rank=R,dataset=D,component=C,particle=P,bit=B,step=S,substep=X
InjectionPlan parse_injection(const std::string& text) {
  InjectionPlan p;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto comma = text.find(',', pos);
    std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    pos = comma == std::string::npos ? text.size() : comma + 1;
    auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("--inject: expected key=value, got '" + item + "'");
    std::string k = item.substr(0, eq), v = item.substr(eq + 1);
    try {
      if (k == "rank") p.rank = std::stoi(v);
      else if (k == "component") p.component = std::stoi(v);
      else if (k == "particle") p.particle = std::stoull(v);
      else if (k == "bit") p.bit = std::stoi(v);
      else if (k == "step") p.step = std::stoull(v);
      else if (k == "dataset") {
        auto d = parse_dataset(v);
        if (!d) throw ConfigError("--inject: unknown dataset '" + v + "'");
        p.dataset = *d;
      } else if (k == "substep") {
        auto s = parse_substep(v);
        if (!s) throw ConfigError("--inject: unknown sub-step '" + v + "'");
        p.boundary = *s;
      } else {
        throw ConfigError("--inject: unknown key '" + k + "'");
      }
    } catch (const std::logic_error&) {
      throw ConfigError("--inject: bad value for " + k + ": '" + v + "'");
    }
  }
  if (p.bit < 1 || p.bit > 64) throw ConfigError("--inject: bit must lie in [1, 64]");
  return p;
}

fs::path prepare_output(const RunManifest& m) {
  fs::path out = m.output_dir;
  fs::create_directories(out);
  write_text(out / "manifest.cfg", manifest_to_text(m));
  return out;
}

int cmd_run(const Flags& f) {
  RunManifest m = resolve(f);
  std::optional<InjectionPlan> plan;
  if (f.inject) plan = parse_injection(*f.inject);
  fs::path out = prepare_output(m);

  RuntimeOptions o;
  o.mode = m.mode;
  o.policy = m.recovery ? DetectionPolicy::rollback : DetectionPolicy::halt;
  o.checkpoint_interval = m.checkpoint_interval;
  o.injection = plan;
  Runtime rt(m.config, o, generate_initial_conditions(m.workload, m.config));
  bool finished = rt.run(m.config.time_step_count);
  const auto& r = rt.result();

  write_text(out / "events.csv", events_csv(r.events));
  write_text(out / "timings.csv", timings_csv(r.timings));
  write_text(out / "final_state.csv", state_csv(rt.global_state()));

  std::printf("steps completed: %llu\n", static_cast<unsigned long long>(rt.current_step()));
  std::printf("flagged hooks: %zu, rollbacks: %zu\n", r.flagged.size(), r.rollbacks);
  if (!finished) {
    const auto& first = r.flagged.front();
    std::printf("halted at step %llu, %s hook (rank %d)\n",
                static_cast<unsigned long long>(first.step),
                std::string(substep_name(first.sub_step)).c_str(), first.rank);
  }
  return 0;
}

int cmd_campaign(const Flags& f) {
  RunManifest m = resolve(f);
  fs::path out = prepare_output(m);
  CampaignOptions co;
  co.workload = m.workload;
  co.trials_per_dataset = m.trials_per_dataset;
  co.control_trials = m.control_trials;
  co.warmup_steps = m.warmup_steps;
  co.seed = m.config.rng_seed;
  CampaignResult res = run_campaign(m.config, co);
  const auto& met = res.metrics;

  write_text(out / "campaign.csv", campaign_csv(res.records));
  write_text(out / "campaign_summary.csv", campaign_summary_csv(met));
  write_text(out / "recall_significant.dat", campaign_summary_dat(met, true));
  write_text(out / "recall_all.dat", campaign_summary_dat(met, false));

  auto show = [](const std::optional<double>& v) {
    if (!v) return std::string("n/a");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f%%", *v);
    return std::string(buf);
  };
  std::printf("injections: %zu, controls: %zu\n", met.total_injections, met.controls.total());
  for (std::size_t d = 0; d < kDatasetCount; ++d) {
    auto ds = static_cast<Dataset>(d);
    std::printf("%-16s recall (significant) %s, spr-only %s\n",
                std::string(dataset_name(ds)).c_str(), show(met.recall_pct(ds, true)).c_str(),
                show(met.spr_recall_pct(ds, true)).c_str());
  }
  std::printf("pooled recall (significant) %s, (all) %s\n",
              show(met.recall_pct(std::nullopt, true)).c_str(),
              show(met.recall_pct(std::nullopt, false)).c_str());
  std::printf("precision %.2f (%zu false positives)\n", met.precision_pct(), met.false_positives());
  double nr = 0.0;
  for (double v : met.selected_fraction) nr += v / met.selected_fraction.size();
  std::printf("mean selected fraction %.4f\n", nr);

  return met.pooled(true).undetected > 0 ? 2 : 0;
}

int cmd_bench(const Flags& f) {
  RunManifest m = resolve(f);
  fs::path out = prepare_output(m);
  BenchReport r = run_bench(m, m.config.time_step_count, m.repetitions);
  write_text(out / "bench_summary.csv", bench_summary_csv(r));
  write_text(out / "bench_timings.csv", bench_timings_csv(r));
  write_text(out / "bench_counts.csv", bench_counts_csv(r));
  write_text(out / "step_breakdown.dat", bench_breakdown_dat(r));
  for (const auto& mr : r.modes) {
    std::printf("%-15s step %.6f s  ccr %.4f  selection %.3f%%  detection %.3f%%  overhead %.2f%%\n",
                std::string(mode_name(mr.mode)).c_str(), mr.mean_step_seconds, mr.ccr,
                100.0 * mr.selection_share, 100.0 * mr.detection_share,
                r.overhead_pct(mr.mode));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed SPH mini-simulator with selective particle replication"};
  app.require_subcommand(1);
  Flags f;

  auto* run = app.add_subcommand("run", "run a simulation");
  add_common(*run, f);
  run->add_flag("--recovery,!--no-recovery", f.recovery, "roll back to the last clean checkpoint on a flag");
  run->add_option("--inject", f.inject,
                  "scripted flip: rank=R,dataset=D,component=C,particle=P,bit=B,step=S,substep=X");

  auto* campaign = app.add_subcommand("campaign", "single-bit-flip injection campaign");
  add_common(*campaign, f);
  campaign->add_option("--trials", f.trials, "trials per dataset");
  campaign->add_option("--controls", f.controls, "control trials without a flip");
  campaign->add_option("--warmup", f.warmup, "steps run before the golden window");

  auto* bench = app.add_subcommand("bench", "overhead benchmark: baseline vs selection-only vs spr");
  add_common(*bench, f);
  bench->add_option("--repetitions", f.repetitions, "repetitions per mode");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*run) return cmd_run(f);
    if (*campaign) return cmd_campaign(f);
    if (*bench) return cmd_bench(f);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "sprsim: %s\n", e.what());
    return 1;
  }
  return 1;
}
