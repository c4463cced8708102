#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sprsim/checkpoint.hpp"
#include "sprsim/config.hpp"
#include "sprsim/detection.hpp"
#include "sprsim/injection.hpp"
#include "sprsim/message.hpp"
#include "sprsim/timing.hpp"
#include "sprsim/worker.hpp"

namespace sprsim {

/// What happens when a hook raises an error flag.
enum class DetectionPolicy : std::uint8_t {
  halt,      // record the report and stop at the flagged hook
  rollback,  // restore the last clean checkpoint and re-execute
  record,    // record the report and keep running
};

struct RuntimeOptions {
  SprMode mode = SprMode::spr;
  DetectionPolicy policy = DetectionPolicy::halt;
  std::size_t checkpoint_interval = 5;
  int rollback_budget = 3;
  bool timing = true;
  bool trace = false;
  std::optional<InjectionPlan> injection;
  /// Skip the refresh payload after this hook (protocol tests).
  std::optional<std::pair<std::uint64_t, SubStep>> withhold_refresh;
  /// Refresh the replica before detecting at this hook (protocol tests).
  std::optional<std::pair<std::uint64_t, SubStep>> refresh_before_detect;
};

/// One row of the event log: a mismatch, a rollback or a halt.
struct RunEvent {
  enum class Kind : std::uint8_t { mismatch, rollback, halt };
  Kind kind = Kind::mismatch;
  std::uint64_t step = 0;
  SubStep sub_step = SubStep::build_grid;
  int rank = 0;
  Mismatch mismatch{};
};

struct StepTimingRow {
  std::uint64_t step = 0;
  int rank = 0;
  StepTiming timing;
};

struct RunResult {
  std::vector<RunEvent> events;
  std::vector<DetectionReport> flagged;
  std::vector<StepTimingRow> timings;
  /// Selected fraction per completed step and rank.
  std::vector<std::vector<double>> selected_fraction;
  std::uint64_t steps_completed = 0;
  std::size_t rollbacks = 0;
  bool halted = false;
  bool injected = false;
};

/// Deterministic scheduler driving Q rank workers phase by phase.
class Runtime {
 public:
  using HookObserver = std::function<void(std::uint64_t step, SubStep s, const Runtime&)>;

  /// Decomposes `global` over the ranks and starts at step 0.
  Runtime(const SimConfig& config, RuntimeOptions options, const ParticleSystem& global);
  /// Resumes from a step-boundary checkpoint.
  Runtime(const SimConfig& config, RuntimeOptions options, const Checkpoint& start);
  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  /// Runs until `steps` more steps completed or a halt. Returns false on halt.
  bool run(std::size_t steps);
  bool step();

  /// Step-boundary snapshot; throws ProtocolError when called mid-step.
  Checkpoint checkpoint() const;
  void restore(const Checkpoint& ckpt);

  /// All owned particles, ascending global id.
  ParticleSystem global_state() const;

  std::uint64_t current_step() const { return step_; }
  double dt() const { return dt_; }
  double time() const { return time_; }
  bool in_step() const { return in_step_; }

  const SimConfig& config() const { return config_; }
  const RuntimeOptions& options() const { return options_; }
  const RunResult& result() const { return result_; }
  const std::vector<RankWorker>& workers() const { return workers_; }
  std::vector<RankWorker>& workers() { return workers_; }
  MessageBus& bus() { return bus_; }
  const MessageBus& bus() const { return bus_; }

  /// Called after the compute of every sub-step, before its hook.
  void on_hook(HookObserver fn) { hook_observer_ = std::move(fn); }

 private:
  void build_workers(const std::vector<ParticleSystem>& owned);
  void initialize();
  /// Runs one step; false when a flag stopped it under halt or rollback.
  bool execute_step();
  void maybe_inject(SubStep boundary);
  void halo_exchange(std::uint64_t stamp);
  bool hook(SubStep s);
  bool agree_on_flags(std::uint64_t stamp, const std::vector<bool>& flags);
  double reduce_min(std::uint64_t stamp, const std::vector<double>& values);
  double reduce_max(std::uint64_t stamp, const std::vector<double>& values);

  SimConfig config_;
  RuntimeOptions options_;
  MessageBus bus_;
  std::vector<RankWorker> workers_;
  std::uint64_t step_ = 0;
  double dt_ = 0.0;
  double time_ = 0.0;
  double radius_ = 0.0;
  bool in_step_ = false;
  std::optional<SubStep> step_flag_;
  Checkpoint last_clean_;
  std::uint64_t rollback_step_ = 0;
  int consecutive_rollbacks_ = 0;
  RunResult result_;
  HookObserver hook_observer_;
};

/// Runs `config.time_step_count` steps from `initial` and returns the result
/// together with the final global state.
struct SimulationOutput {
  RunResult result;
  ParticleSystem final_state;
};
SimulationOutput run_simulation(const SimConfig& config, const ParticleSystem& initial,
                                RuntimeOptions options = {});

}  // namespace sprsim
