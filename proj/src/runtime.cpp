#include "sprsim/runtime.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "sprsim/domain.hpp"
#include "sprsim/errors.hpp"
#include "sprsim/neighbors.hpp"

namespace sprsim {

namespace {

struct StepGuard {
  bool& flag;
  explicit StepGuard(bool& f) : flag(f) { flag = true; }
  ~StepGuard() { flag = false; }
};

bool matches(const std::optional<std::pair<std::uint64_t, SubStep>>& at, std::uint64_t step,
             SubStep s) {
  return at && at->first == step && at->second == s;
}

std::vector<std::byte> pack_double(double v) {
  ByteWriter w;
  w.put(v);
  return w.take();
}

double unpack_double(const Message& m) {
  ByteReader r(m.payload);
  return r.get<double>();
}

}  // namespace

Runtime::Runtime(const SimConfig& config, RuntimeOptions options, const ParticleSystem& global)
    : config_(config), options_(std::move(options)), bus_(config.rank_count) {
  SimConfig check = config_;
  check.particle_count = global.size();
  validate(check);
  bus_.enable_trace(options_.trace);
  RankLayout layout = decompose_domain(config_, global);
  build_workers(scatter(global, layout));
  initialize();
  last_clean_ = checkpoint();
}

Runtime::Runtime(const SimConfig& config, RuntimeOptions options, const Checkpoint& start)
    : config_(config), options_(std::move(options)), bus_(config.rank_count) {
  validate(config_);
  if (start.ranks.size() != static_cast<std::size_t>(config_.rank_count))
    throw CheckpointError("checkpoint holds " + std::to_string(start.ranks.size()) +
                          " ranks, configuration has " + std::to_string(config_.rank_count));
  bus_.enable_trace(options_.trace);
  build_workers(start.ranks);
  step_ = start.step;
  dt_ = start.dt;
  time_ = start.time;
  initialize();
  last_clean_ = start;
}

void Runtime::build_workers(const std::vector<ParticleSystem>& owned) {
  workers_.clear();
  workers_.reserve(owned.size());
  WorkerOptions wo{options_.mode, options_.timing, Exec{config_.threads_per_rank}};
  for (int q = 0; q < config_.rank_count; ++q) workers_.emplace_back(q, config_, wo, owned[q], bus_);
}

void Runtime::initialize() {
  for (auto& w : workers_) w.begin_step();
  if (options_.mode != SprMode::spr) return;
  const std::uint64_t stamp = stamp_of(step_, SubStep::build_grid) - 1;
  halo_exchange(stamp);
  for (auto& w : workers_) w.build_grid(radius_);
  for (auto& w : workers_) w.find_neighbors();
  for (auto& w : workers_) w.select();
  for (auto& w : workers_) w.send_initial_replica(stamp);
  for (auto& w : workers_) w.recv_initial_replica(stamp, radius_);
  for (auto& w : workers_) w.begin_step();
}

double Runtime::reduce_max(std::uint64_t stamp, const std::vector<double>& values) {
  const int Q = config_.rank_count;
  for (int q = 1; q < Q; ++q) workers_[q].comm_send(0, Tag::reduce, stamp, pack_double(values[q]));
  double best = values[0];
  for (int q = 1; q < Q; ++q)
    best = std::fmax(best, unpack_double(workers_[0].comm_recv(q, Tag::reduce, stamp)));
  for (int q = 1; q < Q; ++q) workers_[0].comm_send(q, Tag::broadcast, stamp, pack_double(best));
  double out = best;
  for (int q = 1; q < Q; ++q) {
    double got = unpack_double(workers_[q].comm_recv(0, Tag::broadcast, stamp));
    if (std::bit_cast<std::uint64_t>(got) != std::bit_cast<std::uint64_t>(out))
      throw ProtocolError("broadcast value differs between ranks");
  }
  return out;
}

double Runtime::reduce_min(std::uint64_t stamp, const std::vector<double>& values) {
  const int Q = config_.rank_count;
  for (int q = 1; q < Q; ++q) workers_[q].comm_send(0, Tag::reduce, stamp, pack_double(values[q]));
  double best = values[0];
  for (int q = 1; q < Q; ++q) {
    double v = unpack_double(workers_[0].comm_recv(q, Tag::reduce, stamp));
    if (v < best) best = v;
  }
  for (int q = 1; q < Q; ++q) workers_[0].comm_send(q, Tag::broadcast, stamp, pack_double(best));
  for (int q = 1; q < Q; ++q) {
    double got = unpack_double(workers_[q].comm_recv(0, Tag::broadcast, stamp));
    if (std::bit_cast<std::uint64_t>(got) != std::bit_cast<std::uint64_t>(best))
      throw ProtocolError("broadcast value differs between ranks");
  }
  return best;
}

bool Runtime::agree_on_flags(std::uint64_t stamp, const std::vector<bool>& flags) {
  const int Q = config_.rank_count;
  for (int q = 1; q < Q; ++q) {
    ByteWriter w;
    w.put<std::uint8_t>(flags[q] ? 1 : 0);
    workers_[q].comm_send(0, Tag::reduce, stamp, w.take());
  }
  bool any = flags[0];
  for (int q = 1; q < Q; ++q) {
    Message m = workers_[0].comm_recv(q, Tag::reduce, stamp);
    ByteReader r(m.payload);
    any = (r.get<std::uint8_t>() != 0) || any;
  }
  for (int q = 1; q < Q; ++q) {
    ByteWriter w;
    w.put<std::uint8_t>(any ? 1 : 0);
    workers_[0].comm_send(q, Tag::broadcast, stamp, w.take());
  }
  for (int q = 1; q < Q; ++q) {
    Message m = workers_[q].comm_recv(0, Tag::broadcast, stamp);
    ByteReader r(m.payload);
    if ((r.get<std::uint8_t>() != 0) != any) throw ProtocolError("flag broadcast mismatch");
  }
  return any;
}

void Runtime::halo_exchange(std::uint64_t stamp) {
  std::vector<double> hmax(workers_.size());
  for (std::size_t q = 0; q < workers_.size(); ++q) hmax[q] = workers_[q].max_smoothing_length();
  radius_ = kSupportFactor * reduce_max(stamp, hmax);
  const Geometry g{config_.dimensionality, config_.box_length, config_.periodic};
  const HaloBins bins = make_halo_bins(g, radius_);
  for (auto& w : workers_) w.send_occupancy(bins, stamp);
  for (auto& w : workers_) w.recv_occupancy(stamp);
  for (auto& w : workers_) w.send_halos(stamp);
  for (auto& w : workers_) w.recv_halos(stamp);
}

void Runtime::maybe_inject(SubStep boundary) {
  const auto& plan = options_.injection;
  if (!plan || result_.injected || plan->step != step_ || plan->boundary != boundary) return;
  if (plan->rank < 0 || plan->rank >= config_.rank_count)
    throw Error("injection rank " + std::to_string(plan->rank) + " out of range");
  workers_[plan->rank].inject(plan->field(), plan->particle, plan->bit);
  result_.injected = true;
}

bool Runtime::hook(SubStep s) {
  if (hook_observer_) hook_observer_(step_, s, *this);
  if (options_.mode == SprMode::baseline) return true;
  if (options_.mode == SprMode::selection_only) {
    if (s == SubStep::find_neighbors)
      for (auto& w : workers_) w.select();
    return true;
  }

  if (matches(options_.refresh_before_detect, step_, s)) {
    for (auto& w : workers_) w.send_refresh(step_, s);
    for (auto& w : workers_) w.recv_refresh(step_, s);
  }
  for (auto& w : workers_) w.send_replica_results(step_, s);
  std::vector<DetectionReport> reports;
  reports.reserve(workers_.size());
  for (auto& w : workers_) reports.push_back(w.detect(step_, s));
  std::vector<bool> flags(reports.size());
  for (std::size_t q = 0; q < reports.size(); ++q) flags[q] = reports[q].error_flag();

  const bool flagged = agree_on_flags(stamp_of(step_, s), flags);
  if (flagged) {
    if (!step_flag_) step_flag_ = s;
    for (auto& r : reports) {
      if (!r.error_flag()) continue;
      for (const auto& m : r.mismatches)
        result_.events.push_back({RunEvent::Kind::mismatch, step_, s, r.rank, m});
      result_.flagged.push_back(std::move(r));
    }
    if (options_.policy == DetectionPolicy::halt) {
      result_.events.push_back({RunEvent::Kind::halt, step_, s, 0, {}});
      result_.halted = true;
      return false;
    }
    if (options_.policy == DetectionPolicy::rollback) return false;
  }

  if (s == SubStep::find_neighbors)
    for (auto& w : workers_) w.select();
  const bool withhold = matches(options_.withhold_refresh, step_, s);
  for (auto& w : workers_) w.send_refresh(step_, s, withhold);
  for (auto& w : workers_) w.recv_refresh(step_, s);
  return true;
}

bool Runtime::execute_step() {
  StepGuard guard(in_step_);
  step_flag_.reset();
  const bool spr = options_.mode == SprMode::spr;
  for (auto& w : workers_) w.begin_step();

  maybe_inject(SubStep::build_grid);
  halo_exchange(stamp_of(step_, SubStep::build_grid));
  if (spr) {
    for (auto& w : workers_) w.forward_halo(stamp_of(step_, SubStep::build_grid));
    for (auto& w : workers_) w.recv_forwarded_halo(stamp_of(step_, SubStep::build_grid));
  }
  for (auto& w : workers_) w.build_grid(radius_);
  if (!hook(SubStep::build_grid)) return false;

  maybe_inject(SubStep::find_neighbors);
  for (auto& w : workers_) w.find_neighbors();
  if (!hook(SubStep::find_neighbors)) return false;

  maybe_inject(SubStep::density);
  for (auto& w : workers_) w.compute_density();
  if (!hook(SubStep::density)) return false;

  const std::uint64_t h2 = stamp_of(step_, SubStep::force);
  for (auto& w : workers_) w.send_halo_densities(h2);
  for (auto& w : workers_) w.recv_halo_densities(h2);
  if (spr) {
    for (auto& w : workers_) w.forward_halo_densities(h2);
    for (auto& w : workers_) w.recv_forwarded_halo_densities(h2);
  }

  maybe_inject(SubStep::force);
  for (auto& w : workers_) w.compute_forces();
  if (!hook(SubStep::force)) return false;

  maybe_inject(SubStep::timestep);
  std::vector<double> candidates(workers_.size());
  for (std::size_t q = 0; q < workers_.size(); ++q)
    candidates[q] = workers_[q].compute_timestep_candidates();
  if (!hook(SubStep::timestep)) return false;
  const double dt = reduce_min(stamp_of(step_, SubStep::update), candidates);
  if (!std::isfinite(dt) || !(dt > 0.0)) throw PhysicsError("non-finite global time step");

  maybe_inject(SubStep::update);
  for (auto& w : workers_) w.integrate(dt);
  if (!hook(SubStep::update)) return false;

  dt_ = dt;
  time_ += dt;
  ++step_;
  return true;
}

bool Runtime::step() {
  if (result_.halted) return false;
  const std::uint64_t attempted = step_;
  if (execute_step()) {
    ++result_.steps_completed;
    std::vector<double> fractions;
    for (const auto& w : workers_) {
      result_.timings.push_back({attempted, w.rank(), w.timing()});
      fractions.push_back(w.selection().fraction());
    }
    result_.selected_fraction.push_back(std::move(fractions));
    if (attempted >= rollback_step_) consecutive_rollbacks_ = 0;
    if (options_.policy == DetectionPolicy::rollback && !step_flag_ &&
        options_.checkpoint_interval > 0 && step_ % options_.checkpoint_interval == 0)
      last_clean_ = checkpoint();
    return true;
  }
  if (options_.policy != DetectionPolicy::rollback) return false;

  if (attempted == rollback_step_ && consecutive_rollbacks_ > 0) {
    ++consecutive_rollbacks_;
  } else {
    rollback_step_ = attempted;
    consecutive_rollbacks_ = 1;
  }
  if (consecutive_rollbacks_ > options_.rollback_budget)
    throw Error("rollback budget of " + std::to_string(options_.rollback_budget) +
                " exhausted at step " + std::to_string(attempted));
  result_.events.push_back({RunEvent::Kind::rollback, attempted, *step_flag_, 0, {}});
  ++result_.rollbacks;
  restore(last_clean_);
  return true;
}

bool Runtime::run(std::size_t steps) {
  const std::uint64_t target = step_ + steps;
  while (step_ < target)
    if (!step()) return false;
  return true;
}

Checkpoint Runtime::checkpoint() const {
  if (in_step_) throw ProtocolError("checkpoint requested in the middle of a step");
  Checkpoint c;
  c.step = step_;
  c.dt = dt_;
  c.time = time_;
  c.rng_state = config_.rng_seed;
  for (const auto& w : workers_) c.ranks.push_back(w.owned_state());
  return c;
}

void Runtime::restore(const Checkpoint& ckpt) {
  if (in_step_) throw ProtocolError("rollback requested in the middle of a step");
  if (ckpt.ranks.size() != workers_.size())
    throw CheckpointError("checkpoint rank count does not match the runtime");
  bus_.clear();
  for (std::size_t q = 0; q < workers_.size(); ++q) workers_[q].restore_owned(ckpt.ranks[q]);
  step_ = ckpt.step;
  dt_ = ckpt.dt;
  time_ = ckpt.time;
  initialize();
}

ParticleSystem Runtime::global_state() const {
  ParticleSystem all;
  all.reserve(config_.particle_count);
  for (const auto& w : workers_) {
    ParticleSystem o = w.owned_state();
    for (std::size_t i = 0; i < o.size(); ++i) all.push_back_from(o, i);
  }
  return sorted_by_global_id(all);
}

SimulationOutput run_simulation(const SimConfig& config, const ParticleSystem& initial,
                                RuntimeOptions options) {
  Runtime rt(config, std::move(options), initial);
  rt.run(config.time_step_count);
  return {rt.result(), rt.global_state()};
}

}  // namespace sprsim
