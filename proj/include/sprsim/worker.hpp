#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "sprsim/config.hpp"
#include "sprsim/detection.hpp"
#include "sprsim/exec.hpp"
#include "sprsim/geometry.hpp"
#include "sprsim/message.hpp"
#include "sprsim/neighbors.hpp"
#include "sprsim/particles.hpp"
#include "sprsim/selection.hpp"
#include "sprsim/timing.hpp"

namespace sprsim {

enum class SprMode : std::uint8_t {
  baseline,        // no selection, no replica traffic
  selection_only,  // selection runs every step, nothing is replicated
  spr,             // selection, replication and detection
};

/// Copy of the source rank's particles held by its replication target.
///
/// `copy` holds the source's owned particles in [0, source_count) followed by
/// the source's halo as the source received it. Only `computed` entries are
/// recomputed by the interpolation passes; cheap per-particle updates
/// (integration, smoothing length) are applied to every owned copy.
struct ReplicaBlock {
  int source_rank = -1;
  ParticleSystem copy;
  std::size_t source_count = 0;
  std::vector<std::uint32_t> computed;
  std::vector<std::uint32_t> source_targets;
  std::vector<std::uint32_t> counts;
  CellGrid grid;
  NeighborTable lists;
  std::vector<double> dt;
  std::uint64_t freshness = 0;
};

struct WorkerOptions {
  SprMode mode = SprMode::spr;
  bool timing = true;
  Exec exec{};
};

/// Halo bin layout shared by every rank in one step.
struct HaloBins {
  std::size_t count = 1;
  double width = 1.0;
  int reach = 1;
  double lo = 0.0;

  std::size_t bin_of(const Geometry& g, double x) const;
};

HaloBins make_halo_bins(const Geometry& geometry, double radius);

/// One simulated rank. A worker touches only its own state; everything it
/// learns about other ranks arrives through the message bus.
class RankWorker {
 public:
  RankWorker(int rank, const SimConfig& config, WorkerOptions options, ParticleSystem owned,
             MessageBus& bus);

  int rank() const { return rank_; }
  int target_rank() const { return (rank_ + 1) % config_.rank_count; }
  int source_rank() const { return (rank_ + config_.rank_count - 1) % config_.rank_count; }
  std::size_t owned_count() const { return owned_; }
  const ParticleSystem& particles() const { return ps_; }
  ParticleSystem owned_state() const;
  void restore_owned(const ParticleSystem& owned);

  const SelectionSet& selection() const { return selection_; }
  const NeighborTable& neighbors() const { return table_; }
  const ReplicaBlock& replica() const { return replica_; }
  const std::vector<double>& dt_candidates() const { return dt_; }
  StepTiming& timing() { return timing_; }
  const StepTiming& timing() const { return timing_; }
  SprMode mode() const { return options_.mode; }

  // Communication helpers (timed and counted per sub-step).
  void comm_send(int dst, Tag tag, std::uint64_t stamp, std::vector<std::byte> payload);
  Message comm_recv(int src, Tag tag, std::uint64_t stamp);

  // ---- step phases, driven by the scheduler --------------------------------
  void begin_step();
  double max_smoothing_length() const;

  void send_occupancy(const HaloBins& bins, std::uint64_t stamp);
  void recv_occupancy(std::uint64_t stamp);
  void send_halos(std::uint64_t stamp);
  void recv_halos(std::uint64_t stamp);
  void send_halo_densities(std::uint64_t stamp);
  void recv_halo_densities(std::uint64_t stamp);

  void build_grid(double radius);
  void find_neighbors();
  void compute_density();
  void compute_forces();
  double compute_timestep_candidates();
  void integrate(double dt);

  // ---- SPR -----------------------------------------------------------------
  void select();
  void send_initial_replica(std::uint64_t stamp);
  void recv_initial_replica(std::uint64_t stamp, double radius);
  void forward_halo(std::uint64_t stamp);
  void recv_forwarded_halo(std::uint64_t stamp);
  void forward_halo_densities(std::uint64_t stamp);
  void recv_forwarded_halo_densities(std::uint64_t stamp);

  void send_replica_results(std::uint64_t step, SubStep s);
  DetectionReport detect(std::uint64_t step, SubStep s);
  /// `withhold_payload` sends the stamp only (test hook for stale replicas).
  void send_refresh(std::uint64_t step, SubStep s, bool withhold_payload = false);
  void recv_refresh(std::uint64_t step, SubStep s);

  /// Test-only backdoor: flips one bit of one owned value in place.
  void inject(Field field, std::size_t local_index, int bit);

  /// Owner-side record of owned particle i at hook `s`; the neighbor digest
  /// and time-step candidate are filled only at the hooks that produce them.
  ParticleRecord local_record(std::size_t i, SubStep s) const;
  /// Host-side record of the k-th computed replica.
  ParticleRecord replica_record(std::size_t k, SubStep s) const;

 private:
  StepTiming* sink() { return options_.timing ? &timing_ : nullptr; }

  int rank_;
  SimConfig config_;
  WorkerOptions options_;
  Geometry geometry_;
  MessageBus& bus_;

  ParticleSystem ps_;  // owned first, halo appended
  std::size_t owned_ = 0;
  std::vector<std::uint32_t> owned_targets_;
  double radius_ = 0.0;

  HaloBins bins_;
  std::vector<std::vector<std::uint8_t>> reachable_;  // per destination rank, dilated occupancy
  std::vector<std::vector<std::uint32_t>> send_lists_;
  std::vector<std::pair<std::size_t, std::size_t>> halo_ranges_;  // per source rank

  CellGrid grid_;
  NeighborTable table_;
  SelectionSet selection_;
  std::vector<double> dt_;

  ReplicaBlock replica_;
  StepTiming timing_;
};

}  // namespace sprsim
