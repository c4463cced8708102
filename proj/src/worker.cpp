#include "sprsim/worker.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "sprsim/errors.hpp"
#include "sprsim/injection.hpp"
#include "sprsim/physics.hpp"

namespace sprsim {

namespace {

constexpr Field kHaloFields[] = {Field::position_x, Field::position_y,     Field::position_z,
                                 Field::velocity_x, Field::velocity_y,     Field::velocity_z,
                                 Field::mass,       Field::internal_energy, Field::density,
                                 Field::smoothing_length};

template <typename T>
std::span<const T> sub(const std::vector<T>& v, std::size_t b, std::size_t e) {
  return {v.data() + b, e - b};
}

void pack_range(ByteWriter& w, const ParticleSystem& ps, std::size_t b, std::size_t e,
                std::span<const Field> fields) {
  w.put_span(sub(ps.global_id, b, e));
  for (Field f : fields) w.put_span(sub(ps[f], b, e));
}

void pack_indices(ByteWriter& w, const ParticleSystem& ps, const std::vector<std::uint32_t>& idx,
                  std::span<const Field> fields) {
  std::vector<std::uint64_t> ids(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) ids[k] = ps.global_id[idx[k]];
  w.put_vector(ids);
  std::vector<double> buf(idx.size());
  for (Field f : fields) {
    const auto& src = ps[f];
    for (std::size_t k = 0; k < idx.size(); ++k) buf[k] = src[idx[k]];
    w.put_vector(buf);
  }
}

/// Appends the particles of a packed block; fields not shipped are zeroed.
std::size_t unpack_append(ByteReader& r, ParticleSystem& ps, std::span<const Field> fields) {
  auto ids = r.get_vector<std::uint64_t>();
  const std::size_t off = ps.size(), n = ids.size();
  ps.resize(off + n);
  std::copy(ids.begin(), ids.end(), ps.global_id.begin() + static_cast<long>(off));
  for (Field f : fields) {
    if (r.get_into(ps[f], off) != n) throw ProtocolError("ragged particle block");
  }
  return n;
}

std::uint64_t bits_of(double v) { return std::bit_cast<std::uint64_t>(v); }

void check_positions(const ParticleSystem& ps) {
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (!std::isfinite(ps.x[i]) || !std::isfinite(ps.y[i]) || !std::isfinite(ps.z[i]))
      throw PhysicsError("non-finite position of particle " + std::to_string(ps.global_id[i]));
  }
}

}  // namespace

std::size_t HaloBins::bin_of(const Geometry& g, double x) const {
  if (!std::isfinite(x)) return 0;
  double w = g.periodic ? g.wrap(x) : x;
  double b = std::floor((w - lo) / width);
  if (b < 0) return 0;
  if (b >= static_cast<double>(count)) return count - 1;
  return static_cast<std::size_t>(b);
}

HaloBins make_halo_bins(const Geometry& g, double radius) {
  HaloBins bins;
  bins.lo = 0.0;
  double target = radius > 0 ? radius / 4.0 : g.box;
  double c = std::floor(g.box / target);
  bins.count = c < 1 ? 1 : (c > 4096 ? 4096 : static_cast<std::size_t>(c));
  bins.width = g.box / static_cast<double>(bins.count);
  bins.reach = static_cast<int>(std::ceil(radius / bins.width)) + 1;
  return bins;
}

RankWorker::RankWorker(int rank, const SimConfig& config, WorkerOptions options,
                       ParticleSystem owned, MessageBus& bus)
    : rank_(rank),
      config_(config),
      options_(options),
      geometry_{config.dimensionality, config.box_length, config.periodic},
      bus_(bus) {
  restore_owned(owned);
  replica_.source_rank = source_rank();
}

ParticleSystem RankWorker::owned_state() const {
  ParticleSystem out;
  out.global_id.assign(ps_.global_id.begin(), ps_.global_id.begin() + static_cast<long>(owned_));
  for (Field f : all_fields())
    out[f].assign(ps_[f].begin(), ps_[f].begin() + static_cast<long>(owned_));
  return out;
}

void RankWorker::restore_owned(const ParticleSystem& owned) {
  if (!std::is_sorted(owned.global_id.begin(), owned.global_id.end()))
    throw Error("owned particles must be stored in ascending global id order");
  ps_ = owned;
  owned_ = owned.size();
  owned_targets_.resize(owned_);
  std::iota(owned_targets_.begin(), owned_targets_.end(), 0u);
  const auto Q = static_cast<std::size_t>(config_.rank_count);
  reachable_.assign(Q, {});
  send_lists_.assign(Q, {});
  halo_ranges_.assign(Q, {0, 0});
  table_ = NeighborTable{};
  selection_ = SelectionSet{rank_, {}, owned_};
  dt_.clear();
  int src = replica_.source_rank;
  replica_ = ReplicaBlock{};
  replica_.source_rank = src;
}

void RankWorker::comm_send(int dst, Tag tag, std::uint64_t stamp,
                           std::vector<std::byte> payload) {
  ScopedTimer t(sink(), Bucket::communication);
  timing_.bytes_sent[stamp % kSubStepCount] += payload.size();
  bus_.send(rank_, dst, tag, stamp, std::move(payload));
}

Message RankWorker::comm_recv(int src, Tag tag, std::uint64_t stamp) {
  ScopedTimer t(sink(), Bucket::communication);
  return bus_.recv(rank_, src, tag, stamp);
}

void RankWorker::begin_step() {
  ps_.resize(owned_);
  if (replica_.copy.size() > replica_.source_count) replica_.copy.resize(replica_.source_count);
  timing_.clear();
}

double RankWorker::max_smoothing_length() const {
  double h = 0.0;
  for (std::size_t i = 0; i < owned_; ++i) h = std::fmax(h, ps_.smoothing_length[i]);
  return h;
}

// ---- halo exchange --------------------------------------------------------

void RankWorker::send_occupancy(const HaloBins& bins, std::uint64_t stamp) {
  bins_ = bins;
  std::vector<std::uint8_t> occ(bins.count, 0);
  {
    ScopedTimer t(sink(), Bucket::communication);
    for (std::size_t i = 0; i < owned_; ++i) occ[bins.bin_of(geometry_, ps_.x[i])] = 1;
  }
  for (int dst = 0; dst < config_.rank_count; ++dst) {
    if (dst == rank_) continue;
    ByteWriter w;
    w.put_vector(occ);
    comm_send(dst, Tag::occupancy, stamp, w.take());
  }
}

void RankWorker::recv_occupancy(std::uint64_t stamp) {
  const long n = static_cast<long>(bins_.count);
  for (int src = 0; src < config_.rank_count; ++src) {
    if (src == rank_) continue;
    Message m = comm_recv(src, Tag::occupancy, stamp);
    ScopedTimer t(sink(), Bucket::communication);
    ByteReader r(m.payload);
    auto occ = r.get_vector<std::uint8_t>();
    if (static_cast<long>(occ.size()) != n) throw ProtocolError("occupancy size mismatch");
    auto& reach = reachable_[src];
    reach.assign(bins_.count, 0);
    for (long b = 0; b < n; ++b) {
      if (!occ[b]) continue;
      if (geometry_.periodic && 2 * bins_.reach + 1 >= n) {
        std::fill(reach.begin(), reach.end(), 1);
        break;
      }
      for (long d = -bins_.reach; d <= bins_.reach; ++d) {
        long c = b + d;
        if (geometry_.periodic)
          c = ((c % n) + n) % n;
        else if (c < 0 || c >= n)
          continue;
        reach[c] = 1;
      }
    }
  }
}

void RankWorker::send_halos(std::uint64_t stamp) {
  for (int dst = 0; dst < config_.rank_count; ++dst) {
    if (dst == rank_) continue;
    ByteWriter w;
    {
      ScopedTimer t(sink(), Bucket::communication);
      auto& list = send_lists_[dst];
      list.clear();
      const auto& reach = reachable_[dst];
      for (std::size_t i = 0; i < owned_; ++i)
        if (reach[bins_.bin_of(geometry_, ps_.x[i])]) list.push_back(static_cast<std::uint32_t>(i));
      pack_indices(w, ps_, list, kHaloFields);
    }
    comm_send(dst, Tag::halo, stamp, w.take());
  }
}

void RankWorker::recv_halos(std::uint64_t stamp) {
  for (int src = 0; src < config_.rank_count; ++src) {
    if (src == rank_) continue;
    Message m = comm_recv(src, Tag::halo, stamp);
    ScopedTimer t(sink(), Bucket::communication);
    ByteReader r(m.payload);
    std::size_t off = ps_.size();
    std::size_t n = unpack_append(r, ps_, kHaloFields);
    halo_ranges_[src] = {off, n};
  }
}

void RankWorker::send_halo_densities(std::uint64_t stamp) {
  for (int dst = 0; dst < config_.rank_count; ++dst) {
    if (dst == rank_) continue;
    ByteWriter w;
    {
      ScopedTimer t(sink(), Bucket::communication);
      const auto& list = send_lists_[dst];
      std::vector<double> rho(list.size());
      for (std::size_t k = 0; k < list.size(); ++k) rho[k] = ps_.density[list[k]];
      w.put_vector(rho);
    }
    comm_send(dst, Tag::halo_density, stamp, w.take());
  }
}

void RankWorker::recv_halo_densities(std::uint64_t stamp) {
  for (int src = 0; src < config_.rank_count; ++src) {
    if (src == rank_) continue;
    Message m = comm_recv(src, Tag::halo_density, stamp);
    ScopedTimer t(sink(), Bucket::communication);
    ByteReader r(m.payload);
    auto [off, n] = halo_ranges_[src];
    if (r.get_into(ps_.density, off) != n) throw ProtocolError("halo density count mismatch");
  }
}

// ---- compute --------------------------------------------------------------

void RankWorker::build_grid(double radius) {
  radius_ = radius;
  {
    ScopedTimer t(sink(), Bucket::build_grid);
    check_positions(ps_);
    grid_.build(ps_, ps_.size(), radius, geometry_);
  }
  if (options_.mode == SprMode::spr && replica_.source_count > 0) {
    ScopedTimer t(sink(), Bucket::replica);
    check_positions(replica_.copy);
    replica_.grid.build(replica_.copy, replica_.copy.size(), radius, geometry_);
  }
}

void RankWorker::find_neighbors() {
  {
    ScopedTimer t(sink(), Bucket::find_neighbors);
    table_ = sprsim::find_neighbors(ps_, owned_targets_, grid_, geometry_, config_.ng_max,
                                    options_.exec);
  }
  if (options_.mode == SprMode::spr && replica_.source_count > 0) {
    ScopedTimer t(sink(), Bucket::replica);
    replica_.lists = sprsim::find_neighbors(replica_.copy, replica_.computed, replica_.grid,
                                            geometry_, config_.ng_max, options_.exec);
  }
}

void RankWorker::compute_density() {
  {
    ScopedTimer t(sink(), Bucket::density);
    sprsim::compute_density(ps_, owned_targets_, table_, geometry_, options_.exec);
  }
  if (options_.mode == SprMode::spr && replica_.source_count > 0) {
    ScopedTimer t(sink(), Bucket::replica);
    sprsim::compute_density(replica_.copy, replica_.computed, replica_.lists, geometry_,
                            options_.exec);
  }
}

void RankWorker::compute_forces() {
  {
    ScopedTimer t(sink(), Bucket::force);
    compute_accelerations(ps_, owned_targets_, table_, geometry_, options_.exec);
  }
  if (options_.mode == SprMode::spr && replica_.source_count > 0) {
    ScopedTimer t(sink(), Bucket::replica);
    compute_accelerations(replica_.copy, replica_.computed, replica_.lists, geometry_,
                          options_.exec);
  }
}

double RankWorker::compute_timestep_candidates() {
  double best;
  {
    ScopedTimer t(sink(), Bucket::timestep);
    dt_.assign(owned_, 0.0);
    best = sprsim::compute_timestep_candidates(ps_, owned_targets_, config_.cfl_factor, dt_);
  }
  if (options_.mode == SprMode::spr && replica_.source_count > 0) {
    ScopedTimer t(sink(), Bucket::replica);
    replica_.dt.assign(replica_.computed.size(), 0.0);
    sprsim::compute_timestep_candidates(replica_.copy, replica_.computed, config_.cfl_factor,
                                        replica_.dt);
  }
  return best;
}

void RankWorker::integrate(double dt) {
  const auto bounds = smoothing_bounds(config_);
  {
    ScopedTimer t(sink(), Bucket::update);
    integrate_step(ps_, owned_targets_, dt, geometry_);
    std::vector<std::uint32_t> counts(owned_);
    for (std::size_t i = 0; i < owned_; ++i) counts[i] = table_.count(i);
    update_smoothing_lengths(ps_, owned_targets_, counts, config_.ng_target,
                             config_.dimensionality, bounds.lo, bounds.hi);
  }
  if (options_.mode == SprMode::spr && replica_.source_count > 0) {
    ScopedTimer t(sink(), Bucket::replica);
    integrate_step(replica_.copy, replica_.source_targets, dt, geometry_);
    std::vector<std::uint32_t> counts = replica_.counts;
    for (std::size_t k = 0; k < replica_.computed.size(); ++k)
      counts[replica_.computed[k]] = replica_.lists.count(k);
    update_smoothing_lengths(replica_.copy, replica_.source_targets, counts, config_.ng_target,
                             config_.dimensionality, bounds.lo, bounds.hi);
  }
}

// ---- SPR ------------------------------------------------------------------

void RankWorker::select() {
  ScopedTimer t(sink(), Bucket::selection);
  selection_ = select_particles(rank_, table_, owned_);
}

void RankWorker::send_initial_replica(std::uint64_t stamp) {
  ByteWriter w;
  {
    ScopedTimer t(sink(), Bucket::communication);
    w.put<std::uint64_t>(owned_);
    std::vector<Field> fields(all_fields().begin(), all_fields().end());
    pack_range(w, ps_, 0, ps_.size(), fields);
    w.put_vector(selection_.selected);
    std::vector<std::uint32_t> counts(owned_);
    for (std::size_t i = 0; i < owned_; ++i) counts[i] = table_.count(i);
    w.put_vector(counts);
  }
  comm_send(target_rank(), Tag::replica_init, stamp, w.take());
}

void RankWorker::recv_initial_replica(std::uint64_t stamp, double radius) {
  Message m = comm_recv(source_rank(), Tag::replica_init, stamp);
  {
    ScopedTimer t(sink(), Bucket::communication);
    ByteReader r(m.payload);
    replica_.source_count = r.get<std::uint64_t>();
    replica_.copy = ParticleSystem{};
    std::vector<Field> fields(all_fields().begin(), all_fields().end());
    unpack_append(r, replica_.copy, fields);
    replica_.computed = r.get_vector<std::uint32_t>();
    replica_.counts = r.get_vector<std::uint32_t>();
    if (replica_.counts.size() != replica_.source_count ||
        replica_.source_count > replica_.copy.size())
      throw ProtocolError("malformed initial replica");
    for (std::uint32_t p : replica_.computed)
      if (p >= replica_.source_count) throw ProtocolError("selection outside replica copy");
    replica_.source_targets.resize(replica_.source_count);
    std::iota(replica_.source_targets.begin(), replica_.source_targets.end(), 0u);
  }
  ScopedTimer t(sink(), Bucket::replica);
  replica_.grid.build(replica_.copy, replica_.copy.size(), radius, geometry_);
  replica_.lists = sprsim::find_neighbors(replica_.copy, replica_.computed, replica_.grid,
                                          geometry_, config_.ng_max, options_.exec);
  replica_.freshness = stamp;
}

void RankWorker::forward_halo(std::uint64_t stamp) {
  ByteWriter w;
  {
    ScopedTimer t(sink(), Bucket::communication);
    pack_range(w, ps_, owned_, ps_.size(), kHaloFields);
  }
  comm_send(target_rank(), Tag::replica_halo, stamp, w.take());
}

void RankWorker::recv_forwarded_halo(std::uint64_t stamp) {
  Message m = comm_recv(source_rank(), Tag::replica_halo, stamp);
  ScopedTimer t(sink(), Bucket::communication);
  ByteReader r(m.payload);
  unpack_append(r, replica_.copy, kHaloFields);
}

void RankWorker::forward_halo_densities(std::uint64_t stamp) {
  ByteWriter w;
  {
    ScopedTimer t(sink(), Bucket::communication);
    w.put_span(sub(ps_.density, owned_, ps_.size()));
  }
  comm_send(target_rank(), Tag::replica_halo_density, stamp, w.take());
}

void RankWorker::recv_forwarded_halo_densities(std::uint64_t stamp) {
  Message m = comm_recv(source_rank(), Tag::replica_halo_density, stamp);
  ScopedTimer t(sink(), Bucket::communication);
  ByteReader r(m.payload);
  if (r.get_into(replica_.copy.density, replica_.source_count) !=
      replica_.copy.size() - replica_.source_count)
    throw ProtocolError("forwarded halo density count mismatch");
}

ParticleRecord RankWorker::local_record(std::size_t i, SubStep s) const {
  ParticleRecord rec;
  for (Field f : all_fields()) rec.bits[static_cast<std::size_t>(f)] = bits_of(ps_[f][i]);
  if (s == SubStep::find_neighbors)
    rec.bits[static_cast<std::size_t>(CompareField::neighbors)] =
        neighbor_signature(ps_, table_.row(i));
  if (s == SubStep::timestep)
    rec.bits[static_cast<std::size_t>(CompareField::dt_candidate)] = bits_of(dt_[i]);
  return rec;
}

ParticleRecord RankWorker::replica_record(std::size_t k, SubStep s) const {
  ParticleRecord rec;
  const std::size_t p = replica_.computed[k];
  for (Field f : all_fields())
    rec.bits[static_cast<std::size_t>(f)] = bits_of(replica_.copy[f][p]);
  if (s == SubStep::find_neighbors)
    rec.bits[static_cast<std::size_t>(CompareField::neighbors)] =
        neighbor_signature(replica_.copy, replica_.lists.row(k));
  if (s == SubStep::timestep)
    rec.bits[static_cast<std::size_t>(CompareField::dt_candidate)] = bits_of(replica_.dt[k]);
  return rec;
}

void RankWorker::send_replica_results(std::uint64_t step, SubStep s) {
  ByteWriter w;
  {
    ScopedTimer t(sink(), Bucket::communication);
    w.put<std::uint64_t>(replica_.freshness);
    std::vector<std::uint64_t> ids(replica_.computed.size());
    std::vector<ParticleRecord> recs(replica_.computed.size());
    for (std::size_t k = 0; k < replica_.computed.size(); ++k) {
      ids[k] = replica_.copy.global_id[replica_.computed[k]];
      recs[k] = replica_record(k, s);
    }
    w.put_vector(ids);
    w.put_vector(recs);
  }
  comm_send(source_rank(), Tag::replica_result, stamp_of(step, s), w.take());
}

DetectionReport RankWorker::detect(std::uint64_t step, SubStep s) {
  const std::uint64_t stamp = stamp_of(step, s);
  Message m = comm_recv(target_rank(), Tag::replica_result, stamp);
  std::uint64_t freshness;
  std::vector<std::uint64_t> ids;
  std::vector<ParticleRecord> replica;
  {
    ScopedTimer t(sink(), Bucket::communication);
    ByteReader r(m.payload);
    freshness = r.get<std::uint64_t>();
    ids = r.get_vector<std::uint64_t>();
    replica = r.get_vector<ParticleRecord>();
  }
  if (freshness != stamp - 1)
    throw ProtocolError("rank " + std::to_string(rank_) + ": replica at " +
                        std::string(substep_name(s)) + " of step " + std::to_string(step) +
                        " carries freshness " + std::to_string(freshness) + ", expected " +
                        std::to_string(stamp - 1));
  ScopedTimer t(sink(), Bucket::detection);
  const auto& S = selection_.selected;
  if (ids.size() != S.size()) throw ProtocolError("replica result does not match the selection");
  std::vector<ParticleRecord> local(S.size());
  for (std::size_t k = 0; k < S.size(); ++k) {
    if (ids[k] != ps_.global_id[S[k]])
      throw ProtocolError("replica result does not match the selection");
    local[k] = local_record(S[k], s);
  }
  bus_.note_detect(rank_, stamp);
  return detect_errors(step, s, rank_, ids, local, replica, config_.tolerance_bits);
}

void RankWorker::send_refresh(std::uint64_t step, SubStep s, bool withhold_payload) {
  ByteWriter w;
  {
    ScopedTimer t(sink(), Bucket::communication);
    w.put<std::uint8_t>(withhold_payload ? 0 : 1);
    if (!withhold_payload) {
      switch (s) {
        case SubStep::find_neighbors: {
          w.put_vector(selection_.selected);
          std::vector<std::uint32_t> counts(owned_);
          for (std::size_t i = 0; i < owned_; ++i) counts[i] = table_.count(i);
          w.put_vector(counts);
          break;
        }
        case SubStep::density:
          w.put_span(sub(ps_.density, 0, owned_));
          break;
        case SubStep::force:
          for (Field f : {Field::acceleration_x, Field::acceleration_y, Field::acceleration_z,
                          Field::energy_rate})
            w.put_span(sub(ps_[f], 0, owned_));
          break;
        default:
          break;
      }
    }
  }
  comm_send(target_rank(), Tag::refresh, stamp_of(step, s), w.take());
}

void RankWorker::recv_refresh(std::uint64_t step, SubStep s) {
  const std::uint64_t stamp = stamp_of(step, s);
  Message m = comm_recv(source_rank(), Tag::refresh, stamp);
  bool relist = false;
  {
    ScopedTimer t(sink(), Bucket::communication);
    ByteReader r(m.payload);
    if (r.get<std::uint8_t>() != 0) {
      const std::size_t n = replica_.source_count;
      switch (s) {
        case SubStep::find_neighbors: {
          auto sel = r.get_vector<std::uint32_t>();
          auto counts = r.get_vector<std::uint32_t>();
          if (counts.size() != n) throw ProtocolError("refresh count array size mismatch");
          for (std::uint32_t p : sel)
            if (p >= n) throw ProtocolError("selection outside replica copy");
          replica_.computed = std::move(sel);
          replica_.counts = std::move(counts);
          relist = true;
          break;
        }
        case SubStep::density:
          if (r.get_into(replica_.copy.density, 0) != n)
            throw ProtocolError("refresh density size mismatch");
          break;
        case SubStep::force:
          for (Field f : {Field::acceleration_x, Field::acceleration_y, Field::acceleration_z,
                          Field::energy_rate})
            if (r.get_into(replica_.copy[f], 0) != n)
              throw ProtocolError("refresh force size mismatch");
          break;
        default:
          break;
      }
    }
  }
  if (relist) {
    ScopedTimer t(sink(), Bucket::replica);
    replica_.lists = sprsim::find_neighbors(replica_.copy, replica_.computed, replica_.grid,
                                            geometry_, config_.ng_max, options_.exec);
  }
  replica_.freshness = stamp;
}

void RankWorker::inject(Field field, std::size_t local_index, int bit) {
  if (local_index >= owned_) throw Error("injection target outside the owned particles");
  auto& v = ps_[field][local_index];
  v = flip_bit(v, bit);
}

}  // namespace sprsim
