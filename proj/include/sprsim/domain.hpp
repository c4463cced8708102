#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "sprsim/config.hpp"
#include "sprsim/particles.hpp"

namespace sprsim {

/// Slab decomposition of the box along x.
struct RankLayout {
  int rank_count = 0;
  std::vector<double> slab_lo;
  std::vector<double> slab_hi;
  /// Global ids owned by each rank, ascending.
  std::vector<std::vector<std::uint64_t>> owned_ids;
  std::unordered_map<std::uint64_t, int> owner;

  int owner_of(std::uint64_t gid) const;
  std::size_t owned_count(int rank) const { return owned_ids.at(rank).size(); }
};

/// Sorts particles by (x, global id) and cuts contiguous blocks of
/// ceil(n/Q) or floor(n/Q) particles. Slab edges sit midway between blocks.
RankLayout decompose_domain(const SimConfig& config, const ParticleSystem& global);

/// Per-rank particle systems, each in ascending global id order.
std::vector<ParticleSystem> scatter(const ParticleSystem& global, const RankLayout& layout);

}  // namespace sprsim
