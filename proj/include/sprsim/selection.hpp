#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sprsim/neighbors.hpp"
#include "sprsim/particles.hpp"

namespace sprsim {

/// Locally owned particles chosen for replication on the target rank.
struct SelectionSet {
  int rank = 0;
  /// Local indices, ascending (owned particles are stored in global-id order).
  std::vector<std::uint32_t> selected;
  std::size_t owned_count = 0;

  double fraction() const {
    return owned_count == 0 ? 0.0 : static_cast<double>(selected.size()) / owned_count;
  }
};

/// Greedy maximal independent set over the owned-particle neighbor graph.
///
/// Two owned particles are adjacent when either lists the other. Candidates
/// are visited in ascending global id; a candidate is taken unless it was
/// removed by an earlier pick or lists an already selected particle, and each
/// pick removes its own neighbor list. Runs in O(n_q ng_max).
///
/// `table` row i must belong to owned particle i; references >= `owned_count`
/// (halo copies) are ignored.
SelectionSet select_particles(int rank, const NeighborTable& table, std::size_t owned_count);

}  // namespace sprsim
