#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sprsim/exec.hpp"
#include "sprsim/geometry.hpp"
#include "sprsim/particles.hpp"

namespace sprsim {

/// Kernel support radius in units of the smoothing length.
inline constexpr double kSupportFactor = 2.0;

/// Per-target neighbor lists in CSR form. References index the particle
/// system the table was built against (owned entries first, halo after),
/// and each row is sorted by global id.
struct NeighborTable {
  std::vector<std::uint32_t> offsets{0};
  std::vector<std::uint32_t> refs;

  std::size_t rows() const { return offsets.size() - 1; }
  std::span<const std::uint32_t> row(std::size_t k) const {
    return {refs.data() + offsets[k], refs.data() + offsets[k + 1]};
  }
  std::uint32_t count(std::size_t k) const { return offsets[k + 1] - offsets[k]; }
};

/// Uniform cell grid over the first `point_count` particles of a system.
/// Cells are about half the interaction radius wide.
class CellGrid {
 public:
  CellGrid() = default;

  /// `min_edge` must be at least the largest interaction radius queried.
  void build(const ParticleSystem& ps, std::size_t point_count, double min_edge,
             const Geometry& geometry);

  std::size_t point_count() const { return point_count_; }
  double edge() const { return min_edge_; }

  /// Calls `fn(j)` for every indexed point in the block of cells that covers
  /// a ball of `radius` <= edge() around (x, y, z). Each point is visited once.
  template <typename Fn>
  void for_each_candidate(double x, double y, double z, double radius, Fn&& fn) const;

 private:
  int cell_coord(int axis, double v) const;

  Geometry geometry_;
  std::size_t point_count_ = 0;
  double min_edge_ = 0.0;
  int cells_[3] = {1, 1, 1};
  double lo_[3] = {0, 0, 0};
  double width_[3] = {1, 1, 1};
  std::vector<std::uint32_t> cell_start_;
  std::vector<std::uint32_t> sorted_;
};

/// Builds neighbor lists for `targets`: j is listed for i iff j != i and
/// |x_i - x_j|^2 < (2 h_i)^2. Throws NeighborOverflow above `ng_max`.
NeighborTable find_neighbors(const ParticleSystem& ps, std::span<const std::uint32_t> targets,
                             const CellGrid& grid, const Geometry& geometry, int ng_max,
                             Exec exec = Exec::serial());

/// Rescales each h by (ng_target / max(count, 1))^(1/d), clamped to [lo, hi].
void update_smoothing_lengths(ParticleSystem& ps, std::span<const std::uint32_t> targets,
                              std::span<const std::uint32_t> counts, int ng_target, int dim,
                              double lo, double hi);

/// FNV-1a digest of the global ids in a neighbor row.
std::uint64_t neighbor_signature(const ParticleSystem& ps, std::span<const std::uint32_t> row);

// ---------------------------------------------------------------------------

template <typename Fn>
void CellGrid::for_each_candidate(double x, double y, double z, double radius, Fn&& fn) const {
  const double p[3] = {x, y, z};
  int lo[3], hi[3];
  for (int a = 0; a < 3; ++a) {
    if (cells_[a] == 1) {
      lo[a] = hi[a] = 0;
      continue;
    }
    int c = cell_coord(a, p[a]);
    int reach = static_cast<int>(std::ceil(radius / width_[a]));
    if (reach < 1) reach = 1;
    if (geometry_.periodic && cells_[a] >= 2 * reach + 1) {
      lo[a] = c - reach;
      hi[a] = c + reach;
    } else if (geometry_.periodic) {
      lo[a] = 0;
      hi[a] = cells_[a] - 1;
    } else {
      lo[a] = c - reach > 0 ? c - reach : 0;
      hi[a] = c + reach < cells_[a] ? c + reach : cells_[a] - 1;
    }
  }
  for (int i = lo[0]; i <= hi[0]; ++i) {
    int ci = (i + cells_[0]) % cells_[0];
    for (int j = lo[1]; j <= hi[1]; ++j) {
      int cj = (j + cells_[1]) % cells_[1];
      for (int k = lo[2]; k <= hi[2]; ++k) {
        int ck = (k + cells_[2]) % cells_[2];
        std::size_t cell = (static_cast<std::size_t>(ci) * cells_[1] + cj) * cells_[2] + ck;
        for (std::uint32_t s = cell_start_[cell]; s < cell_start_[cell + 1]; ++s) fn(sorted_[s]);
      }
    }
  }
}

}  // namespace sprsim
