#include "sprsim/neighbors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

#include "sprsim/errors.hpp"

namespace sprsim {

namespace {

constexpr int kMaxCellsPerAxis = 1024;

int cells_for(double span, double edge) {
  if (!(edge > 0) || !(span > 0)) return 1;
  double c = std::floor(span / edge);
  if (!(c >= 1)) return 1;
  return c > kMaxCellsPerAxis ? kMaxCellsPerAxis : static_cast<int>(c);
}

void gather_row(const ParticleSystem& ps, std::uint32_t i, const CellGrid& grid,
                const Geometry& g, std::vector<std::uint32_t>& row) {
  row.clear();
  const double xi = ps.x[i], yi = ps.y[i], zi = ps.z[i];
  const double radius = kSupportFactor * ps.smoothing_length[i];
  const double r2max = radius * radius;
  grid.for_each_candidate(xi, yi, zi, radius, [&](std::uint32_t j) {
    if (j == i) return;
    double dx = g.separation(xi - ps.x[j]);
    double dy = g.separation(yi - ps.y[j]);
    double dz = g.separation(zi - ps.z[j]);
    if (dx * dx + dy * dy + dz * dz < r2max) row.push_back(j);
  });
  std::sort(row.begin(), row.end(), [&](std::uint32_t a, std::uint32_t b) {
    return ps.global_id[a] < ps.global_id[b];
  });
}

}  // namespace

void CellGrid::build(const ParticleSystem& ps, std::size_t point_count, double min_edge,
                     const Geometry& geometry) {
  geometry_ = geometry;
  point_count_ = point_count;
  min_edge_ = min_edge;
  const std::vector<double>* coords[3] = {&ps.x, &ps.y, &ps.z};
  for (int a = 0; a < 3; ++a) {
    cells_[a] = 1;
    lo_[a] = 0.0;
    width_[a] = geometry.box;
    if (a >= geometry.dim) continue;
    if (geometry.periodic) {
      cells_[a] = cells_for(geometry.box, 0.5 * min_edge);
      width_[a] = geometry.box / cells_[a];
    } else {
      double lo = 0.0, hi = 0.0;
      if (point_count > 0) {
        auto [mn, mx] = std::minmax_element(coords[a]->begin(),
                                            coords[a]->begin() + static_cast<long>(point_count));
        lo = *mn;
        hi = *mx;
      }
      lo_[a] = lo;
      cells_[a] = cells_for(hi - lo, 0.5 * min_edge);
      width_[a] = hi > lo ? (hi - lo) / cells_[a] : 1.0;
    }
  }

  const std::size_t ncell = static_cast<std::size_t>(cells_[0]) * cells_[1] * cells_[2];
  std::vector<std::uint32_t> cell_of(point_count);
  cell_start_.assign(ncell + 1, 0);
  for (std::size_t i = 0; i < point_count; ++i) {
    std::size_t c = (static_cast<std::size_t>(cell_coord(0, ps.x[i])) * cells_[1] +
                     cell_coord(1, ps.y[i])) *
                        cells_[2] +
                    cell_coord(2, ps.z[i]);
    cell_of[i] = static_cast<std::uint32_t>(c);
    ++cell_start_[c + 1];
  }
  for (std::size_t c = 0; c < ncell; ++c) cell_start_[c + 1] += cell_start_[c];
  sorted_.assign(point_count, 0);
  std::vector<std::uint32_t> fill(cell_start_.begin(), cell_start_.end() - 1);
  for (std::size_t i = 0; i < point_count; ++i)
    sorted_[fill[cell_of[i]]++] = static_cast<std::uint32_t>(i);
}

int CellGrid::cell_coord(int axis, double v) const {
  if (axis >= geometry_.dim || cells_[axis] == 1 || !std::isfinite(v)) return 0;
  double w = geometry_.periodic ? geometry_.wrap(v) : v - lo_[axis];
  double c = std::floor(w / width_[axis]);
  if (c < 0) return 0;
  if (c >= cells_[axis]) return cells_[axis] - 1;
  return static_cast<int>(c);
}

NeighborTable find_neighbors(const ParticleSystem& ps, std::span<const std::uint32_t> targets,
                             const CellGrid& grid, const Geometry& geometry, int ng_max,
                             Exec exec) {
  const long n = static_cast<long>(targets.size());
  std::vector<std::vector<std::uint32_t>> rows(targets.size());
  std::atomic<long> overflow{-1};

#pragma omp parallel for schedule(static) num_threads(exec.threads) if (exec.parallel())
  for (long k = 0; k < n; ++k) {
    gather_row(ps, targets[k], grid, geometry, rows[k]);
    if (rows[k].size() > static_cast<std::size_t>(ng_max)) {
      long expected = -1;
      overflow.compare_exchange_strong(expected, k);
    }
  }
  if (overflow.load() >= 0) {
    long k = overflow.load();
    throw NeighborOverflow("particle " + std::to_string(ps.global_id[targets[k]]) + " has " +
                           std::to_string(rows[k].size()) + " neighbors, above ng_max = " +
                           std::to_string(ng_max));
  }

  NeighborTable t;
  t.offsets.reserve(targets.size() + 1);
  std::size_t total = 0;
  for (const auto& r : rows) total += r.size();
  t.refs.reserve(total);
  for (const auto& r : rows) {
    t.refs.insert(t.refs.end(), r.begin(), r.end());
    t.offsets.push_back(static_cast<std::uint32_t>(t.refs.size()));
  }
  return t;
}

void update_smoothing_lengths(ParticleSystem& ps, std::span<const std::uint32_t> targets,
                              std::span<const std::uint32_t> counts, int ng_target, int dim,
                              double lo, double hi) {
  for (std::size_t k = 0; k < targets.size(); ++k) {
    double c = counts[k] > 0 ? static_cast<double>(counts[k]) : 1.0;
    double ratio = ng_target / c;
    double scale = dim == 3 ? std::cbrt(ratio) : std::sqrt(ratio);
    double h = ps.smoothing_length[targets[k]] * scale;
    ps.smoothing_length[targets[k]] = std::clamp(h, lo, hi);
  }
}

std::uint64_t neighbor_signature(const ParticleSystem& ps, std::span<const std::uint32_t> row) {
  std::uint64_t h = 14695981039346656037ull;
  for (std::uint32_t j : row) {
    std::uint64_t id = ps.global_id[j];
    for (int b = 0; b < 8; ++b) {
      h ^= (id >> (8 * b)) & 0xffu;
      h *= 1099511628211ull;
    }
  }
  // Length is mixed in so a dropped trailing id cannot collide.
  h ^= row.size();
  h *= 1099511628211ull;
  return h;
}

}  // namespace sprsim
