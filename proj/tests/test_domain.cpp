#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "sprsim/config.hpp"
#include "sprsim/domain.hpp"
#include "sprsim/errors.hpp"
#include "sprsim/initial_conditions.hpp"
#include "sprsim/neighbors.hpp"

using namespace sprsim;

namespace {

ParticleSystem line_of(const std::vector<double>& xs, double h) {
  ParticleSystem ps;
  ps.resize(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    ps.global_id[i] = i;
    ps.x[i] = xs[i];
    ps.y[i] = 0.5;
    ps.z[i] = 0.5;
    ps.mass[i] = 1.0;
    ps.smoothing_length[i] = h;
  }
  return ps;
}

std::vector<std::uint32_t> iota_of(std::size_t n) {
  std::vector<std::uint32_t> t(n);
  std::iota(t.begin(), t.end(), 0u);
  return t;
}

NeighborTable search(const ParticleSystem& ps, const Geometry& g, int ng_max = 256) {
  double hmax = 0.0;
  for (double h : ps.smoothing_length) hmax = std::max(hmax, h);
  CellGrid grid;
  grid.build(ps, ps.size(), 2.0 * hmax, g);
  return find_neighbors(ps, iota_of(ps.size()), grid, g, ng_max);
}

}  // namespace

TEST(Decompose, MedianSplitOfEightPoints) {
  SimConfig c;
  c.rank_count = 2;
  c.particle_count = 8;
  auto ps = line_of({0.8, 0.1, 0.7, 0.2, 0.6, 0.3, 0.5, 0.4}, 0.05);
  auto layout = decompose_domain(c, ps);
  // gids 1,3,5,7 sit at x = 0.1..0.4
  EXPECT_EQ(layout.owned_ids[0], (std::vector<std::uint64_t>{1, 3, 5, 7}));
  EXPECT_EQ(layout.owned_ids[1], (std::vector<std::uint64_t>{0, 2, 4, 6}));
  EXPECT_EQ(layout.owner_of(6), 1);
}

TEST(Decompose, SingleRankRejected) {
  SimConfig c;
  c.rank_count = 1;
  EXPECT_THROW(validate(c), ConfigError);
  c.rank_count = 9;
  c.particle_count = 8;
  auto ps = line_of({0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8}, 0.05);
  EXPECT_THROW(decompose_domain(c, ps), ConfigError);
}

TEST(Decompose, LatticeGivesEqualBlocks) {
  SimConfig c;  // 4096 particles, 8 ranks
  auto ps = generate_initial_conditions(Workload::uniform_lattice, c);
  auto layout = decompose_domain(c, ps);
  std::size_t total = 0;
  for (int q = 0; q < 8; ++q) {
    EXPECT_EQ(layout.owned_count(q), 512u);
    total += layout.owned_count(q);
  }
  EXPECT_EQ(total, 4096u);
  // slabs tile the box in order
  EXPECT_EQ(layout.slab_lo[0], 0.0);
  EXPECT_EQ(layout.slab_hi[7], c.box_length);
  for (int q = 1; q < 8; ++q) EXPECT_EQ(layout.slab_lo[q], layout.slab_hi[q - 1]);
}

TEST(Decompose, UnevenCountsDifferByAtMostOne) {
  SimConfig c;
  c.rank_count = 3;
  c.particle_count = 1000;
  Geometry g{3, 1.0, true};
  auto ps = oracle::random_cloud(1000, 5, g, 0.05, 0.1);
  auto layout = decompose_domain(c, ps);
  std::vector<int> seen(1000, 0);
  for (int q = 0; q < 3; ++q) {
    auto n = layout.owned_count(q);
    EXPECT_TRUE(n == 333 || n == 334);
    for (auto id : layout.owned_ids[q]) seen[id]++;
  }
  for (int s : seen) EXPECT_EQ(s, 1);
  auto again = decompose_domain(c, ps);
  EXPECT_EQ(again.owned_ids, layout.owned_ids);
}

TEST(Neighbors, OutsideSupportIsEmpty) {
  Geometry g{3, 1.0, false};
  auto ps = line_of({0.2, 0.2 + 3 * 0.05}, 0.05);
  auto t = search(ps, g);
  EXPECT_EQ(t.count(0), 0u);
  EXPECT_EQ(t.count(1), 0u);
}

TEST(Neighbors, InsideSupportListsEachOther) {
  Geometry g{3, 1.0, false};
  auto ps = line_of({0.2, 0.25}, 0.05);
  auto t = search(ps, g);
  ASSERT_EQ(t.count(0), 1u);
  ASSERT_EQ(t.count(1), 1u);
  EXPECT_EQ(t.row(0)[0], 1u);
  EXPECT_EQ(t.row(1)[0], 0u);
}

TEST(Neighbors, PeriodicWrapAcrossTheBoundary) {
  Geometry g{3, 1.0, true};
  auto ps = line_of({0.01, 0.97}, 0.05);
  auto t = search(ps, g);
  EXPECT_EQ(t.count(0), 1u);
}

TEST(Neighbors, MatchesAllPairsOnRandomClouds) {
  for (int dim : {2, 3}) {
    for (bool periodic : {true, false}) {
      Geometry g{dim, 1.0, periodic};
      double hl = dim == 3 ? 0.04 : 0.01, hh = dim == 3 ? 0.09 : 0.03;
      auto ps = oracle::random_cloud(1000, 17 + dim, g, hl, hh);
      auto t = search(ps, g);
      EXPECT_EQ(oracle::rows_of(t), oracle::all_pairs(ps, g, iota_of(ps.size())))
          << "dim " << dim << " periodic " << periodic;
    }
  }
}

TEST(Neighbors, ParallelSearchMatchesSerial) {
  Geometry g{3, 1.0, true};
  auto ps = oracle::random_cloud(1500, 3, g, 0.04, 0.08);
  double hmax = 0.08;
  CellGrid grid;
  grid.build(ps, ps.size(), 2.0 * hmax, g);
  auto t = iota_of(ps.size());
  auto a = find_neighbors(ps, t, grid, g, 256, Exec::serial());
  auto b = find_neighbors(ps, t, grid, g, 256, Exec{4});
  EXPECT_EQ(a.offsets, b.offsets);
  EXPECT_EQ(a.refs, b.refs);
}

TEST(Neighbors, SymmetricUnderEqualSmoothingLengths) {
  Geometry g{3, 1.0, true};
  auto ps = oracle::random_cloud(800, 9, g, 0.07, 0.07);
  auto t = search(ps, g);
  auto adj = oracle::owned_graph(t, ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i)
    for (std::uint32_t j : t.row(i)) {
      auto r = t.row(j);
      EXPECT_TRUE(std::find(r.begin(), r.end(), i) != r.end());
    }
}

TEST(Neighbors, OverflowReported) {
  Geometry g{3, 1.0, true};
  auto ps = oracle::random_cloud(500, 2, g, 0.2, 0.2);
  EXPECT_THROW(search(ps, g, 8), NeighborOverflow);
}

TEST(SmoothingLength, FixedPointAndCubeRoot) {
  ParticleSystem ps = line_of({0.1, 0.2, 0.3}, 0.08);
  std::vector<std::uint32_t> t{0, 1, 2};
  std::vector<std::uint32_t> counts{64, 512, 0};
  update_smoothing_lengths(ps, t, counts, 64, 3, 0.02, 0.32);
  EXPECT_EQ(ps.smoothing_length[0], 0.08);
  EXPECT_DOUBLE_EQ(ps.smoothing_length[1], 0.04);
  // isolated: grows by 64^(1/3) = 4, exactly at the clamp
  EXPECT_DOUBLE_EQ(ps.smoothing_length[2], 0.32);

  ParticleSystem p2 = line_of({0.1}, 0.08);
  std::vector<std::uint32_t> t2{0}, c2{0};
  update_smoothing_lengths(p2, t2, c2, 64, 3, 0.02, 0.2);
  EXPECT_EQ(p2.smoothing_length[0], 0.2);
}

TEST(SmoothingLength, BoundsFollowInitialLength) {
  SimConfig c;
  double h0 = initial_smoothing_length(c);
  auto b = smoothing_bounds(c);
  EXPECT_EQ(b.lo, 0.25 * h0);
  EXPECT_LE(b.hi, 4.0 * h0);
  EXPECT_LT(2.0 * b.hi, 0.5 * c.box_length);
}

TEST(Config, InvariantsRejected) {
  SimConfig c;
  c.tolerance_bits = 53;
  EXPECT_THROW(validate(c), ConfigError);
  c = SimConfig{};
  c.ng_target = 300;
  EXPECT_THROW(validate(c), ConfigError);
  c = SimConfig{};
  c.dimensionality = 4;
  EXPECT_THROW(validate(c), ConfigError);
  c = SimConfig{};
  EXPECT_NO_THROW(validate(c));
}
