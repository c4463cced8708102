#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>

#include "oracles.hpp"
#include "sprsim/errors.hpp"
#include "sprsim/initial_conditions.hpp"
#include "sprsim/kernel.hpp"
#include "sprsim/physics.hpp"

using namespace sprsim;

namespace {

std::vector<std::uint32_t> iota_of(std::size_t n) {
  std::vector<std::uint32_t> t(n);
  std::iota(t.begin(), t.end(), 0u);
  return t;
}

struct Prepared {
  ParticleSystem ps;
  NeighborTable table;
  std::vector<std::uint32_t> targets;
};

Prepared prepare(ParticleSystem ps, const Geometry& g) {
  Prepared p;
  p.targets = iota_of(ps.size());
  double hmax = 0.0;
  for (double h : ps.smoothing_length) hmax = std::max(hmax, h);
  CellGrid grid;
  grid.build(ps, ps.size(), 2.0 * hmax, g);
  p.table = find_neighbors(ps, p.targets, grid, g, 512);
  p.ps = std::move(ps);
  return p;
}

std::uint64_t bits(double v) { return std::bit_cast<std::uint64_t>(v); }

}  // namespace

TEST(Kernel, CompactSupportAndContinuity) {
  KernelSpec k3{3};
  EXPECT_EQ(kernel_value(k3, 2.0, 1.0), 0.0);
  EXPECT_EQ(kernel_value(k3, 3.5, 1.0), 0.0);
  EXPECT_EQ(kernel_value(k3, 0.0, 1.0), 1.0 / std::numbers::pi);
  double h = 0.3;
  EXPECT_EQ(kernel_value(k3, 0.0, h), (1.0 / std::numbers::pi) / (h * h * h));
  EXPECT_EQ(spline_shape(1.0), 0.25);
  EXPECT_EQ(spline_shape(std::nextafter(1.0, 0.0)) - 0.25 < 1e-15, true);
  EXPECT_EQ(spline_slope(2.0), 0.0);
}

TEST(Kernel, NormalizesToOne) {
  // radial quadrature with the midpoint rule
  for (int dim : {2, 3}) {
    KernelSpec k{dim};
    const double h = 0.7;
    const int n = 200000;
    const double dr = 2.0 * h / n;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      double r = (i + 0.5) * dr;
      double shell = dim == 3 ? 4.0 * std::numbers::pi * r * r : 2.0 * std::numbers::pi * r;
      sum += kernel_value(k, r, h) * shell * dr;
    }
    EXPECT_NEAR(sum, 1.0, 1e-6) << "dim " << dim;
  }
}

TEST(Kernel, DerivativeMatchesFiniteDifference) {
  KernelSpec k{3};
  for (double r : {0.1, 0.5, 0.99, 1.3, 1.9}) {
    double e = 1e-6;
    double fd = (kernel_value(k, r + e, 1.0) - kernel_value(k, r - e, 1.0)) / (2 * e);
    EXPECT_NEAR(kernel_derivative(k, r, 1.0), fd, 1e-7);
  }
}

TEST(Density, IsolatedParticleIsSelfTerm) {
  Geometry g{3, 1.0, false};
  ParticleSystem ps;
  ps.resize(1);
  ps.x[0] = ps.y[0] = ps.z[0] = 0.5;
  ps.mass[0] = 2.0;
  ps.smoothing_length[0] = 0.1;
  auto p = prepare(ps, g);
  compute_density(p.ps, p.targets, p.table, g);
  EXPECT_EQ(p.ps.density[0], 2.0 * kernel_value(KernelSpec{3}, 0.0, 0.1));
}

TEST(Density, SymmetricPairHasEqualDensities) {
  Geometry g{3, 1.0, false};
  ParticleSystem ps;
  ps.resize(2);
  ps.global_id = {0, 1};
  ps.x = {0.4, 0.5};
  ps.y = {0.5, 0.5};
  ps.z = {0.5, 0.5};
  ps.mass = {1.0, 1.0};
  ps.smoothing_length = {0.08, 0.08};
  auto p = prepare(ps, g);
  compute_density(p.ps, p.targets, p.table, g);
  EXPECT_EQ(bits(p.ps.density[0]), bits(p.ps.density[1]));
}

TEST(Density, LatticeMatchesOracleBitForBit) {
  SimConfig c;
  c.particle_count = 512;
  Geometry g{3, 1.0, true};
  auto ps = generate_initial_conditions(Workload::perturbed_lattice, c);
  auto p = prepare(ps, g);
  compute_density(p.ps, p.targets, p.table, g);
  EXPECT_TRUE(oracle::bits_equal(p.ps.density, oracle::density(p.ps, g)));
}

TEST(Density, ParallelMatchesSerial) {
  Geometry g{3, 1.0, true};
  auto p = prepare(oracle::random_cloud(2000, 11, g, 0.05, 0.09), g);
  auto q = p;
  compute_density_serial(p.ps, p.targets, p.table, g);
  compute_density_parallel(q.ps, q.targets, q.table, g, 4);
  EXPECT_TRUE(oracle::bits_equal(p.ps.density, q.ps.density));
}

TEST(Forces, UniformLatticeCancels) {
  SimConfig c;
  c.particle_count = 4096;
  Geometry g{3, 1.0, true};
  auto p = prepare(generate_initial_conditions(Workload::uniform_lattice, c), g);
  compute_density(p.ps, p.targets, p.table, g);
  compute_accelerations(p.ps, p.targets, p.table, g);
  // characteristic scale P / (rho h)
  double rho = p.ps.density[0];
  double scale = pressure(rho, 1.0) / (rho * p.ps.smoothing_length[0]);
  double amax = 0.0;
  for (std::size_t i = 0; i < p.ps.size(); ++i)
    amax = std::max({amax, std::fabs(p.ps.ax[i]), std::fabs(p.ps.ay[i]), std::fabs(p.ps.az[i])});
  EXPECT_LT(amax, 1e-10 * scale);
}

TEST(Forces, TwoParticlesAreAntisymmetric) {
  Geometry g{3, 1.0, false};
  ParticleSystem ps;
  ps.resize(2);
  ps.global_id = {0, 1};
  ps.x = {0.45, 0.5};
  ps.y = {0.5, 0.53};
  ps.z = {0.5, 0.49};
  ps.vx = {0.1, -0.2};
  ps.mass = {1.0, 3.0};
  ps.internal_energy = {1.0, 2.0};
  ps.smoothing_length = {0.06, 0.06};
  auto p = prepare(ps, g);
  compute_density(p.ps, p.targets, p.table, g);
  compute_accelerations(p.ps, p.targets, p.table, g);
  EXPECT_NE(p.ps.ax[0], 0.0);
  EXPECT_NEAR(p.ps.ax[0], -p.ps.ax[1] * (3.0 / 1.0), 1e-12 * std::fabs(p.ps.ax[0]));
  EXPECT_NEAR(p.ps.ay[0], -p.ps.ay[1] * 3.0, 1e-12 * std::fabs(p.ps.ay[0]));
  EXPECT_NEAR(p.ps.az[0], -p.ps.az[1] * 3.0, 1e-12 * std::fabs(p.ps.az[0]));
  // pairwise work cancels: m1 (v1.a1 + du1) + m2 (v2.a2 + du2) = 0
  double e = 1.0 * (p.ps.vx[0] * p.ps.ax[0] + p.ps.energy_rate[0]) +
             3.0 * (p.ps.vx[1] * p.ps.ax[1] + p.ps.energy_rate[1]);
  EXPECT_NEAR(e, 0.0, 1e-12 * std::fabs(p.ps.ax[0]));
}

TEST(Forces, RandomCloudMatchesOracleBitForBit) {
  Geometry g{3, 1.0, true};
  auto p = prepare(oracle::random_cloud(256, 21, g, 0.1, 0.16), g);
  compute_density(p.ps, p.targets, p.table, g);
  compute_accelerations(p.ps, p.targets, p.table, g);
  auto f = oracle::forces(p.ps, g);
  EXPECT_TRUE(oracle::bits_equal(p.ps.ax, f.ax));
  EXPECT_TRUE(oracle::bits_equal(p.ps.ay, f.ay));
  EXPECT_TRUE(oracle::bits_equal(p.ps.az, f.az));
  EXPECT_TRUE(oracle::bits_equal(p.ps.energy_rate, f.du));
}

TEST(Forces, ParallelMatchesSerial) {
  Geometry g{3, 1.0, true};
  auto p = prepare(oracle::random_cloud(2000, 12, g, 0.05, 0.09), g);
  compute_density(p.ps, p.targets, p.table, g);
  auto q = p;
  compute_accelerations_serial(p.ps, p.targets, p.table, g);
  compute_accelerations_parallel(q.ps, q.targets, q.table, g, 4);
  EXPECT_TRUE(oracle::bits_equal(p.ps.ax, q.ps.ax));
  EXPECT_TRUE(oracle::bits_equal(p.ps.energy_rate, q.ps.energy_rate));
}

TEST(Forces, ZeroDensityRejected) {
  Geometry g{3, 1.0, false};
  ParticleSystem ps;
  ps.resize(2);
  ps.global_id = {0, 1};
  ps.x = {0.45, 0.5};
  ps.y = {0.5, 0.5};
  ps.z = {0.5, 0.5};
  ps.mass = {1.0, 1.0};
  ps.smoothing_length = {0.06, 0.06};
  auto p = prepare(ps, g);
  EXPECT_THROW(compute_accelerations(p.ps, p.targets, p.table, g), PhysicsError);
}

TEST(Timestep, FormulaAndLinearity) {
  ParticleSystem ps;
  ps.resize(1);
  ps.smoothing_length[0] = 0.1;
  // c = 1: gamma (gamma - 1) u = 1
  ps.density[0] = 1.0;
  ps.internal_energy[0] = 1.0 / (kGamma * (kGamma - 1.0));
  double c = sound_speed(1.0, ps.internal_energy[0]);
  EXPECT_NEAR(c, 1.0, 1e-15);
  double dt = timestep_candidate(ps, 0, 0.3);
  EXPECT_EQ(dt, 0.3 * 0.1 / (c + 0.0 + kTimestepEpsilon));
  ps.smoothing_length[0] = 0.2;
  EXPECT_EQ(timestep_candidate(ps, 0, 0.3), 2.0 * dt);
}

TEST(Timestep, NonFiniteRejected) {
  ParticleSystem ps;
  ps.resize(1);
  ps.smoothing_length[0] = 0.1;
  ps.density[0] = 1.0;
  ps.internal_energy[0] = NAN;
  std::vector<std::uint32_t> t{0};
  std::vector<double> out(1);
  EXPECT_THROW(compute_timestep_candidates(ps, t, 0.3, out), PhysicsError);
}

TEST(Integrate, DriftFixedPointAndWrap) {
  Geometry g{3, 1.0, true};
  ParticleSystem ps;
  ps.resize(2);
  ps.x = {0.3, 1.0 - 0.01};
  ps.y = {0.5, 0.5};
  ps.z = {0.5, 0.5};
  ps.vx = {0.25, 0.5};
  ps.internal_energy = {1.0, 1.0};
  std::vector<std::uint32_t> t{0, 1};
  integrate_step(ps, t, 0.04, g);
  EXPECT_EQ(ps.x[0], 0.3 + 0.25 * 0.04);
  EXPECT_NEAR(ps.x[1], 0.01, 1e-15);
  EXPECT_EQ(ps.y[0], 0.5);

  ParticleSystem still;
  still.resize(1);
  still.x = {0.2};
  still.y = {0.3};
  still.z = {0.4};
  still.internal_energy = {2.0};
  auto before = still;
  std::vector<std::uint32_t> one{0};
  integrate_step(still, one, 0.1, g);
  EXPECT_TRUE(still.bit_equal(before));
}

TEST(Integrate, NonFinitePositionRejected) {
  Geometry g{3, 1.0, true};
  ParticleSystem ps;
  ps.resize(1);
  ps.x = {0.5};
  ps.vx = {INFINITY};
  std::vector<std::uint32_t> t{0};
  EXPECT_THROW(integrate_step(ps, t, 0.1, g), PhysicsError);
}

TEST(InitialConditions, EightParticleLattice) {
  SimConfig c;
  c.particle_count = 8;
  auto ps = generate_initial_conditions(Workload::uniform_lattice, c);
  ASSERT_EQ(ps.size(), 8u);
  EXPECT_EQ(ps.x[0], 0.25);
  EXPECT_EQ(ps.x[7], 0.75);
  EXPECT_EQ(ps.z[1] - ps.z[0], 0.5);
  for (double m : ps.mass) EXPECT_EQ(m, 1.0 / 8.0);
}

TEST(InitialConditions, RejectsNonLatticeCounts) {
  SimConfig c;
  c.particle_count = 1000 + 1;
  EXPECT_THROW(generate_initial_conditions(Workload::uniform_lattice, c), ConfigError);
  c.dimensionality = 2;
  c.particle_count = 4096;
  EXPECT_NO_THROW(generate_initial_conditions(Workload::uniform_lattice, c));
}

TEST(InitialConditions, SameSeedIsBitIdentical) {
  SimConfig c;
  c.rng_seed = 99;
  auto a = generate_initial_conditions(Workload::perturbed_lattice, c);
  auto b = generate_initial_conditions(Workload::perturbed_lattice, c);
  EXPECT_TRUE(a.bit_equal(b));
  double spacing = 1.0 / 16.0;
  auto u = generate_initial_conditions(Workload::uniform_lattice, c);
  for (std::size_t i = 0; i < a.size(); ++i) {
    Geometry g{3, 1.0, true};
    EXPECT_LE(std::fabs(g.separation(a.x[i] - u.x[i])), 0.1 * spacing);
  }
}

TEST(InitialConditions, HotSphereBoostCount) {
  SimConfig c;
  auto ps = generate_initial_conditions(Workload::hot_sphere, c);
  std::size_t boosted = 0, inside = 0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    boosted += ps.internal_energy[i] == 100.0 * c.base_energy;
    double dx = ps.x[i] - 0.5, dy = ps.y[i] - 0.5, dz = ps.z[i] - 0.5;
    inside += dx * dx + dy * dy + dz * dz < (1.0 / 8.0) * (1.0 / 8.0);
  }
  EXPECT_EQ(boosted, inside);
  EXPECT_EQ(boosted, 32u);
}

TEST(Conservation, MomentumOnUniformLattice) {
  SimConfig c;
  c.particle_count = 512;
  Geometry g{3, 1.0, true};
  auto p = prepare(generate_initial_conditions(Workload::perturbed_lattice, c), g);
  for (int step = 0; step < 3; ++step) {
    compute_density(p.ps, p.targets, p.table, g);
    compute_accelerations(p.ps, p.targets, p.table, g);
    integrate_step(p.ps, p.targets, 1e-3, g);
    double px = 0, py = 0, pz = 0, mv = 0;
    for (std::size_t i = 0; i < p.ps.size(); ++i) {
      px += p.ps.mass[i] * p.ps.vx[i];
      py += p.ps.mass[i] * p.ps.vy[i];
      pz += p.ps.mass[i] * p.ps.vz[i];
      mv += p.ps.mass[i] * std::sqrt(p.ps.vx[i] * p.ps.vx[i] + p.ps.vy[i] * p.ps.vy[i] +
                                   p.ps.vz[i] * p.ps.vz[i]);
    }
    if (mv > 0) {
      EXPECT_LT(std::sqrt(px * px + py * py + pz * pz) / mv, 1e-10 * (step + 1));
    }
  }
}
