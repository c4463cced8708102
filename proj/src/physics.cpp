#include "sprsim/physics.hpp"

#include <cmath>
#include <string>

#include "sprsim/errors.hpp"

namespace sprsim {

namespace {

// Row k belongs to targets[k]; the self term is merged at its global-id slot.
inline double density_of(const ParticleSystem& ps, std::uint32_t i,
                         std::span<const std::uint32_t> row, const Geometry& g,
                         const KernelSpec& K) {
  const double xi = ps.x[i], yi = ps.y[i], zi = ps.z[i], hi = ps.smoothing_length[i];
  const std::uint64_t gi = ps.global_id[i];
  double rho = 0.0;
  bool self_done = false;
  for (std::uint32_t j : row) {
    if (!self_done && gi < ps.global_id[j]) {
      rho += ps.mass[i] * kernel_value(K, 0.0, hi);
      self_done = true;
    }
    double dx = g.separation(xi - ps.x[j]);
    double dy = g.separation(yi - ps.y[j]);
    double dz = g.separation(zi - ps.z[j]);
    double r = std::sqrt(dx * dx + dy * dy + dz * dz);
    rho += ps.mass[j] * kernel_value(K, r, hi);
  }
  if (!self_done) rho += ps.mass[i] * kernel_value(K, 0.0, hi);
  return rho;
}

std::vector<double> pressure_terms(const ParticleSystem& ps,
                                   std::span<const std::uint32_t> targets,
                                   const NeighborTable& table) {
  std::vector<double> t(ps.size(), 0.0);
  std::vector<char> done(ps.size(), 0);
  auto fill = [&](std::uint32_t j) {
    if (done[j]) return;
    done[j] = 1;
    if (ps.density[j] == 0.0)
      throw PhysicsError("zero density at particle " + std::to_string(ps.global_id[j]));
    t[j] = pressure_term(ps.density[j], ps.internal_energy[j]);
  };
  for (std::size_t k = 0; k < targets.size(); ++k) {
    fill(targets[k]);
    for (std::uint32_t j : table.row(k)) fill(j);
  }
  return t;
}

inline void force_of(ParticleSystem& ps, std::uint32_t i, std::span<const std::uint32_t> row,
                     const Geometry& g, const KernelSpec& K, const std::vector<double>& t) {
  const double xi = ps.x[i], yi = ps.y[i], zi = ps.z[i], hi = ps.smoothing_length[i];
  const double vxi = ps.vx[i], vyi = ps.vy[i], vzi = ps.vz[i], ti = t[i];
  double ax = 0.0, ay = 0.0, az = 0.0, du = 0.0;
  for (std::uint32_t j : row) {
    double dx = g.separation(xi - ps.x[j]);
    double dy = g.separation(yi - ps.y[j]);
    double dz = g.separation(zi - ps.z[j]);
    double r = std::sqrt(dx * dx + dy * dy + dz * dz);
    if (r == 0.0) continue;
    double f = kernel_derivative(K, r, hi) / r;
    double gx = f * dx, gy = f * dy, gz = f * dz;
    double pij = ps.mass[j] * (ti + t[j]);
    ax -= pij * gx;
    ay -= pij * gy;
    az -= pij * gz;
    du += pij * ((vxi - ps.vx[j]) * gx + (vyi - ps.vy[j]) * gy + (vzi - ps.vz[j]) * gz);
  }
  ps.ax[i] = ax;
  ps.ay[i] = ay;
  ps.az[i] = az;
  ps.energy_rate[i] = 0.5 * du;
}

}  // namespace

void compute_density(ParticleSystem& ps, std::span<const std::uint32_t> targets,
                     const NeighborTable& table, const Geometry& geometry, Exec exec) {
  if (exec.parallel())
    compute_density_parallel(ps, targets, table, geometry, exec.threads);
  else
    compute_density_serial(ps, targets, table, geometry);
}

void compute_density_serial(ParticleSystem& ps, std::span<const std::uint32_t> targets,
                            const NeighborTable& table, const Geometry& geometry) {
  const KernelSpec K{geometry.dim};
  for (std::size_t k = 0; k < targets.size(); ++k)
    ps.density[targets[k]] = density_of(ps, targets[k], table.row(k), geometry, K);
}

void compute_density_parallel(ParticleSystem& ps, std::span<const std::uint32_t> targets,
                              const NeighborTable& table, const Geometry& geometry, int threads) {
  const KernelSpec K{geometry.dim};
  const long n = static_cast<long>(targets.size());
#pragma omp parallel for schedule(static) num_threads(threads)
  for (long k = 0; k < n; ++k)
    ps.density[targets[k]] = density_of(ps, targets[k], table.row(k), geometry, K);
}

void compute_accelerations(ParticleSystem& ps, std::span<const std::uint32_t> targets,
                           const NeighborTable& table, const Geometry& geometry, Exec exec) {
  if (exec.parallel())
    compute_accelerations_parallel(ps, targets, table, geometry, exec.threads);
  else
    compute_accelerations_serial(ps, targets, table, geometry);
}

void compute_accelerations_serial(ParticleSystem& ps, std::span<const std::uint32_t> targets,
                                  const NeighborTable& table, const Geometry& geometry) {
  const KernelSpec K{geometry.dim};
  auto t = pressure_terms(ps, targets, table);
  for (std::size_t k = 0; k < targets.size(); ++k)
    force_of(ps, targets[k], table.row(k), geometry, K, t);
}

void compute_accelerations_parallel(ParticleSystem& ps, std::span<const std::uint32_t> targets,
                                    const NeighborTable& table, const Geometry& geometry,
                                    int threads) {
  const KernelSpec K{geometry.dim};
  auto t = pressure_terms(ps, targets, table);
  const long n = static_cast<long>(targets.size());
#pragma omp parallel for schedule(static) num_threads(threads)
  for (long k = 0; k < n; ++k) force_of(ps, targets[k], table.row(k), geometry, K, t);
}

double timestep_candidate(const ParticleSystem& ps, std::size_t i, double cfl) {
  double c = sound_speed(ps.density[i], ps.internal_energy[i]);
  double v = std::sqrt(ps.vx[i] * ps.vx[i] + ps.vy[i] * ps.vy[i] + ps.vz[i] * ps.vz[i]);
  return cfl * ps.smoothing_length[i] / (c + v + kTimestepEpsilon);
}

double compute_timestep_candidates(const ParticleSystem& ps,
                                   std::span<const std::uint32_t> targets, double cfl,
                                   std::span<double> out) {
  double best = INFINITY;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    double dt = timestep_candidate(ps, targets[k], cfl);
    if (!std::isfinite(dt) || !(dt > 0.0))
      throw PhysicsError("invalid time-step candidate at particle " +
                         std::to_string(ps.global_id[targets[k]]));
    out[k] = dt;
    if (dt < best) best = dt;
  }
  return best;
}

void integrate_step(ParticleSystem& ps, std::span<const std::uint32_t> targets, double dt,
                    const Geometry& geometry) {
  for (std::uint32_t i : targets) {
    ps.vx[i] += ps.ax[i] * dt;
    ps.vy[i] += ps.ay[i] * dt;
    ps.vz[i] += ps.az[i] * dt;
    ps.x[i] += ps.vx[i] * dt;
    ps.y[i] += ps.vy[i] * dt;
    ps.z[i] += ps.vz[i] * dt;
    ps.internal_energy[i] += ps.energy_rate[i] * dt;
    if (ps.internal_energy[i] < 0.0) ps.internal_energy[i] = 0.0;
    if (!std::isfinite(ps.x[i]) || !std::isfinite(ps.y[i]) || !std::isfinite(ps.z[i]))
      throw PhysicsError("particle " + std::to_string(ps.global_id[i]) +
                         " left the box with a non-finite position");
    ps.x[i] = geometry.wrap(ps.x[i]);
    ps.y[i] = geometry.wrap(ps.y[i]);
    ps.z[i] = geometry.wrap(ps.z[i]);
  }
}

}  // namespace sprsim
