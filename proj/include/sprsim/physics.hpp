#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "sprsim/exec.hpp"
#include "sprsim/geometry.hpp"
#include "sprsim/kernel.hpp"
#include "sprsim/neighbors.hpp"
#include "sprsim/particles.hpp"

namespace sprsim {

inline constexpr double kGamma = 5.0 / 3.0;
inline constexpr double kTimestepEpsilon = 1e-12;

/// Ideal-gas pressure.
inline double pressure(double rho, double u) { return (kGamma - 1.0) * rho * u; }

inline double sound_speed(double rho, double u) {
  return std::sqrt(kGamma * pressure(rho, u) / rho);
}

/// P / rho^2, the per-particle factor of the symmetric momentum equation.
inline double pressure_term(double rho, double u) { return pressure(rho, u) / (rho * rho); }

// Density and force kernels. Row k of `table` holds the neighbors of
// particle targets[k]; summation follows the row's global-id order. The
// `_serial` variants are the reference the OpenMP variants must reproduce
// bit for bit.

/// rho_i = sum over N(i) and i itself of m_j W(|x_i - x_j|, h_i).
void compute_density(ParticleSystem& ps, std::span<const std::uint32_t> targets,
                     const NeighborTable& table, const Geometry& geometry, Exec exec = {});
void compute_density_serial(ParticleSystem& ps, std::span<const std::uint32_t> targets,
                            const NeighborTable& table, const Geometry& geometry);
void compute_density_parallel(ParticleSystem& ps, std::span<const std::uint32_t> targets,
                              const NeighborTable& table, const Geometry& geometry, int threads);

/// Symmetric SPH momentum and energy sums with grad W evaluated at h_i.
/// Throws PhysicsError if any density read is zero.
void compute_accelerations(ParticleSystem& ps, std::span<const std::uint32_t> targets,
                           const NeighborTable& table, const Geometry& geometry, Exec exec = {});
void compute_accelerations_serial(ParticleSystem& ps, std::span<const std::uint32_t> targets,
                                  const NeighborTable& table, const Geometry& geometry);
void compute_accelerations_parallel(ParticleSystem& ps, std::span<const std::uint32_t> targets,
                                    const NeighborTable& table, const Geometry& geometry,
                                    int threads);

/// cfl * h_i / (c_i + |v_i| + eps).
double timestep_candidate(const ParticleSystem& ps, std::size_t i, double cfl);

/// Fills `out[k]` with the candidate of targets[k]; returns their minimum.
/// Throws PhysicsError on a non-finite or non-positive candidate.
double compute_timestep_candidates(const ParticleSystem& ps,
                                   std::span<const std::uint32_t> targets, double cfl,
                                   std::span<double> out);

/// Explicit update of `targets`:
/// v += a dt, x += v dt, u += du/dt dt (floored at zero), then periodic wrap.
/// Throws PhysicsError if a position becomes non-finite.
void integrate_step(ParticleSystem& ps, std::span<const std::uint32_t> targets, double dt,
                    const Geometry& geometry);

}  // namespace sprsim
