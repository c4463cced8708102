#pragma once

#include <optional>
#include <string_view>

#include "sprsim/config.hpp"
#include "sprsim/particles.hpp"

namespace sprsim {

enum class Workload { uniform_lattice, perturbed_lattice, hot_sphere };

std::string_view workload_name(Workload kind);
std::optional<Workload> parse_workload(std::string_view name);

/// Energy multiplier inside the hot sphere and its radius in box lengths.
inline constexpr double kHotSphereBoost = 100.0;
inline constexpr double kHotSphereRadius = 1.0 / 8.0;
/// Largest lattice displacement of the perturbed lattice, in spacings.
inline constexpr double kPerturbation = 0.1;

/// Lattice side for `n` particles in `dim` dimensions; throws ConfigError
/// when n is not a perfect square/cube.
std::size_t lattice_side(std::size_t n, int dim);

/// Cell-centred lattice with equal masses (rest_density * L^d / n), uniform
/// internal energy, zero velocity and the initial smoothing length. Global
/// ids follow lattice order (x slowest).
ParticleSystem generate_initial_conditions(Workload kind, const SimConfig& config);

}  // namespace sprsim
