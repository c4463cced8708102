#pragma once

#include <cstddef>
#include <cstdint>

namespace sprsim {

/// Physical and numerical parameters shared by every rank of a run.
struct SimConfig {
  int dimensionality = 3;
  std::size_t particle_count = 4096;
  int rank_count = 8;
  int ng_target = 64;
  int ng_max = 256;
  double box_length = 1.0;
  bool periodic = true;
  double cfl_factor = 0.3;
  /// Number of low mantissa bits ignored when replicas are compared.
  int tolerance_bits = 0;
  std::uint64_t rng_seed = 1;
  std::size_t time_step_count = 20;

  double rest_density = 1.0;
  double base_energy = 1.0;
  /// OpenMP threads used by the interpolation kernels of one rank.
  int threads_per_rank = 1;

  bool operator==(const SimConfig&) const = default;
};

/// Throws ConfigError naming the first offending parameter.
void validate(const SimConfig& config);

/// Smoothing length that yields ng_target neighbors on a uniform distribution.
double initial_smoothing_length(const SimConfig& config);

struct SmoothingBounds {
  double lo;
  double hi;
};

/// Clamp range for the per-step smoothing-length update.
SmoothingBounds smoothing_bounds(const SimConfig& config);

}  // namespace sprsim
