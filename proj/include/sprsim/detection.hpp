#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sprsim/particles.hpp"

namespace sprsim {

/// Workflow sub-steps of one time step, each followed by an SPR hook.
/// Interpolation runs as two passes (density, force) because forces need the
/// neighbors' new densities, and their exchange may only follow detection.
enum class SubStep : std::uint8_t { build_grid, find_neighbors, density, force, timestep, update };

inline constexpr std::size_t kSubStepCount = 6;

std::string_view substep_name(SubStep s);
std::optional<SubStep> parse_substep(std::string_view name);
inline bool is_interpolation(SubStep s) { return s == SubStep::density || s == SubStep::force; }

/// Monotone protocol stamp of a sub-step. Step 0 starts at kSubStepCount so
/// the state before any sub-step still has a stamp.
inline std::uint64_t stamp_of(std::uint64_t step, SubStep s) {
  return (step + 1) * kSubStepCount + static_cast<std::uint64_t>(s);
}

/// Quantities compared per selected particle: the physical fields plus the
/// two derived outputs of sub-steps that produce no field.
enum class CompareField : std::uint8_t {
  // 0..13 alias Field
  neighbors = 14,
  dt_candidate = 15,
};
inline constexpr std::size_t kCompareFieldCount = 16;

std::string_view compare_field_name(std::uint8_t id);

/// Everything a rank knows about one particle at a detection point.
struct ParticleRecord {
  std::array<std::uint64_t, kCompareFieldCount> bits{};
};

struct Mismatch {
  std::uint64_t global_id;
  std::uint8_t field;  // CompareField / Field id
  std::uint64_t local_bits;
  std::uint64_t replica_bits;
};

struct DetectionReport {
  std::uint64_t step = 0;
  SubStep sub_step = SubStep::build_grid;
  int rank = 0;
  std::vector<Mismatch> mismatches;

  bool error_flag() const { return !mismatches.empty(); }
};

/// Clears the `k` lowest mantissa bits of a 64-bit pattern.
inline std::uint64_t mask_low_bits(std::uint64_t bits, int k) {
  if (k <= 0) return bits;
  return bits & ~((std::uint64_t{1} << k) - 1);
}

/// Fields compared at a given hook: all physical fields, plus the neighbor
/// digest after neighbor search and the time-step candidate after the
/// time-step reduction.
std::span<const std::uint8_t> compared_fields(SubStep s);

/// Compares local and replica records of the selected particles. Float
/// patterns are compared with their k low bits masked; the neighbor digest is
/// compared exactly.
DetectionReport detect_errors(std::uint64_t step, SubStep s, int rank,
                              std::span<const std::uint64_t> global_ids,
                              std::span<const ParticleRecord> local,
                              std::span<const ParticleRecord> replica, int tolerance_bits);

}  // namespace sprsim
