#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "sprsim/detection.hpp"
#include "sprsim/particles.hpp"

namespace sprsim {

/// Injectable datasets. Position and velocity have one component per axis.
enum class Dataset : std::uint8_t { position, mass, internal_energy, velocity, density };

inline constexpr std::size_t kDatasetCount = 5;

std::string_view dataset_name(Dataset d);
std::optional<Dataset> parse_dataset(std::string_view name);
int component_count(Dataset d, int dim);
Field field_of(Dataset d, int component);

/// Inverts bit `bit` of a pattern. Bit 64 is the sign, 63..53 the exponent,
/// 52..1 the mantissa. Throws ConfigError outside [1, 64].
std::uint64_t flip_bit(std::uint64_t pattern, int bit);
double flip_bit(double value, int bit);

/// A single-bit flip applied to an owned particle just before the phase of
/// `boundary` in step `step` (for build_grid this precedes the halo exchange).
struct InjectionPlan {
  int rank = 0;
  Dataset dataset = Dataset::position;
  int component = 0;
  std::size_t particle = 0;  // local index on `rank`
  int bit = 1;
  std::uint64_t step = 0;
  SubStep boundary = SubStep::build_grid;

  Field field() const { return field_of(dataset, component); }
};

}  // namespace sprsim
