#include "sprsim/injection.hpp"

#include <array>
#include <bit>
#include <string>

#include "sprsim/errors.hpp"

namespace sprsim {

namespace {
constexpr std::array<std::string_view, kDatasetCount> kNames = {
    "position", "mass", "internal_energy", "velocity", "density"};
}

std::string_view dataset_name(Dataset d) { return kNames[static_cast<std::size_t>(d)]; }

std::optional<Dataset> parse_dataset(std::string_view name) {
  for (std::size_t i = 0; i < kDatasetCount; ++i)
    if (kNames[i] == name) return static_cast<Dataset>(i);
  return std::nullopt;
}

int component_count(Dataset d, int dim) {
  return d == Dataset::position || d == Dataset::velocity ? dim : 1;
}

Field field_of(Dataset d, int component) {
  switch (d) {
    case Dataset::position: return static_cast<Field>(static_cast<int>(Field::position_x) + component);
    case Dataset::velocity: return static_cast<Field>(static_cast<int>(Field::velocity_x) + component);
    case Dataset::mass: return Field::mass;
    case Dataset::internal_energy: return Field::internal_energy;
    case Dataset::density: return Field::density;
  }
  return Field::mass;
}

std::uint64_t flip_bit(std::uint64_t pattern, int bit) {
  if (bit < 1 || bit > 64)
    throw ConfigError("bit = " + std::to_string(bit) + ": must lie in [1, 64]");
  return pattern ^ (std::uint64_t{1} << (bit - 1));
}

double flip_bit(double value, int bit) {
  return std::bit_cast<double>(flip_bit(std::bit_cast<std::uint64_t>(value), bit));
}

}  // namespace sprsim
