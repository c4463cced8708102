#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace sprsim {

/// Scalar per-particle arrays, in declaration (and checkpoint) order.
enum class Field : std::uint8_t {
  position_x,
  position_y,
  position_z,
  velocity_x,
  velocity_y,
  velocity_z,
  mass,
  internal_energy,
  density,
  smoothing_length,
  acceleration_x,
  acceleration_y,
  acceleration_z,
  energy_rate,
};

inline constexpr std::size_t kFieldCount = 14;

std::string_view field_name(Field field);

inline constexpr std::array<Field, kFieldCount> all_fields() {
  std::array<Field, kFieldCount> out{};
  for (std::size_t i = 0; i < kFieldCount; ++i) out[i] = static_cast<Field>(i);
  return out;
}

/// Structure-of-arrays particle store. Every scalar is a 64-bit float.
///
/// Inside a rank worker the first `owned` entries are the locally owned
/// particles; entries appended after them are read-only halo copies.
struct ParticleSystem {
  std::vector<std::uint64_t> global_id;
  std::vector<double> x, y, z;
  std::vector<double> vx, vy, vz;
  std::vector<double> mass;
  std::vector<double> internal_energy;
  std::vector<double> density;
  std::vector<double> smoothing_length;
  std::vector<double> ax, ay, az;
  std::vector<double> energy_rate;

  std::size_t size() const { return global_id.size(); }
  bool empty() const { return global_id.empty(); }

  std::vector<double>& operator[](Field field);
  const std::vector<double>& operator[](Field field) const;

  void resize(std::size_t n);
  void reserve(std::size_t n);
  void clear() { resize(0); }

  /// Appends particle `i` of `src` (all fields).
  void push_back_from(const ParticleSystem& src, std::size_t i);

  /// Raw 64-bit pattern equality over every array.
  bool bit_equal(const ParticleSystem& other) const;
};

/// Returns a copy of `src` reordered so that global ids ascend.
ParticleSystem sorted_by_global_id(const ParticleSystem& src);

}  // namespace sprsim
