#include "sprsim/particles.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>

namespace sprsim {

std::string_view field_name(Field f) {
  switch (f) {
    case Field::position_x: return "position_x";
    case Field::position_y: return "position_y";
    case Field::position_z: return "position_z";
    case Field::velocity_x: return "velocity_x";
    case Field::velocity_y: return "velocity_y";
    case Field::velocity_z: return "velocity_z";
    case Field::mass: return "mass";
    case Field::internal_energy: return "internal_energy";
    case Field::density: return "density";
    case Field::smoothing_length: return "smoothing_length";
    case Field::acceleration_x: return "acceleration_x";
    case Field::acceleration_y: return "acceleration_y";
    case Field::acceleration_z: return "acceleration_z";
    case Field::energy_rate: return "energy_rate";
  }
  return "?";
}

std::vector<double>& ParticleSystem::operator[](Field f) {
  return const_cast<std::vector<double>&>(std::as_const(*this)[f]);
}

const std::vector<double>& ParticleSystem::operator[](Field f) const {
  switch (f) {
    case Field::position_x: return x;
    case Field::position_y: return y;
    case Field::position_z: return z;
    case Field::velocity_x: return vx;
    case Field::velocity_y: return vy;
    case Field::velocity_z: return vz;
    case Field::mass: return mass;
    case Field::internal_energy: return internal_energy;
    case Field::density: return density;
    case Field::smoothing_length: return smoothing_length;
    case Field::acceleration_x: return ax;
    case Field::acceleration_y: return ay;
    case Field::acceleration_z: return az;
    case Field::energy_rate: return energy_rate;
  }
  return x;
}

void ParticleSystem::resize(std::size_t n) {
  global_id.resize(n);
  for (Field f : all_fields()) (*this)[f].resize(n);
}

void ParticleSystem::reserve(std::size_t n) {
  global_id.reserve(n);
  for (Field f : all_fields()) (*this)[f].reserve(n);
}

void ParticleSystem::push_back_from(const ParticleSystem& src, std::size_t i) {
  global_id.push_back(src.global_id[i]);
  for (Field f : all_fields()) (*this)[f].push_back(src[f][i]);
}

bool ParticleSystem::bit_equal(const ParticleSystem& o) const {
  if (global_id != o.global_id) return false;
  for (Field f : all_fields()) {
    const auto& a = (*this)[f];
    const auto& b = o[f];
    if (a.size() != b.size()) return false;
    if (!a.empty() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) != 0)
      return false;
  }
  return true;
}

ParticleSystem sorted_by_global_id(const ParticleSystem& src) {
  std::vector<std::size_t> order(src.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return src.global_id[a] < src.global_id[b]; });
  ParticleSystem out;
  out.reserve(src.size());
  for (std::size_t i : order) out.push_back_from(src, i);
  return out;
}

}  // namespace sprsim
