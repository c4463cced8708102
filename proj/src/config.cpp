#include "sprsim/config.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "sprsim/errors.hpp"

namespace sprsim {

namespace {

[[noreturn]] void reject(const std::string& key, const std::string& value, const char* why) {
  throw ConfigError(key + " = " + value + ": " + why);
}

std::string str(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void validate(const SimConfig& c) {
  if (c.dimensionality != 2 && c.dimensionality != 3)
    reject("dimensionality", std::to_string(c.dimensionality), "must be 2 or 3");
  if (c.particle_count == 0) reject("particle_count", "0", "must be positive");
  if (c.rank_count < 2)
    reject("rank_count", std::to_string(c.rank_count),
           "at least 2 ranks are required so the replication target (q+1) mod Q is a "
           "different rank");
  if (static_cast<std::size_t>(c.rank_count) > c.particle_count)
    reject("rank_count", std::to_string(c.rank_count), "exceeds particle_count");
  if (c.ng_target <= 0) reject("ng_target", std::to_string(c.ng_target), "must be positive");
  if (c.ng_max < c.ng_target)
    reject("ng_max", std::to_string(c.ng_max), "must be at least ng_target");
  if (c.tolerance_bits < 0 || c.tolerance_bits > 52)
    reject("tolerance_bits", std::to_string(c.tolerance_bits),
           "must lie in [0, 52], the mantissa width of a 64-bit float");
  if (!(c.box_length > 0) || !std::isfinite(c.box_length))
    reject("box_length", str(c.box_length), "must be positive and finite");
  if (!(c.cfl_factor > 0) || !std::isfinite(c.cfl_factor))
    reject("cfl_factor", str(c.cfl_factor), "must be positive and finite");
  if (!(c.rest_density > 0) || !std::isfinite(c.rest_density))
    reject("rest_density", str(c.rest_density), "must be positive and finite");
  if (!(c.base_energy > 0) || !std::isfinite(c.base_energy))
    reject("base_energy", str(c.base_energy), "must be positive and finite");
  if (c.threads_per_rank < 1)
    reject("threads_per_rank", std::to_string(c.threads_per_rank), "must be at least 1");
}

double initial_smoothing_length(const SimConfig& c) {
  const double n = static_cast<double>(c.particle_count);
  const double L = c.box_length;
  if (c.dimensionality == 3)
    return 0.5 * std::cbrt(3.0 * c.ng_target * L * L * L / (4.0 * std::numbers::pi * n));
  return 0.5 * std::sqrt(c.ng_target * L * L / (std::numbers::pi * n));
}

SmoothingBounds smoothing_bounds(const SimConfig& c) {
  const double h0 = initial_smoothing_length(c);
  SmoothingBounds b{0.25 * h0, 4.0 * h0};
  // Keep the support below half the box so minimum images stay unique.
  if (c.periodic) b.hi = std::fmin(b.hi, std::nextafter(0.25 * c.box_length, 0.0));
  if (b.lo > b.hi) b.lo = b.hi;
  return b;
}

}  // namespace sprsim
