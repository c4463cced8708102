#include "sprsim/timing.hpp"

#include <array>

namespace sprsim {

std::string_view bucket_name(Bucket b) {
  static constexpr std::array<std::string_view, kBucketCount> names = {
      "build-grid", "find-neighbors", "density",   "force",     "timestep",
      "update",     "selection",      "replica",   "detection", "communication"};
  return names[static_cast<std::size_t>(b)];
}

double StepTiming::total() const {
  double t = 0.0;
  for (double s : seconds) t += s;
  return t;
}

double StepTiming::compute() const { return total() - communication(); }

std::uint64_t StepTiming::total_bytes() const {
  std::uint64_t b = 0;
  for (auto v : bytes_sent) b += v;
  return b;
}

}  // namespace sprsim
