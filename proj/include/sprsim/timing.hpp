#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <string_view>

#include "sprsim/detection.hpp"

namespace sprsim {

/// Time accounting buckets. The first six mirror SubStep.
enum class Bucket : std::uint8_t {
  build_grid,
  find_neighbors,
  density,
  force,
  timestep,
  update,
  selection,
  replica,
  detection,
  communication,
};

inline constexpr std::size_t kBucketCount = 10;

std::string_view bucket_name(Bucket b);
inline Bucket bucket_of(SubStep s) { return static_cast<Bucket>(s); }

/// Per-rank wall time and traffic of one time step.
struct StepTiming {
  std::array<double, kBucketCount> seconds{};
  std::array<std::uint64_t, kSubStepCount> bytes_sent{};

  void clear() { *this = StepTiming{}; }
  double total() const;
  /// Everything except communication.
  double compute() const;
  double communication() const { return seconds[static_cast<int>(Bucket::communication)]; }
  double of(Bucket b) const { return seconds[static_cast<int>(b)]; }
  std::uint64_t total_bytes() const;
};

/// Adds elapsed wall time to one bucket; does nothing when `sink` is null.
class ScopedTimer {
 public:
  ScopedTimer(StepTiming* sink, Bucket bucket) : sink_(sink), bucket_(bucket) {
    if (sink_) start_ = std::chrono::steady_clock::now();
  }
  ~ScopedTimer() {
    if (sink_) {
      std::chrono::duration<double> d = std::chrono::steady_clock::now() - start_;
      sink_->seconds[static_cast<int>(bucket_)] += d.count();
    }
  }
  ScopedTimer(const ScopedTimer&) = delete;
  ScopedTimer& operator=(const ScopedTimer&) = delete;

 private:
  StepTiming* sink_;
  Bucket bucket_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace sprsim
