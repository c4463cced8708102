#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sprsim/particles.hpp"

namespace sprsim {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Step-boundary snapshot of every rank's owned particles.
struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  std::uint64_t step = 0;
  double dt = 0.0;
  double time = 0.0;
  std::uint64_t rng_state = 0;
  std::vector<ParticleSystem> ranks;

  std::size_t particle_count() const;
  bool bit_equal(const Checkpoint& other) const;
};

/// Little-endian layout: magic "SPRCKPT\0", version u32, Q u32, n u64,
/// step u64, dt and time as raw patterns, rng state u64; then per rank n_q
/// u64 followed by every array in declaration order.
std::vector<std::byte> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::span<const std::byte> bytes);

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace sprsim
