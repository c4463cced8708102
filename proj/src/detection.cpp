#include "sprsim/detection.hpp"

#include <array>
#include <utility>

#include "sprsim/errors.hpp"

namespace sprsim {

namespace {

constexpr std::array<std::string_view, kSubStepCount> kSubStepNames = {
    "build-grid", "find-neighbors", "density", "force", "timestep", "update"};

template <std::size_t... I>
constexpr auto field_ids(std::index_sequence<I...>) {
  return std::array<std::uint8_t, sizeof...(I)>{static_cast<std::uint8_t>(I)...};
}

constexpr auto kPhysical = field_ids(std::make_index_sequence<kFieldCount>{});

constexpr auto with(std::uint8_t extra) {
  std::array<std::uint8_t, kFieldCount + 1> out{};
  for (std::size_t i = 0; i < kFieldCount; ++i) out[i] = kPhysical[i];
  out[kFieldCount] = extra;
  return out;
}

constexpr auto kWithNeighbors = with(static_cast<std::uint8_t>(CompareField::neighbors));
constexpr auto kWithDt = with(static_cast<std::uint8_t>(CompareField::dt_candidate));

}  // namespace

std::string_view substep_name(SubStep s) { return kSubStepNames[static_cast<std::size_t>(s)]; }

std::optional<SubStep> parse_substep(std::string_view name) {
  for (std::size_t i = 0; i < kSubStepCount; ++i)
    if (kSubStepNames[i] == name) return static_cast<SubStep>(i);
  return std::nullopt;
}

std::string_view compare_field_name(std::uint8_t id) {
  if (id < kFieldCount) return field_name(static_cast<Field>(id));
  if (id == static_cast<std::uint8_t>(CompareField::neighbors)) return "neighbors";
  if (id == static_cast<std::uint8_t>(CompareField::dt_candidate)) return "dt_candidate";
  return "?";
}

std::span<const std::uint8_t> compared_fields(SubStep s) {
  if (s == SubStep::find_neighbors) return kWithNeighbors;
  if (s == SubStep::timestep) return kWithDt;
  return kPhysical;
}

DetectionReport detect_errors(std::uint64_t step, SubStep s, int rank,
                              std::span<const std::uint64_t> global_ids,
                              std::span<const ParticleRecord> local,
                              std::span<const ParticleRecord> replica, int tolerance_bits) {
  if (local.size() != global_ids.size() || replica.size() != global_ids.size())
    throw ProtocolError("replica result does not cover the selection");
  DetectionReport r;
  r.step = step;
  r.sub_step = s;
  r.rank = rank;
  const auto fields = compared_fields(s);
  const auto digest = static_cast<std::uint8_t>(CompareField::neighbors);
  for (std::size_t k = 0; k < global_ids.size(); ++k) {
    for (std::uint8_t f : fields) {
      std::uint64_t a = local[k].bits[f], b = replica[k].bits[f];
      bool differ = f == digest ? a != b
                                : mask_low_bits(a, tolerance_bits) != mask_low_bits(b, tolerance_bits);
      if (differ) r.mismatches.push_back({global_ids[k], f, a, b});
    }
  }
  return r;
}

}  // namespace sprsim
