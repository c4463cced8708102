#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "sprsim/config.hpp"
#include "sprsim/initial_conditions.hpp"
#include "sprsim/worker.hpp"

namespace sprsim {

inline constexpr int kManifestVersion = 1;

std::string_view mode_name(SprMode m);
SprMode parse_mode(std::string_view name);

/// Fully resolved description of one invocation.
struct RunManifest {
  SimConfig config;
  Workload workload = Workload::hot_sphere;
  SprMode mode = SprMode::spr;
  bool recovery = false;
  std::string output_dir = "out";
  int format_version = kManifestVersion;

  std::size_t checkpoint_interval = 5;
  std::size_t trials_per_dataset = 200;
  std::size_t control_trials = 0;
  std::size_t warmup_steps = 5;
  std::size_t repetitions = 1;

  bool operator==(const RunManifest&) const = default;
};

/// Applies one `key = value` assignment. Throws ConfigError naming the key
/// and value for unknown keys or unparsable values.
void apply_setting(RunManifest& m, std::string_view key, std::string_view value);

/// Parses flat `key = value` text on top of `base`. Blank lines and lines
/// starting with '#' are skipped.
RunManifest parse_manifest_text(std::string_view text, RunManifest base = {});
RunManifest load_manifest(const std::filesystem::path& path, RunManifest base = {});

/// Checks the simulation config and the harness settings.
void validate(const RunManifest& m);

/// Every key in a fixed order; doubles use %.17g so the text round-trips.
std::string manifest_to_text(const RunManifest& m);

}  // namespace sprsim
