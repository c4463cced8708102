#include "sprsim/manifest.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "sprsim/errors.hpp"

namespace sprsim {

namespace {

[[noreturn]] void bad(std::string_view key, std::string_view value, std::string_view why) {
  throw ConfigError(std::string(key) + " = '" + std::string(value) + "': " + std::string(why));
}

std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_integer(std::string_view key, std::string_view v) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size() || v.empty())
    bad(key, v, "expected an integer");
  return out;
}

double parse_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size() || v.empty()) bad(key, v, "expected a number");
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "off" || v == "no" || v == "0") return false;
  bad(key, v, "expected true or false");
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string_view mode_name(SprMode m) {
  switch (m) {
    case SprMode::baseline: return "baseline";
    case SprMode::selection_only: return "selection-only";
    case SprMode::spr: return "spr";
  }
  return "?";
}

SprMode parse_mode(std::string_view name) {
  for (auto m : {SprMode::baseline, SprMode::selection_only, SprMode::spr})
    if (name == mode_name(m)) return m;
  bad("mode", name, "expected baseline, selection-only or spr");
}

void apply_setting(RunManifest& m, std::string_view key, std::string_view value) {
  auto& c = m.config;
  if (key == "dimensionality") c.dimensionality = parse_integer<int>(key, value);
  else if (key == "particle_count") c.particle_count = parse_integer<std::size_t>(key, value);
  else if (key == "rank_count") c.rank_count = parse_integer<int>(key, value);
  else if (key == "ng_target") c.ng_target = parse_integer<int>(key, value);
  else if (key == "ng_max") c.ng_max = parse_integer<int>(key, value);
  else if (key == "box_length") c.box_length = parse_double(key, value);
  else if (key == "periodic") c.periodic = parse_bool(key, value);
  else if (key == "cfl_factor") c.cfl_factor = parse_double(key, value);
  else if (key == "tolerance_bits") c.tolerance_bits = parse_integer<int>(key, value);
  else if (key == "rng_seed") c.rng_seed = parse_integer<std::uint64_t>(key, value);
  else if (key == "time_step_count") c.time_step_count = parse_integer<std::size_t>(key, value);
  else if (key == "rest_density") c.rest_density = parse_double(key, value);
  else if (key == "base_energy") c.base_energy = parse_double(key, value);
  else if (key == "threads_per_rank") c.threads_per_rank = parse_integer<int>(key, value);
  else if (key == "workload") {
    auto w = parse_workload(value);
    if (!w) bad(key, value, "expected uniform-lattice, perturbed-lattice or hot-sphere");
    m.workload = *w;
  } else if (key == "mode") m.mode = parse_mode(value);
  else if (key == "recovery") m.recovery = parse_bool(key, value);
  else if (key == "output_dir") {
    if (value.empty()) bad(key, value, "must not be empty");
    m.output_dir = std::string(value);
  } else if (key == "format_version") m.format_version = parse_integer<int>(key, value);
  else if (key == "checkpoint_interval")
    m.checkpoint_interval = parse_integer<std::size_t>(key, value);
  else if (key == "trials_per_dataset")
    m.trials_per_dataset = parse_integer<std::size_t>(key, value);
  else if (key == "control_trials") m.control_trials = parse_integer<std::size_t>(key, value);
  else if (key == "warmup_steps") m.warmup_steps = parse_integer<std::size_t>(key, value);
  else if (key == "repetitions") m.repetitions = parse_integer<std::size_t>(key, value);
  else bad(key, value, "unknown key");
}

RunManifest parse_manifest_text(std::string_view text, RunManifest base) {
  std::size_t pos = 0, lineno = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value', got '" +
                        std::string(line) + "'");
    apply_setting(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

RunManifest load_manifest(const std::filesystem::path& path, RunManifest base) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_manifest_text(ss.str(), std::move(base));
}

void validate(const RunManifest& m) {
  validate(m.config);
  lattice_side(m.config.particle_count, m.config.dimensionality);
  if (m.format_version != kManifestVersion)
    bad("format_version", std::to_string(m.format_version), "unsupported manifest version");
  if (m.repetitions == 0) bad("repetitions", "0", "must be at least 1");
  if (m.recovery && m.checkpoint_interval == 0)
    bad("checkpoint_interval", "0", "recovery needs a positive checkpoint interval");
}

std::string manifest_to_text(const RunManifest& m) {
  const auto& c = m.config;
  std::string s;
  auto line = [&](std::string_view k, const std::string& v) {
    s += k;
    s += " = ";
    s += v;
    s += '\n';
  };
  line("format_version", std::to_string(m.format_version));
  line("dimensionality", std::to_string(c.dimensionality));
  line("particle_count", std::to_string(c.particle_count));
  line("rank_count", std::to_string(c.rank_count));
  line("ng_target", std::to_string(c.ng_target));
  line("ng_max", std::to_string(c.ng_max));
  line("box_length", num(c.box_length));
  line("periodic", c.periodic ? "true" : "false");
  line("cfl_factor", num(c.cfl_factor));
  line("tolerance_bits", std::to_string(c.tolerance_bits));
  line("rng_seed", std::to_string(c.rng_seed));
  line("time_step_count", std::to_string(c.time_step_count));
  line("rest_density", num(c.rest_density));
  line("base_energy", num(c.base_energy));
  line("threads_per_rank", std::to_string(c.threads_per_rank));
  line("workload", std::string(workload_name(m.workload)));
  line("mode", std::string(mode_name(m.mode)));
  line("recovery", m.recovery ? "true" : "false");
  line("output_dir", m.output_dir);
  line("checkpoint_interval", std::to_string(m.checkpoint_interval));
  line("trials_per_dataset", std::to_string(m.trials_per_dataset));
  line("control_trials", std::to_string(m.control_trials));
  line("warmup_steps", std::to_string(m.warmup_steps));
  line("repetitions", std::to_string(m.repetitions));
  return s;
}

}  // namespace sprsim
