#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "sprsim/bench.hpp"
#include "sprsim/errors.hpp"
#include "sprsim/manifest.hpp"
#include "sprsim/output.hpp"

using namespace sprsim;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(SPRSIM_CLI) + " " + args + " > /dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("sprsim_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string message_of(const std::string& text) {
  try {
    validate(parse_manifest_text(text));
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Manifest, ToleranceAboveMantissaRejected) {
  auto msg = message_of("tolerance_bits = 53\n");
  EXPECT_NE(msg.find("tolerance_bits"), std::string::npos);
  EXPECT_NE(msg.find("53"), std::string::npos);
}

TEST(Manifest, SingleRankRejectedWithReason) {
  auto msg = message_of("rank_count = 1\n");
  EXPECT_NE(msg.find("rank_count"), std::string::npos);
  EXPECT_NE(msg.find("replication target"), std::string::npos);
}

TEST(Manifest, UnknownKeyAndBadValueNamed) {
  auto msg = message_of("colour = blue\n");
  EXPECT_NE(msg.find("colour"), std::string::npos);
  EXPECT_NE(msg.find("blue"), std::string::npos);
  msg = message_of("particle_count = lots\n");
  EXPECT_NE(msg.find("particle_count"), std::string::npos);
  EXPECT_NE(msg.find("lots"), std::string::npos);
  EXPECT_NE(message_of("particle_count = 1000\nmode = fast\n"), "");
}

TEST(Manifest, EmptyFileIsDefaultsAndEchoRoundTrips) {
  auto m = parse_manifest_text("");
  EXPECT_EQ(m, RunManifest{});
  EXPECT_EQ(parse_manifest_text(manifest_to_text(m)), m);
  RunManifest x;
  x.config.cfl_factor = 0.1;
  x.config.box_length = 2.0 / 3.0;
  x.mode = SprMode::selection_only;
  x.recovery = true;
  x.workload = Workload::perturbed_lattice;
  x.output_dir = "some/where";
  EXPECT_EQ(parse_manifest_text(manifest_to_text(x)), x);
}

TEST(Manifest, CommentsAndLaterValuesWin) {
  auto m = parse_manifest_text("# comment\n\nrank_count = 4\nrank_count = 2\n  mode = baseline  \n");
  EXPECT_EQ(m.config.rank_count, 2);
  EXPECT_EQ(m.mode, SprMode::baseline);
}

TEST(Bench, DegenerateInputsRejected) {
  RunManifest m;
  m.config.particle_count = 512;
  m.config.rank_count = 2;
  EXPECT_THROW(run_bench(m, 20, 0), ConfigError);
  EXPECT_THROW(run_bench(m, 10, 1), ConfigError);
  RunManifest other = m;
  other.mode = SprMode::baseline;
  EXPECT_NO_THROW(check_bench_pair(m, other));
  other.config.rank_count = 4;
  EXPECT_THROW(check_bench_pair(m, other), ConfigError);
}

TEST(Bench, SelectionOnlyOverheadIsSelectionShare) {
  RunManifest m;
  m.config.particle_count = 4096;
  m.config.rank_count = 4;
  auto r = run_bench(m, 14, 1);
  ASSERT_EQ(r.modes.size(), 3u);
  const auto& base = r.of(SprMode::baseline);
  const auto& sel = r.of(SprMode::selection_only);
  const auto& spr = r.of(SprMode::spr);
  EXPECT_EQ(base.measured_steps, 4u);
  EXPECT_EQ(base.selection_share, 0.0);
  EXPECT_GT(sel.selection_share, 0.0);
  EXPECT_EQ(sel.detection_share, 0.0);
  EXPECT_GT(spr.detection_share, 0.0);
  // baseline and selection-only move the same bytes; spr adds replica traffic
  EXPECT_EQ(base.mean_bytes_per_step, sel.mean_bytes_per_step);
  EXPECT_GT(spr.mean_bytes_per_step, base.mean_bytes_per_step);
}

TEST(Bench, CcrGrowsWithRankCount) {
  RunManifest m;
  m.config.particle_count = 4096;
  m.config.rank_count = 2;
  auto two = run_bench(m, 14, 1);
  m.config.rank_count = 8;
  auto eight = run_bench(m, 14, 1);
  EXPECT_LT(two.of(SprMode::baseline).ccr, eight.of(SprMode::baseline).ccr);
  EXPECT_LT(two.of(SprMode::spr).ccr, eight.of(SprMode::spr).ccr);
}

TEST(Cli, MissingConfigFailsWithoutOutputs) {
  auto out = scratch("missing");
  EXPECT_EQ(run_cli("run --config /no/such/file.cfg --out " + out.string()), 1);
  EXPECT_FALSE(fs::exists(out));
  EXPECT_EQ(run_cli("run --ranks 1 --out " + out.string()), 1);
  EXPECT_FALSE(fs::exists(out));
  EXPECT_EQ(run_cli("frobnicate"), 1);
}

TEST(Cli, RunIsByteReproducible) {
  auto a = scratch("run_a"), b = scratch("run_b");
  std::string args = "run --ranks 2 --particles 512 --steps 6 --seed 3 --out ";
  ASSERT_EQ(run_cli(args + a.string()), 0);
  ASSERT_EQ(run_cli(args + b.string()), 0);
  for (const char* f : {"events.csv", "final_state.csv"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  // the echoed manifests differ only in the output directory
  auto ma = parse_manifest_text(slurp(a / "manifest.cfg"));
  auto mb = parse_manifest_text(slurp(b / "manifest.cfg"));
  mb.output_dir = ma.output_dir;
  EXPECT_EQ(ma, mb);
  EXPECT_EQ(ma.config.rank_count, 2);
  EXPECT_EQ(ma.config.rng_seed, 3u);
  EXPECT_EQ(slurp(a / "events.csv"), "step,sub_step,rank,global_id,field,local_bits_hex,replica_bits_hex\n");
}

TEST(Cli, FlagsOverrideTheFile) {
  auto out = scratch("precedence");
  fs::create_directories(out.parent_path());
  auto cfg = fs::temp_directory_path() / "sprsim_cli_precedence.cfg";
  {
    std::ofstream f(cfg);
    f << "rank_count = 4\nparticle_count = 512\ntime_step_count = 2\ncfl_factor = 0.2\n";
  }
  ASSERT_EQ(run_cli("run --config " + cfg.string() + " --ranks 2 --out " + out.string()), 0);
  auto m = parse_manifest_text(slurp(out / "manifest.cfg"));
  EXPECT_EQ(m.config.rank_count, 2);
  EXPECT_EQ(m.config.particle_count, 512u);
  EXPECT_EQ(m.config.cfl_factor, 0.2);
  fs::remove(cfg);
}

TEST(Cli, RecoveryRollsBackOnce) {
  auto out = scratch("recovery");
  ASSERT_EQ(run_cli("run --ranks 2 --particles 512 --steps 8 --recovery "
                    "--inject rank=0,dataset=position,component=0,particle=0,bit=45,step=6,"
                    "substep=force --out " + out.string()),
            0);
  auto events = slurp(out / "events.csv");
  std::size_t rollbacks = 0, pos = 0;
  while ((pos = events.find(",rollback,", pos)) != std::string::npos) {
    ++rollbacks;
    ++pos;
  }
  EXPECT_EQ(rollbacks, 1u);
  auto state = slurp(out / "final_state.csv");
  auto clean = scratch("recovery_clean");
  ASSERT_EQ(run_cli("run --ranks 2 --particles 512 --steps 8 --out " + clean.string()), 0);
  EXPECT_EQ(state, slurp(clean / "final_state.csv"));
}

TEST(Cli, BadInjectionSpecRejected) {
  auto out = scratch("badinject");
  EXPECT_EQ(run_cli("run --particles 512 --ranks 2 --inject rank=0,bit=70 --out " + out.string()), 1);
  EXPECT_EQ(run_cli("run --particles 512 --ranks 2 --inject dataset=spin --out " + out.string()), 1);
  EXPECT_FALSE(fs::exists(out));
}

TEST(Cli, CampaignIsByteReproducible) {
  auto a = scratch("camp_a"), b = scratch("camp_b");
  std::string args = "campaign --ranks 2 --particles 512 --trials 3 --controls 2 --warmup 2 "
                     "--seed 11 --out ";
  int ra = run_cli(args + a.string());
  int rb = run_cli(args + b.string());
  EXPECT_TRUE(ra == 0 || ra == 2);
  EXPECT_EQ(ra, rb);
  for (const char* f : {"campaign.csv", "campaign_summary.csv", "recall_significant.dat", "recall_all.dat"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

TEST(Cli, BenchCountsAreByteReproducible) {
  auto a = scratch("bench_a"), b = scratch("bench_b");
  std::string args = "bench --ranks 2 --particles 512 --steps 12 --repetitions 2 --out ";
  ASSERT_EQ(run_cli(args + a.string()), 0);
  ASSERT_EQ(run_cli(args + b.string()), 0);
  EXPECT_EQ(slurp(a / "bench_counts.csv"), slurp(b / "bench_counts.csv"));
  EXPECT_TRUE(fs::exists(a / "bench_summary.csv"));
  EXPECT_TRUE(fs::exists(a / "step_breakdown.dat"));
}
