#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <limits>

#include "sprsim/campaign.hpp"
#include "sprsim/errors.hpp"
#include "sprsim/injection.hpp"
#include "sprsim/output.hpp"
#include "scenarios.hpp"

using namespace sprsim;

namespace {

std::vector<double> pattern_sample() {
  return {0.0,
          -0.0,
          1.0,
          -2.5,
          std::numeric_limits<double>::denorm_min(),
          std::numeric_limits<double>::min() / 4,
          std::numeric_limits<double>::max(),
          std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::quiet_NaN(),
          std::bit_cast<double>(0x7ff0000000000abcull),  // signalling payload
          0.1,
          1e300};
}

const GoldenRecord& golden() {
  static GoldenRecord g = record_golden(scenario::small_campaign_config(), Workload::hot_sphere, 3);
  return g;
}

}  // namespace

TEST(FlipBit, SignBitOfOne) {
  EXPECT_EQ(flip_bit(1.0, 64), -1.0);
  EXPECT_EQ(flip_bit(-0.0, 64), 0.0);
  EXPECT_FALSE(std::signbit(flip_bit(-0.0, 64)));
}

TEST(FlipBit, MantissaLsbIsNextAfter) {
  EXPECT_EQ(flip_bit(1.0, 1), 1.0000000000000002);
  EXPECT_EQ(flip_bit(1.0, 1), std::nextafter(1.0, 2.0));
  // bit 53 is the lowest exponent bit: 1.0 -> 0.5
  EXPECT_EQ(flip_bit(1.0, 53), 0.5);
  EXPECT_EQ(flip_bit(1.0, 52), 1.5);
}

TEST(FlipBit, InvolutionOverSample) {
  for (double v : pattern_sample()) {
    auto b = std::bit_cast<std::uint64_t>(v);
    for (int bit = 1; bit <= 64; ++bit) {
      auto once = std::bit_cast<std::uint64_t>(flip_bit(v, bit));
      EXPECT_EQ(std::popcount(once ^ b), 1);
      EXPECT_EQ(once ^ b, std::uint64_t{1} << (bit - 1));
      EXPECT_EQ(flip_bit(flip_bit(b, bit), bit), b);
    }
  }
}

TEST(FlipBit, OutOfRangeRejected) {
  EXPECT_THROW(flip_bit(1.0, 0), ConfigError);
  EXPECT_THROW(flip_bit(1.0, 65), ConfigError);
  EXPECT_THROW(flip_bit(std::uint64_t{0}, -3), ConfigError);
}

TEST(Datasets, NamesAndComponents) {
  EXPECT_EQ(component_count(Dataset::position, 3), 3);
  EXPECT_EQ(component_count(Dataset::velocity, 2), 2);
  EXPECT_EQ(component_count(Dataset::mass, 3), 1);
  EXPECT_EQ(field_of(Dataset::velocity, 2), Field::velocity_z);
  EXPECT_EQ(field_of(Dataset::density, 0), Field::density);
  for (std::size_t d = 0; d < kDatasetCount; ++d) {
    auto ds = static_cast<Dataset>(d);
    EXPECT_EQ(parse_dataset(dataset_name(ds)), ds);
  }
  EXPECT_FALSE(parse_dataset("smoothing_length").has_value());
}

TEST(Metrics, FormulaArithmetic) {
  EXPECT_EQ(recall(910, 90).value(), 91.0);
  EXPECT_EQ(precision(0, 910), 100.0);
  EXPECT_EQ(precision(0, 0), 100.0);
  EXPECT_EQ(precision(1, 4), 75.0);
  EXPECT_FALSE(recall(0, 0).has_value());
}

TEST(Metrics, EmptyCampaign) {
  CampaignOptions o;
  o.trials_per_dataset = 0;
  auto res = run_campaign(golden(), o);
  EXPECT_TRUE(res.records.empty());
  EXPECT_EQ(res.metrics.precision_pct(), 100.0);
  EXPECT_FALSE(res.metrics.recall_pct(std::nullopt, true).has_value());
}

TEST(Metrics, CrashesCountAsDetectedOnlyInTheFullRecall) {
  CampaignMetrics m;
  m.significant[0].detected = 8;
  m.significant[0].crashed = 1;
  m.significant[0].undetected = 1;
  EXPECT_EQ(m.recall_pct(Dataset::position, true).value(), 90.0);
  EXPECT_NEAR(m.spr_recall_pct(Dataset::position, true).value(), 80.0, 1e-12);
}

TEST(Golden, CompareIdentityAndSignFlip) {
  const auto& g = golden();
  auto d = compare_to_golden(g.final_state, g.final_state);
  EXPECT_TRUE(d.identical);
  EXPECT_EQ(d.max_dev, 0.0);
  auto s = g.final_state;
  std::size_t i = 0;
  while (s.vy[i] == 0.0) ++i;
  double v = s.vy[i];
  s.vy[i] = -v;
  d = compare_to_golden(s, g.final_state);
  EXPECT_FALSE(d.identical);
  EXPECT_EQ(d.max_dev, 2 * std::fabs(v));
  ParticleSystem shorter = g.final_state;
  shorter.resize(shorter.size() - 1);
  EXPECT_THROW(compare_to_golden(shorter, g.final_state), Error);
}

TEST(Trials, ControlTrialIsMaskedAndUnflagged) {
  auto r = run_trial(golden(), std::nullopt, 0);
  EXPECT_EQ(r.classification, Outcome::masked);
  EXPECT_FALSE(r.detect_substep.has_value());
  EXPECT_EQ(r.max_dev, 0.0);
}

TEST(Trials, DensityLsbBeforeDensityPassIsMasked) {
  const auto& g = golden();
  InjectionPlan p;
  p.rank = 1;
  p.dataset = Dataset::density;
  p.particle = 10;
  p.bit = 1;
  p.step = g.start.step;
  p.boundary = SubStep::density;
  auto r = run_trial(g, p, 0);
  EXPECT_EQ(r.classification, Outcome::masked);
  EXPECT_EQ(r.max_dev, 0.0);
  // a larger flip after the pass survives into the force sums
  p.bit = 40;
  p.boundary = SubStep::force;
  auto late = run_trial(g, p, 1);
  EXPECT_NE(late.classification, Outcome::masked);
}

TEST(Trials, NeighborOfSelectedParticleDetectedAtInterpolation) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto s = scenario::neighbor_flip(seed);
    EXPECT_TRUE(s.detected) << "seed " << seed;
    EXPECT_EQ(s.first_substep, SubStep::density) << "seed " << seed;
    EXPECT_FALSE(s.target_selected);
  }
}

TEST(Campaign, SameSeedSameLog) {
  CampaignOptions o;
  o.trials_per_dataset = 4;
  o.control_trials = 2;
  o.seed = 77;
  auto a = run_campaign(golden(), o);
  auto b = run_campaign(golden(), o);
  EXPECT_EQ(campaign_csv(a.records), campaign_csv(b.records));
  EXPECT_EQ(campaign_summary_csv(a.metrics), campaign_summary_csv(b.metrics));
  EXPECT_EQ(a.records.size(), 22u);
  // one classification per trial, the counts partition the trials
  std::size_t total = 0;
  for (const auto& c : a.metrics.all) total += c.total();
  EXPECT_EQ(total, 20u);
  EXPECT_EQ(a.metrics.controls.total(), 2u);
  EXPECT_EQ(a.metrics.phantom_detections, 0u);
  EXPECT_EQ(a.metrics.false_positives(), 0u);
}

TEST(Campaign, PlansStayInRange) {
  const auto& g = golden();
  for (std::size_t i = 0; i < 200; ++i) {
    auto p = draw_plan(g, 5, Dataset::velocity, i);
    EXPECT_GE(p.bit, 1);
    EXPECT_LE(p.bit, 64);
    EXPECT_LT(p.particle, g.owned_counts[p.rank]);
    EXPECT_LT(p.component, 3);
    EXPECT_EQ(p.step, g.start.step);
  }
  auto a = draw_plan(g, 5, Dataset::mass, 3), b = draw_plan(g, 5, Dataset::mass, 3);
  EXPECT_EQ(a.particle, b.particle);
  EXPECT_EQ(a.bit, b.bit);
}

TEST(Campaign, OutputsFrozenColumns) {
  CampaignOptions o;
  o.trials_per_dataset = 1;
  o.control_trials = 1;
  auto res = run_campaign(golden(), o);
  auto csv = campaign_csv(res.records);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "trial,dataset,rank,particle_gid,bit,timing_substep,classification,significant,"
            "detect_substep,max_dev");
  auto sum = campaign_summary_csv(res.metrics);
  EXPECT_NE(sum.find("position"), std::string::npos);
}
