#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sprsim/bench.hpp"
#include "sprsim/campaign.hpp"
#include "sprsim/runtime.hpp"

namespace sprsim {

std::string hex_bits(std::uint64_t bits);

void write_text(const std::filesystem::path& path, const std::string& text);

std::string events_csv(const std::vector<RunEvent>& events);
std::string timings_csv(const std::vector<StepTimingRow>& rows);
std::string state_csv(const ParticleSystem& ps);

std::string campaign_csv(const std::vector<OutcomeRecord>& records);
/// Per dataset: detected / undetected / masked percentages, split into
/// significant errors and all errors.
std::string campaign_summary_csv(const CampaignMetrics& m);
std::string campaign_summary_dat(const CampaignMetrics& m, bool significant_only);

std::string bench_summary_csv(const BenchReport& r);
std::string bench_breakdown_dat(const BenchReport& r);
std::string bench_counts_csv(const BenchReport& r);
std::string bench_timings_csv(const BenchReport& r);

}  // namespace sprsim
