#include "sprsim/output.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>

#include "sprsim/errors.hpp"

namespace sprsim {

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string g17(double v) { return fmt("%.17g", v); }

std::string pct(std::size_t part, std::size_t whole) {
  return whole == 0 ? "N/A" : fmt("%.2f", 100.0 * static_cast<double>(part) / whole);
}

std::string opt_pct(const std::optional<double>& v) { return v ? fmt("%.2f", *v) : "N/A"; }

}  // namespace

std::string hex_bits(std::uint64_t bits) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%016" PRIx64, bits);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
  if (!f) throw Error("failed writing " + path.string());
}

std::string events_csv(const std::vector<RunEvent>& events) {
  std::string s = "step,sub_step,rank,global_id,field,local_bits_hex,replica_bits_hex\n";
  for (const auto& e : events) {
    s += std::to_string(e.step) + ',' + std::string(substep_name(e.sub_step)) + ',' +
         std::to_string(e.rank) + ',';
    if (e.kind == RunEvent::Kind::mismatch) {
      s += std::to_string(e.mismatch.global_id) + ',' +
           std::string(compare_field_name(e.mismatch.field)) + ',' +
           hex_bits(e.mismatch.local_bits) + ',' + hex_bits(e.mismatch.replica_bits);
    } else {
      s += e.kind == RunEvent::Kind::rollback ? ",rollback,," : ",halt,,";
    }
    s += '\n';
  }
  return s;
}

std::string timings_csv(const std::vector<StepTimingRow>& rows) {
  std::string s = "step,sub_step,rank,seconds,bytes_sent\n";
  for (const auto& r : rows) {
    for (std::size_t b = 0; b < kBucketCount; ++b) {
      std::uint64_t bytes = b < kSubStepCount ? r.timing.bytes_sent[b] : 0;
      s += std::to_string(r.step) + ',' + std::string(bucket_name(static_cast<Bucket>(b))) + ',' +
           std::to_string(r.rank) + ',' + fmt("%.9e", r.timing.seconds[b]) + ',' +
           std::to_string(bytes) + '\n';
    }
  }
  return s;
}

std::string state_csv(const ParticleSystem& ps) {
  std::string s = "global_id";
  for (Field f : all_fields()) s += ',' + std::string(field_name(f));
  s += '\n';
  for (std::size_t i = 0; i < ps.size(); ++i) {
    s += std::to_string(ps.global_id[i]);
    for (Field f : all_fields()) s += ',' + g17(ps[f][i]);
    s += '\n';
  }
  return s;
}

std::string campaign_csv(const std::vector<OutcomeRecord>& records) {
  std::string s =
      "trial,dataset,rank,particle_gid,bit,timing_substep,classification,significant,"
      "detect_substep,max_dev\n";
  for (const auto& r : records) {
    s += std::to_string(r.trial) + ',';
    if (r.plan) {
      s += std::string(dataset_name(r.plan->dataset)) + ',' + std::to_string(r.plan->rank) + ',' +
           std::to_string(r.particle_gid) + ',' + std::to_string(r.plan->bit) + ',' +
           std::string(substep_name(r.plan->boundary)) + ',';
    } else {
      s += "control,,,,,";
    }
    s += std::string(outcome_name(r.classification)) + ',' + (r.significant ? "1" : "0") + ',' +
         (r.detect_substep ? std::string(substep_name(*r.detect_substep)) : "") + ',' +
         g17(r.max_dev) + '\n';
  }
  return s;
}

std::string campaign_summary_csv(const CampaignMetrics& m) {
  std::string s =
      "view,dataset,trials,detected_pct,undetected_pct,masked_pct,crashed_pct,recall_pct,"
      "spr_recall_pct\n";
  for (bool sig : {true, false}) {
    const char* view = sig ? "significant" : "all";
    auto row = [&](std::string_view name, const OutcomeCounts& c, std::optional<Dataset> d) {
      std::size_t n = c.total();
      s += std::string(view) + ',' + std::string(name) + ',' + std::to_string(n) + ',' +
           pct(c.detected, n) + ',' + pct(c.undetected, n) + ',' + pct(c.masked, n) + ',' +
           pct(c.crashed, n) + ',' + opt_pct(m.recall_pct(d, sig)) + ',' +
           opt_pct(m.spr_recall_pct(d, sig)) + '\n';
    };
    for (std::size_t d = 0; d < kDatasetCount; ++d)
      row(dataset_name(static_cast<Dataset>(d)), (sig ? m.significant : m.all)[d],
          static_cast<Dataset>(d));
    row("pooled", m.pooled(sig), std::nullopt);
  }
  s += "controls,control," + std::to_string(m.controls.total()) + ",,,,,,\n";
  s += "precision," + fmt("%.2f", m.precision_pct()) + "," +
       std::to_string(m.false_positives()) + " false positives of " +
       std::to_string(m.flagged()) + " flagged,,,,,,\n";
  return s;
}

std::string campaign_summary_dat(const CampaignMetrics& m, bool significant_only) {
  std::string s = significant_only ? "# significant errors\n" : "# all errors\n";
  s += "# index dataset detected undetected masked crashed\n";
  const auto& counts = significant_only ? m.significant : m.all;
  for (std::size_t d = 0; d < kDatasetCount; ++d) {
    const auto& c = counts[d];
    std::size_t n = c.total();
    auto p = [&](std::size_t v) { return n ? 100.0 * static_cast<double>(v) / n : 0.0; };
    s += std::to_string(d) + ' ' + std::string(dataset_name(static_cast<Dataset>(d))) + ' ' +
         fmt("%.4f", p(c.detected)) + ' ' + fmt("%.4f", p(c.undetected)) + ' ' +
         fmt("%.4f", p(c.masked)) + ' ' + fmt("%.4f", p(c.crashed)) + '\n';
  }
  return s;
}

std::string bench_summary_csv(const BenchReport& r) {
  std::string s =
      "mode,measured_steps,mean_step_seconds,ccr,selection_share,detection_share,overhead_pct,"
      "mean_bytes_per_step,mean_selected_fraction\n";
  for (const auto& m : r.modes) {
    s += std::string(mode_name(m.mode)) + ',' + std::to_string(m.measured_steps) + ',' +
         fmt("%.9e", m.mean_step_seconds) + ',' + fmt("%.6f", m.ccr) + ',' +
         fmt("%.6f", m.selection_share) + ',' + fmt("%.6f", m.detection_share) + ',' +
         fmt("%.3f", r.overhead_pct(m.mode)) + ',' + fmt("%.1f", m.mean_bytes_per_step) + ',' +
         fmt("%.6f", m.mean_selected_fraction) + '\n';
  }
  return s;
}

std::string bench_breakdown_dat(const BenchReport& r) {
  std::string s = "# bucket";
  for (const auto& m : r.modes) s += ' ' + std::string(mode_name(m.mode));
  s += "\n";
  for (std::size_t b = 0; b < kBucketCount; ++b) {
    s += std::string(bucket_name(static_cast<Bucket>(b)));
    for (const auto& m : r.modes) s += ' ' + fmt("%.9e", m.mean_bucket_seconds[b]);
    s += '\n';
  }
  return s;
}

std::string bench_counts_csv(const BenchReport& r) {
  std::string s = "mode,repetition,step,rank,bytes_sent\n";
  for (const auto& m : r.modes) {
    for (std::size_t k = 0; k < m.rows.size(); ++k) {
      const auto& row = m.rows[k];
      s += std::string(mode_name(m.mode)) + ',' + std::to_string(m.repetition_of_row[k]) + ',' +
           std::to_string(row.step) + ',' + std::to_string(row.rank) + ',' +
           std::to_string(row.timing.total_bytes()) + '\n';
    }
  }
  return s;
}

std::string bench_timings_csv(const BenchReport& r) {
  std::string s = "mode,repetition,step,sub_step,rank,seconds,bytes_sent\n";
  for (const auto& m : r.modes) {
    for (std::size_t k = 0; k < m.rows.size(); ++k) {
      const auto& row = m.rows[k];
      for (std::size_t b = 0; b < kBucketCount; ++b) {
        std::uint64_t bytes = b < kSubStepCount ? row.timing.bytes_sent[b] : 0;
        s += std::string(mode_name(m.mode)) + ',' + std::to_string(m.repetition_of_row[k]) + ',' +
             std::to_string(row.step) + ',' + std::string(bucket_name(static_cast<Bucket>(b))) +
             ',' + std::to_string(row.rank) + ',' + fmt("%.9e", row.timing.seconds[b]) + ',' +
             std::to_string(bytes) + '\n';
      }
    }
  }
  return s;
}

}  // namespace sprsim
