#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace pprl {

struct StepMetric {
  std::string step;
  double value = 0.0;
};

// One linkage (or baseline) run, summarized. Field names are part of the
// report contract and must not change.
struct RunReport {
  std::string mode;  // mpam | mpam-f | lai
  std::size_t parties = 0;
  std::size_t filter_length = 0;
  std::size_t hash_count = 0;
  std::size_t gram_length = 0;
  double threshold = 0.0;
  double seg_threshold = 0.0;
  std::uint64_t seed = 0;

  std::uint64_t candidates_total = 0;
  std::uint64_t candidates_after_filter = 0;
  std::uint64_t messages = 0;
  std::uint64_t bytes = 0;
  std::uint64_t matches = 0;
  std::vector<StepMetric> runtime_ms_per_step;
  std::vector<StepMetric> memory_kb_per_step;  // RSS high-water after each step

  std::uint64_t segment_messages = 0;
  std::uint64_t segment_bytes = 0;
  std::uint64_t peak_memory_kb = 0;
  std::uint64_t skipped_records = 0;

  // Evaluation blocks (quality, disclosure risk, ...) appended by the CLI.
  std::vector<std::pair<std::string, std::string>> extras;

  double total_runtime_ms() const;
};

std::string report_text(const RunReport& r);
std::string report_json(const RunReport& r);

// Writes <stem>.txt and <stem>.json under out_dir.
void write_report_files(const RunReport& r, const std::string& out_dir,
                        const std::string& stem);

// Resident-set high-water mark of this process, in KiB.
std::uint64_t peak_rss_kb();

}  // namespace pprl
