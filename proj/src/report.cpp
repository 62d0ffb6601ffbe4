#include "pprl/report.hpp"

#include <sys/resource.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace pprl {

double RunReport::total_runtime_ms() const {
  double total = 0.0;
  for (const auto& s : runtime_ms_per_step) total += s.value;
  return total;
}

std::string report_text(const RunReport& r) {
  std::ostringstream os;
  os << "mode=" << r.mode << '\n'
     << "parties=" << r.parties << '\n'
     << "filter_length=" << r.filter_length << '\n'
     << "hash_count=" << r.hash_count << '\n'
     << "gram_length=" << r.gram_length << '\n'
     << "threshold=" << r.threshold << '\n'
     << "seg_threshold=" << r.seg_threshold << '\n'
     << "seed=" << r.seed << '\n'
     << "candidates_total=" << r.candidates_total << '\n'
     << "candidates_after_filter=" << r.candidates_after_filter << '\n'
     << "messages=" << r.messages << '\n'
     << "bytes=" << r.bytes << '\n'
     << "matches=" << r.matches << '\n';
  for (const auto& s : r.runtime_ms_per_step)
    os << "runtime_ms_per_step." << s.step << '=' << s.value << '\n';
  for (const auto& s : r.memory_kb_per_step)
    os << "memory_kb_per_step." << s.step << '=' << s.value << '\n';
  os << "runtime_ms_total=" << r.total_runtime_ms() << '\n'
     << "segment_messages=" << r.segment_messages << '\n'
     << "segment_bytes=" << r.segment_bytes << '\n'
     << "peak_memory_kb=" << r.peak_memory_kb << '\n'
     << "skipped_records=" << r.skipped_records << '\n';
  for (const auto& [k, v] : r.extras) os << k << '=' << v << '\n';
  return os.str();
}

std::string report_json(const RunReport& r) {
  nlohmann::json j;
  j["mode"] = r.mode;
  j["parties"] = r.parties;
  j["filter_length"] = r.filter_length;
  j["hash_count"] = r.hash_count;
  j["gram_length"] = r.gram_length;
  j["threshold"] = r.threshold;
  j["seg_threshold"] = r.seg_threshold;
  j["seed"] = r.seed;
  j["candidates_total"] = r.candidates_total;
  j["candidates_after_filter"] = r.candidates_after_filter;
  j["messages"] = r.messages;
  j["bytes"] = r.bytes;
  j["matches"] = r.matches;
  nlohmann::json steps = nlohmann::json::object();
  for (const auto& s : r.runtime_ms_per_step) steps[s.step] = s.value;
  j["runtime_ms_per_step"] = steps;
  nlohmann::json mem = nlohmann::json::object();
  for (const auto& s : r.memory_kb_per_step) mem[s.step] = s.value;
  j["memory_kb_per_step"] = mem;
  j["runtime_ms_total"] = r.total_runtime_ms();
  j["segment_messages"] = r.segment_messages;
  j["segment_bytes"] = r.segment_bytes;
  j["peak_memory_kb"] = r.peak_memory_kb;
  j["skipped_records"] = r.skipped_records;
  for (const auto& [k, v] : r.extras) j[k] = v;
  return j.dump(2) + "\n";
}

void write_report_files(const RunReport& r, const std::string& out_dir,
                        const std::string& stem) {
  std::filesystem::create_directories(out_dir);
  auto base = std::filesystem::path(out_dir) / stem;
  {
    std::ofstream os(base.string() + ".txt");
    if (!os) throw std::runtime_error("cannot write report: " + base.string() + ".txt");
    os << report_text(r);
  }
  {
    std::ofstream os(base.string() + ".json");
    if (!os) throw std::runtime_error("cannot write report: " + base.string() + ".json");
    os << report_json(r);
  }
}

std::uint64_t peak_rss_kb() {
  rusage u{};
  getrusage(RUSAGE_SELF, &u);
  return static_cast<std::uint64_t>(u.ru_maxrss);
}

}  // namespace pprl
