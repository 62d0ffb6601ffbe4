#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pprl/baseline.hpp"
#include "pprl/config.hpp"
#include "pprl/datagen.hpp"
#include "pprl/eval.hpp"
#include "pprl/protocol.hpp"

namespace fs = std::filesystem;
using namespace pprl;

namespace {

int verbosity() {
  static int level = [] {
    const char* env = std::getenv("PPRL_LOG");
    return env ? std::atoi(env) : 0;
  }();
  return level;
}

void log_info(const std::string& msg) {
  if (verbosity() >= 1) std::cerr << "pprl: " << msg << "\n";
}

ProtocolConfig protocol_from(const ConfigFile& cfg) {
  ProtocolConfig pc;
  pc.params.l = cfg.get_u64("protocol.l", 500);
  pc.params.k = cfg.get_u64("protocol.k", 20);
  pc.params.q = cfg.get_u64("protocol.q", 2);
  pc.params.parties = cfg.get_u64("protocol.parties", 3);
  pc.params.hash_key_1 = HashKey::from_secret(cfg.get("protocol.hash_secret_1", "pprl-hash-1"));
  pc.params.hash_key_2 = HashKey::from_secret(cfg.get("protocol.hash_secret_2", "pprl-hash-2"));
  pc.s_t = cfg.get_double("protocol.threshold", 0.8);
  pc.s_m = cfg.get_double("protocol.seg_threshold", 0.8);
  pc.rotate_initiator = cfg.get_bool("protocol.rotate_initiator", false);
  pc.party_threads = cfg.get_bool("protocol.party_threads", false);
  pc.qid_attrs = cfg.get_list("protocol.qid_attrs", pc.qid_attrs);
  pc.blocking_attrs = cfg.get_list("protocol.blocking_attrs", pc.blocking_attrs);
  pc.seed = cfg.get_u64("protocol.seed", 1);
  return pc;
}

GenSpec genspec_from(const ConfigFile& cfg, const ProtocolConfig& pc) {
  GenSpec gs;
  gs.parties = pc.params.parties;
  gs.records_per_party = cfg.get_u64("gen.records_per_party", 1000);
  gs.overlap = cfg.get_double("gen.overlap", 0.5);
  gs.corruption = cfg.get_double("gen.corruption", 0.0);
  gs.min_ops = cfg.get_u64("gen.min_ops", 1);
  gs.max_ops = cfg.get_u64("gen.max_ops", 3);
  gs.seed = cfg.get_u64("gen.seed", pc.seed);
  return gs;
}

// The filter length every party actually uses: padded up so the segment
// split is exact.
void negotiate(ProtocolConfig& pc) {
  std::size_t negotiated = pc.params.negotiated_length();
  if (negotiated != pc.params.l)
    log_info("filter length " + std::to_string(pc.params.l) + " padded to " +
             std::to_string(negotiated) + " for " + std::to_string(pc.params.parties) +
             " parties");
  pc.params.l = negotiated;
}

std::vector<Database> read_databases(const std::vector<std::string>& paths) {
  std::vector<Database> dbs;
  for (const auto& p : paths) dbs.push_back(read_database_csv(p));
  return dbs;
}

void ensure_dir(const std::string& dir) {
  if (!dir.empty()) fs::create_directories(dir);
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

struct QualityView {
  bool present = false;
  Quality q;
};

void print_quality(std::ostream& os, const Quality& q) {
  os << std::fixed << std::setprecision(4) << "precision " << q.precision << "\n"
     << "recall    " << q.recall << "\n"
     << "f1        " << q.f1 << "\n";
}

int cmd_gen(const ConfigFile& cfg, const std::string& out_dir) {
  ProtocolConfig pc = protocol_from(cfg);
  GenSpec spec = genspec_from(cfg, pc);
  auto data = generate(spec);

  ensure_dir(out_dir);
  for (std::size_t p = 0; p < data.parties.size(); ++p) {
    auto path = join_path(out_dir, "party_" + std::to_string(p + 1) + ".csv");
    write_database_csv(data.parties[p], path);
    log_info("wrote " + path);
  }
  auto truth_path = join_path(out_dir, "truth.csv");
  write_ground_truth_csv(data.truth, truth_path);
  log_info("wrote " + truth_path);

  std::cout << "generated " << spec.parties << " parties x " << spec.records_per_party
            << " records, " << data.truth.tuples.size() << " overlap entities ("
            << spec.corruption << " corrupted fraction) -> " << out_dir << "\n";
  return 0;
}

int cmd_link(const ConfigFile& cfg, const std::string& mode,
             const std::vector<std::string>& paths, const std::string& truth_path,
             const std::string& out_dir) {
  if (mode != "mpam" && mode != "mpam-f" && mode != "lai")
    throw std::runtime_error("unknown mode: " + mode + " (expected mpam, mpam-f or lai)");
  if (paths.size() < 3) throw std::runtime_error("link needs at least three party CSV files");

  ProtocolConfig pc = protocol_from(cfg);
  pc.params.parties = paths.size();
  pc.filtering = mode == "mpam-f";
  negotiate(pc);

  auto dbs = read_databases(paths);
  GroundTruth truth;
  if (!truth_path.empty()) truth = read_ground_truth_csv(truth_path);

  ensure_dir(out_dir);
  std::string matches_path = join_path(out_dir, "matches.csv");
  RunReport report;

  if (mode == "lai") {
    auto result = run_lai(dbs, pc);
    report = result.report;
    auto out = open_out(matches_path);
    out << "party,rid\n";
    for (std::size_t p = 0; p < result.matched_rids.size(); ++p)
      for (const auto& rid : result.matched_rids[p]) out << (p + 1) << ',' << rid << "\n";
  } else {
    auto result = run_linkage(dbs, pc);
    report = result.report;
    auto out = open_out(matches_path);
    out << "rid_1";
    for (std::size_t p = 2; p <= pc.params.parties; ++p) out << ",rid_" << p;
    out << ",dice\n";
    for (const auto& m : result.matches) {
      for (std::size_t p = 0; p < m.members.size(); ++p) {
        if (p) out << ',';
        // Pseudonyms go out unless ground truth authority was provided.
        if (truth_path.empty())
          out << to_hex(m.members[p]);
        else
          out << result.parties[p].true_rid(m.members[p]);
      }
      out << ',' << std::setprecision(6) << m.dice << "\n";
    }
  }

  auto text = report_text(report);
  open_out(join_path(out_dir, "report.txt")) << text;
  open_out(join_path(out_dir, "report.json")) << report_json(report);
  std::cout << text;
  log_info("wrote " + matches_path);
  return 0;
}

int cmd_eval(const std::string& matches_path, const std::string& truth_path) {
  GroundTruth truth = read_ground_truth_csv(truth_path);

  std::ifstream in(matches_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + matches_path);
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("empty matches file");
  if (!header.empty() && header.back() == '\r') header.pop_back();

  auto split_line = [](const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    return fields;
  };

  Quality q;
  std::string line;
  if (header.rfind("party,", 0) == 0) {
    // record-level matches, one row per (party, rid)
    std::vector<std::vector<std::string>> per_party(truth.parties);
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      auto fields = split_line(line);
      if (fields.size() != 2) throw std::runtime_error("bad matches row: " + line);
      std::size_t p = std::stoul(fields[0]);
      if (p < 1 || p > truth.parties)
        throw std::runtime_error("matches row names party " + fields[0]);
      per_party[p - 1].push_back(fields[1]);
    }
    q = quality_records(per_party, truth);
  } else {
    std::vector<std::vector<std::string>> predicted;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      auto fields = split_line(line);
      if (fields.size() < truth.parties + 1)
        throw std::runtime_error("bad matches row: " + line);
      predicted.emplace_back(fields.begin(), fields.begin() + truth.parties);
    }
    q = quality(predicted, truth);
  }
  print_quality(std::cout, q);
  return 0;
}

int cmd_attack(const ConfigFile& cfg, const std::vector<std::string>& paths,
               const std::string& out_dir) {
  if (paths.size() < 3) throw std::runtime_error("attack needs at least three party CSV files");
  ProtocolConfig pc = protocol_from(cfg);
  pc.params.parties = paths.size();
  negotiate(pc);

  auto dbs = read_databases(paths);
  ensure_dir(out_dir);

  // Sensitivity is a property of the encoding over all data being linked.
  std::vector<std::vector<std::string>> rows;
  for (const auto& db : dbs) {
    auto idx = db.attribute_indices(pc.qid_attrs);
    for (const auto& rec : db.rows) {
      std::vector<std::string> vals;
      for (auto a : idx) vals.push_back(rec.values[a]);
      rows.push_back(std::move(vals));
    }
  }
  auto profile = sensitivity_profile(rows, pc.params);
  auto sens_path = join_path(out_dir, "sensitivity.csv");
  write_sensitivity_csv(profile, sens_path);
  log_info("wrote " + sens_path);

  auto dr_path = join_path(out_dir, "dr.csv");
  auto out = open_out(dr_path);
  out << "position,dr_mean,dr_marketer,observed\n";
  std::cout << "position  dr_mean   dr_marketer  observed\n";
  for (std::size_t pos = 1; pos <= pc.params.parties; ++pos) {
    auto risk = attack_position(dbs, pc, pos);
    out << pos << ',' << risk.dr_mean << ',' << risk.dr_marketer << ',' << risk.observed
        << "\n";
    std::cout << std::left << std::setw(10) << pos << std::fixed << std::setprecision(6)
              << std::setw(10) << risk.dr_mean << std::setw(13) << risk.dr_marketer
              << risk.observed << "\n";
  }
  auto mean = attack_mean(dbs, pc);
  out << "mean," << mean.dr_mean << ',' << mean.dr_marketer << ',' << mean.observed << "\n";
  std::cout << std::left << std::setw(10) << "mean" << std::fixed << std::setprecision(6)
            << std::setw(10) << mean.dr_mean << std::setw(13) << mean.dr_marketer
            << mean.observed << "\n";
  return 0;
}

int cmd_bench(const ConfigFile& cfg, const std::string& out_dir) {
  auto modes = cfg.get_list("bench.modes", {"mpam", "mpam-f", "lai"});
  auto party_counts = cfg.get_list("bench.parties", {"3", "5", "7"});
  auto sizes = cfg.get_list("bench.sizes", {"500", "1000"});
  const double corruption = cfg.get_double("bench.corruption", 0.2);

  ensure_dir(out_dir);
  auto csv = open_out(join_path(out_dir, "bench.csv"));
  csv << "mode,parties,records,runtime_ms,peak_kb,messages,bytes,rr_f,precision,recall,f1\n";

  std::ostringstream table;
  table << std::left << std::setw(8) << "mode" << std::setw(9) << "parties" << std::setw(9)
        << "records" << std::setw(12) << "runtime_ms" << std::setw(10) << "peak_kb"
        << std::setw(10) << "messages" << std::setw(12) << "bytes" << std::setw(8) << "rr_f"
        << std::setw(8) << "f1" << "\n";

  for (const auto& mode : modes) {
    for (const auto& pstr : party_counts) {
      for (const auto& nstr : sizes) {
        ProtocolConfig pc = protocol_from(cfg);
        pc.params.parties = std::stoul(pstr);
        pc.filtering = mode == "mpam-f";
        negotiate(pc);

        GenSpec spec = genspec_from(cfg, pc);
        spec.parties = pc.params.parties;
        spec.records_per_party = std::stoul(nstr);
        spec.corruption = corruption;
        // one run per cell, each derived from the one configured seed
        spec.seed = pc.seed * 1000003 + spec.parties * 131 + spec.records_per_party;
        auto data = generate(spec);
        log_info("bench " + mode + " P=" + pstr + " N=" + nstr);

        RunReport report;
        Quality q;
        double rr_f = 0.0;
        if (mode == "lai") {
          auto result = run_lai(data.parties, pc);
          report = result.report;
          q = quality_records(result.matched_rids, data.truth);
        } else {
          auto result = run_linkage(data.parties, pc);
          report = result.report;
          std::vector<std::vector<std::string>> predicted;
          for (const auto& m : result.matches) {
            std::vector<std::string> tuple;
            for (std::size_t p = 0; p < m.members.size(); ++p)
              tuple.push_back(result.parties[p].true_rid(m.members[p]));
            predicted.push_back(std::move(tuple));
          }
          q = quality(predicted, data.truth);
          if (pc.filtering)
            rr_f = reduction_ratio_filter(report.candidates_total,
                                          report.candidates_after_filter);
        }

        csv << mode << ',' << pc.params.parties << ',' << spec.records_per_party << ','
            << report.total_runtime_ms() << ',' << report.peak_memory_kb << ','
            << report.messages << ',' << report.bytes << ',' << rr_f << ',' << q.precision
            << ',' << q.recall << ',' << q.f1 << "\n";
        table << std::left << std::setw(8) << mode << std::setw(9) << pc.params.parties
              << std::setw(9) << spec.records_per_party << std::setw(12) << std::fixed
              << std::setprecision(1) << report.total_runtime_ms() << std::setw(10)
              << report.peak_memory_kb << std::setw(10) << report.messages << std::setw(12)
              << report.bytes << std::setw(8) << std::setprecision(3) << rr_f << std::setw(8)
              << q.f1 << "\n";
      }
    }
  }
  std::cout << table.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-party private record linkage over Bloom filter segments"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags remain valid after the subcommand name

  std::string config_path, mode = "mpam", out_dir = ".", truth_path, matches_path;
  std::size_t parties = 0;
  double threshold = -1.0, seg_threshold = -1.0;
  std::int64_t seed = -1;
  bool party_threads = false, rotate = false;
  std::vector<std::string> data_paths;

  app.add_option("--config", config_path, "key=value configuration file");
  app.add_option("--out-dir", out_dir, "output directory");
  app.add_option("--parties", parties, "number of parties");
  app.add_option("--seed", seed, "master seed");

  auto* gen = app.add_subcommand("gen", "generate synthetic party databases plus ground truth");

  auto* link = app.add_subcommand("link", "run a linkage protocol over party CSV files");
  link->add_option("--mode", mode, "mpam | mpam-f | lai");
  link->add_option("--threshold", threshold, "classification similarity threshold");
  link->add_option("--seg-threshold", seg_threshold, "per-segment filtering threshold");
  link->add_option("--truth", truth_path, "ground truth CSV; reveals true rids in matches");
  link->add_flag("--party-threads", party_threads, "run each party on its own thread");
  link->add_flag("--rotate-initiator", rotate, "rotate the summation initiator per shard");
  link->add_option("files", data_paths, "party CSV files in party order");

  auto* eval = app.add_subcommand("eval", "score a matches CSV against ground truth");
  eval->add_option("--matches", matches_path, "matches CSV from link")->required();
  eval->add_option("--truth", truth_path, "ground truth CSV")->required();

  auto* attack = app.add_subcommand("attack", "frequency attack and bit sensitivity profile");
  attack->add_option("files", data_paths, "party CSV files in party order");

  auto* bench = app.add_subcommand("bench", "protocol comparison grid over modes, P and N");

  CLI11_PARSE(app, argc, argv);

  try {
    ConfigFile cfg;
    if (!config_path.empty()) cfg = read_config_file(config_path);
    // command line overrides beat file values
    if (parties != 0) cfg.values["protocol.parties"] = std::to_string(parties);
    if (seed >= 0) {
      cfg.values["protocol.seed"] = std::to_string(seed);
      cfg.values["gen.seed"] = std::to_string(seed);
    }
    if (threshold >= 0) cfg.values["protocol.threshold"] = std::to_string(threshold);
    if (seg_threshold >= 0) cfg.values["protocol.seg_threshold"] = std::to_string(seg_threshold);
    if (party_threads) cfg.values["protocol.party_threads"] = "true";
    if (rotate) cfg.values["protocol.rotate_initiator"] = "true";
    if (!cfg.has("mode")) cfg.values["mode"] = mode;
    if (link->count("--mode")) cfg.values["mode"] = mode;

    if (gen->parsed()) return cmd_gen(cfg, out_dir);
    if (link->parsed()) return cmd_link(cfg, cfg.get("mode", "mpam"), data_paths, truth_path, out_dir);
    if (eval->parsed()) return cmd_eval(matches_path, truth_path);
    if (attack->parsed()) return cmd_attack(cfg, data_paths, out_dir);
    if (bench->parsed()) return cmd_bench(cfg, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
