#include "pprl/eval.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace pprl {

namespace {

// Tuples become set keys by joining rids with a separator the generator
// never emits.
std::string tuple_key(const std::vector<std::string>& rids) {
  std::string key;
  for (const auto& rid : rids) {
    key += rid;
    key.push_back('\x1f');
  }
  return key;
}

Quality from_counts(std::size_t tp, std::size_t predicted, std::size_t truth) {
  Quality q;
  q.precision = predicted == 0 ? 0.0 : double(tp) / double(predicted);
  q.recall = truth == 0 ? 0.0 : double(tp) / double(truth);
  q.f1 = (q.precision + q.recall) == 0.0
             ? 0.0
             : 2.0 * q.precision * q.recall / (q.precision + q.recall);
  return q;
}

}  // namespace

void write_ground_truth_csv(const GroundTruth& truth, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "entity";
  for (std::size_t p = 1; p <= truth.parties; ++p) out << ",rid_" << p;
  out << "\n";
  for (std::size_t e = 0; e < truth.tuples.size(); ++e) {
    if (truth.tuples[e].size() != truth.parties)
      throw std::invalid_argument("ground truth tuple arity mismatch");
    out << e;
    for (const auto& rid : truth.tuples[e]) out << ',' << rid;
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

GroundTruth read_ground_truth_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty ground truth file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  GroundTruth truth;
  std::size_t columns = std::count(line.begin(), line.end(), ',') + 1;
  if (columns < 2 || line.rfind("entity,", 0) != 0)
    throw std::runtime_error("bad ground truth header: " + line);
  truth.parties = columns - 1;

  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (line.back() == ',') fields.push_back("");
    if (fields.size() != columns)
      throw std::runtime_error("ground truth row arity mismatch: " + line);
    truth.tuples.emplace_back(fields.begin() + 1, fields.end());
  }
  return truth;
}

Quality quality(const std::vector<std::vector<std::string>>& predicted,
                const GroundTruth& truth) {
  std::unordered_set<std::string> truth_set;
  for (const auto& t : truth.tuples) truth_set.insert(tuple_key(t));

  std::unordered_set<std::string> predicted_set;
  for (const auto& t : predicted) predicted_set.insert(tuple_key(t));

  std::size_t tp = 0;
  for (const auto& key : predicted_set) tp += truth_set.count(key);
  return from_counts(tp, predicted_set.size(), truth_set.size());
}

Quality quality_records(const std::vector<std::vector<std::string>>& predicted_per_party,
                        const GroundTruth& truth) {
  if (truth.parties != 0 && predicted_per_party.size() != truth.parties)
    throw std::invalid_argument("quality_records: party count mismatch");

  std::size_t tp = 0, predicted = 0, truth_records = 0;
  for (std::size_t p = 0; p < predicted_per_party.size(); ++p) {
    std::set<std::string> truth_p;
    for (const auto& t : truth.tuples) truth_p.insert(t[p]);
    std::set<std::string> pred_p(predicted_per_party[p].begin(),
                                 predicted_per_party[p].end());
    truth_records += truth_p.size();
    predicted += pred_p.size();
    for (const auto& rid : pred_p) tp += truth_p.count(rid);
  }
  return from_counts(tp, predicted, truth_records);
}

double reduction_ratio_filter(std::uint64_t before, std::uint64_t after) {
  if (before == 0) throw std::invalid_argument("reduction_ratio_filter: before must be positive");
  if (after > before) throw std::invalid_argument("reduction_ratio_filter: after exceeds before");
  return 1.0 - double(after) / double(before);
}

SensitivityProfile sensitivity_profile(const std::vector<std::vector<std::string>>& rows,
                                       const BloomParams& params) {
  params.validate();

  // Distinct grams across the database, then the count of distinct grams
  // landing on each bit.
  std::set<std::string> universe;
  for (const auto& row : rows)
    for (const auto& value : row) {
      auto gs = qgrams(value, params.q);
      universe.insert(gs.grams.begin(), gs.grams.end());
    }

  std::vector<std::size_t> dist(params.l, 0);
  for (const auto& gram : universe) {
    auto positions = gram_positions(gram, params);
    std::sort(positions.begin(), positions.end());
    positions.erase(std::unique(positions.begin(), positions.end()), positions.end());
    for (std::size_t pos : positions) ++dist[pos];
  }

  std::vector<std::size_t> freq(params.l, 0);
  auto filters = encode_clk_batch(rows, params);
  for (const auto& f : filters)
    for (std::size_t b = 0; b < params.l; ++b)
      if (f.bits().test(b)) ++freq[b];

  SensitivityProfile profile;
  profile.gram_universe = universe.size();
  for (std::size_t b = 0; b < params.l; ++b) {
    if (freq[b] == 0) continue;
    BitSensitivity bs;
    bs.bit = b;
    bs.dist = dist[b];
    bs.freq = freq[b];
    bs.s = 1.0 / double(std::min(bs.dist, bs.freq));
    profile.bits.push_back(bs);
  }
  return profile;
}

void write_sensitivity_csv(const SensitivityProfile& profile, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "bit,dist,freq,s\n";
  for (const auto& bs : profile.bits)
    out << bs.bit << ',' << bs.dist << ',' << bs.freq << ',' << bs.s << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

DisclosureRisk frequency_attack(const std::vector<BitVector>& observed,
                                const std::vector<BitVector>& global_patterns) {
  if (global_patterns.empty())
    throw std::invalid_argument("frequency_attack: empty global set");

  std::unordered_map<std::string, std::size_t> global_counts;
  for (const auto& pattern : global_patterns) {
    auto bytes = pattern.to_bytes();
    ++global_counts[std::string(bytes.begin(), bytes.end())];
  }

  DisclosureRisk risk;
  risk.observed = observed.size();
  if (observed.empty()) return risk;

  double mean = 0.0;
  std::size_t unique = 0;
  for (const auto& pattern : observed) {
    auto bytes = pattern.to_bytes();
    auto it = global_counts.find(std::string(bytes.begin(), bytes.end()));
    if (it == global_counts.end()) continue;  // wrong suspicion, zero risk
    mean += 1.0 / double(it->second);
    unique += it->second == 1;
  }
  risk.dr_mean = mean / double(risk.observed);
  risk.dr_marketer = double(unique) / double(risk.observed);
  return risk;
}

namespace {

// Per-party segment patterns at one position, plus the pooled global view.
struct SegmentPatterns {
  std::vector<std::vector<BitVector>> per_party;
  std::vector<BitVector> global;
};

SegmentPatterns segment_patterns(const std::vector<Database>& dbs,
                                 const ProtocolConfig& config, std::size_t position) {
  config.validate();
  if (position < 1 || position > config.params.parties)
    throw std::invalid_argument("attack position out of range");
  if (dbs.size() != config.params.parties)
    throw std::invalid_argument("attack: database count differs from party count");

  SegmentPatterns out;
  for (const auto& db : dbs) {
    auto idx = db.attribute_indices(config.qid_attrs);
    std::vector<std::vector<std::string>> rows;
    for (const auto& rec : db.rows) {
      std::vector<std::string> vals;
      bool encodable = false;
      for (std::size_t i : idx) {
        vals.push_back(rec.values[i]);
        encodable = encodable || qgrams(rec.values[i], config.params.q).count() > 0;
      }
      if (encodable) rows.push_back(std::move(vals));
    }
    std::vector<BitVector> patterns;
    for (const auto& f : encode_clk_batch(rows, config.params)) {
      auto segs = split(f, config.params.parties);
      patterns.push_back(std::move(segs[position - 1].bits));
    }
    out.global.insert(out.global.end(), patterns.begin(), patterns.end());
    out.per_party.push_back(std::move(patterns));
  }
  return out;
}

}  // namespace

DisclosureRisk attack_position(const std::vector<Database>& dbs, const ProtocolConfig& config,
                               std::size_t position) {
  auto patterns = segment_patterns(dbs, config, position);
  std::vector<BitVector> observed;
  for (std::size_t p = 0; p < patterns.per_party.size(); ++p) {
    if (p + 1 == position) continue;  // the adversary's own records
    observed.insert(observed.end(), patterns.per_party[p].begin(),
                    patterns.per_party[p].end());
  }
  return frequency_attack(observed, patterns.global);
}

DisclosureRisk attack_mean(const std::vector<Database>& dbs, const ProtocolConfig& config) {
  DisclosureRisk total;
  for (std::size_t pos = 1; pos <= config.params.parties; ++pos) {
    auto risk = attack_position(dbs, config, pos);
    total.dr_mean += risk.dr_mean;
    total.dr_marketer += risk.dr_marketer;
    total.observed += risk.observed;
  }
  total.dr_mean /= double(config.params.parties);
  total.dr_marketer /= double(config.params.parties);
  return total;
}

}  // namespace pprl
