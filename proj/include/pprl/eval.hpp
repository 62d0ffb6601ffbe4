#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pprl/bloom.hpp"
#include "pprl/protocol.hpp"
#include "pprl/record.hpp"

namespace pprl {

// True matching entities: one rid per party, same row order as the party
// databases were generated with.
struct GroundTruth {
  std::size_t parties = 0;
  std::vector<std::vector<std::string>> tuples;  // [entity] -> rid per party
};

void write_ground_truth_csv(const GroundTruth& truth, const std::string& path);
GroundTruth read_ground_truth_csv(const std::string& path);

struct Quality {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Tuple-level quality: predicted tuples are per-party rid vectors in party
// order. Degenerate denominators yield 0, so "no predictions" scores (0,0,0).
Quality quality(const std::vector<std::vector<std::string>>& predicted,
                const GroundTruth& truth);

// Record-level quality for protocols that emit per-party record lists rather
// than tuples: a record counts as a true match when it appears anywhere in
// the truth. Counts are pooled across parties.
Quality quality_records(const std::vector<std::vector<std::string>>& predicted_per_party,
                        const GroundTruth& truth);

// 1 - after/before. Requires before > 0 and after <= before.
double reduction_ratio_filter(std::uint64_t before, std::uint64_t after);

struct BitSensitivity {
  std::size_t bit = 0;
  std::size_t dist = 0;  // distinct grams hashing onto this bit
  std::size_t freq = 0;  // records setting this bit
  double s = 0.0;        // 1 / min(dist, freq)
};

// Profile over the bits actually set by the database; bits no record sets
// carry no sensitivity and are excluded.
struct SensitivityProfile {
  std::vector<BitSensitivity> bits;
  std::size_t gram_universe = 0;  // distinct grams across the whole database
};

// rows: per-record QID values. Every row must be encodable.
SensitivityProfile sensitivity_profile(const std::vector<std::vector<std::string>>& rows,
                                       const BloomParams& params);

void write_sensitivity_csv(const SensitivityProfile& profile, const std::string& path);

struct DisclosureRisk {
  double dr_mean = 0.0;      // mean 1/n_g over observed patterns
  double dr_marketer = 0.0;  // fraction matching exactly one global pattern
  std::size_t observed = 0;  // |D^M|
};

// Exact-pattern frequency attack: for each observed bit pattern, n_g is the
// number of global patterns equal to it. Patterns absent from the global set
// contribute zero risk. Throws when the global set is empty.
DisclosureRisk frequency_attack(const std::vector<BitVector>& observed,
                                const std::vector<BitVector>& global_patterns);

// The segment view an adversary at the given position (1-based) obtains from
// the exchange: segment `position` of every foreign record. The global set is
// all parties' records encoded with the same parameters (worst case, the
// adversary's external data equals the masked data).
DisclosureRisk attack_position(const std::vector<Database>& dbs, const ProtocolConfig& config,
                               std::size_t position);

// Mean of attack_position over all P positions.
DisclosureRisk attack_mean(const std::vector<Database>& dbs, const ProtocolConfig& config);

}  // namespace pprl
