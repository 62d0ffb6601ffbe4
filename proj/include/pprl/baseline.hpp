#pragma once

#include <map>
#include <string>
#include <vector>

#include "pprl/bloom.hpp"
#include "pprl/protocol.hpp"
#include "pprl/record.hpp"
#include "pprl/report.hpp"

namespace pprl {

// Exact-matching linkage: each party ORs the filters of all its records in a
// block into one party filter, the filters are conjuncted segment-wise across
// parties, and each record matches iff its own filter's 1-bits all survive in
// the conjunction.

struct LaiBlock {
  std::vector<std::string> rids;        // row order
  std::vector<BloomFilter> filters;     // per record
  BloomFilter party_filter;             // OR of all record filters
};

struct LaiPartyState {
  std::size_t index = 0;  // 1-based
  std::map<std::string, LaiBlock> blocks;
  std::size_t skipped = 0;
};

// Encodes one party's records and groups them by blocking key. An empty
// blocking attribute list puts every record into a single shared block, which
// is the plain one-filter-per-party scheme.
LaiPartyState lai_prepare(const Database& db, const ProtocolConfig& config,
                          std::size_t party_index);

struct LaiResult {
  std::vector<std::vector<std::string>> matched_rids;  // [party-1], row order
  RunReport report;
};

// Two exchange rounds over the bus: party filter segments out (P(P-1)
// messages), conjuncted segments back out all-to-all (P(P-1) more). Blocks
// not present at every party never reach a membership test.
LaiResult run_lai(const std::vector<Database>& dbs, const ProtocolConfig& config);

}  // namespace pprl
