#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "pprl/blocking.hpp"
#include "pprl/bloom.hpp"
#include "pprl/messages.hpp"
#include "pprl/record.hpp"
#include "pprl/report.hpp"
#include "pprl/securesum.hpp"

namespace pprl {

struct ProtocolConfig {
  BloomParams params;
  double s_t = 0.8;   // overall match threshold
  double s_m = 0.8;   // per-segment filter threshold, used only when filtering
  bool filtering = false;
  bool rotate_initiator = false;
  bool party_threads = false;
  std::vector<std::string> qid_attrs = {"given_name", "surname", "suburb", "postcode"};
  std::vector<std::string> blocking_attrs = {"surname"};
  std::uint64_t seed = 1;

  void validate() const;
};

struct PartyRecord {
  Pseudonym pseudonym{};
  std::string bkv;
  BloomFilter filter;
};

// Everything one party holds. The pseudonym->RID map is the party's private
// state; nothing in the protocol ever serializes it.
struct PartyState {
  std::size_t index = 0;  // 1-based
  ProtocolConfig config;
  std::vector<PartyRecord> records;
  std::map<Pseudonym, std::string> rid_of;
  std::size_t skipped = 0;

  const std::string& true_rid(const Pseudonym& p) const;
};

// Encodes, blocks and pseudonymizes one party's database. Rows whose QID
// values yield no q-grams are skipped and counted.
PartyState prepare_party(const Database& db, const ProtocolConfig& config,
                         std::size_t party_index);

// Test/bench entry: build a party directly from (rid, bkv, filter bits)
// rows, bypassing string encoding.
PartyState party_state_from_filters(
    std::size_t party_index, const ProtocolConfig& config,
    const std::vector<std::tuple<std::string, std::string, BitVector>>& rows);

// What a party knows about one record (own or foreign) after the exchange.
struct SegmentView {
  Pseudonym pseudonym{};
  std::string bkv;
  BitVector segment;
  std::size_t seg_ones = 0;
};

struct Inbox {
  std::size_t owner = 0;  // party index; also the segment index it holds
  std::vector<std::vector<SegmentView>> by_party;  // sorted by pseudonym
};

// Every party ships segment j of all its filters to party j: P(P-1) bus
// messages. Own segments enter the local inbox without touching the bus.
std::vector<Inbox> exchange_segments(const std::vector<PartyState>& parties,
                                     MessageBus& bus);

// Blocks present at every party, derived from the BKVs visible in the inbox.
std::vector<std::string> common_bkvs(const Inbox& inbox);

struct CandidateBlock {
  std::string bkv;
  std::vector<std::vector<std::size_t>> members;  // [party-1] -> inbox positions
  std::uint64_t base = 0;   // ordinal of the block's first candidate
  std::uint64_t count = 0;  // product of per-party member counts
};

// Deterministic global candidate order: blocks sorted by BKV, members sorted
// by pseudonym, party 1 outermost. Identical at every party, which makes the
// ordinal a shared candidate key.
struct CandidateEnumeration {
  std::vector<CandidateBlock> blocks;
  std::uint64_t total = 0;

  // Splits a key into its block and the chosen member slot per party.
  std::pair<const CandidateBlock*, std::vector<std::size_t>> decode(CandidateKey key) const;
};

CandidateEnumeration enumerate_candidates(const Inbox& inbox,
                                          const std::vector<std::string>& bkvs);

struct PartialCountsResult {
  CountVector counts;                  // per surviving candidate: (c_i, x_i)
  std::uint64_t candidates_total = 0;  // full cross-product size
  std::uint64_t evaluated = 0;         // candidates compared at full depth
};

// Per-candidate conjunction counts over this party's segment column.
// c_i = ones of the P-way AND, x_i = ones of the local member's full filter.
PartialCountsResult compute_partial_counts(const PartyState& st, const Inbox& inbox,
                                           const CandidateEnumeration& en);

// Naive per-candidate reference: no prefix sharing, no parallelism.
PartialCountsResult compute_partial_counts_serial(const PartyState& st, const Inbox& inbox,
                                                  const CandidateEnumeration& en);

// Prefix-pruned variant: folds members in party order keeping running
// (seg_c, seg_x); a prefix of j segments with j*seg_c/seg_x < s_m is
// abandoned along with every extension. Candidates reaching full depth count
// as evaluated; they are kept only if the full-depth ratio also passes.
PartialCountsResult compute_partial_counts_filtered(const PartyState& st, const Inbox& inbox,
                                                    const CandidateEnumeration& en, double s_m);

// Ring pass over the bus: initiator masks with private offsets, everyone
// folds in its own counts, initiator unmasks the totals. Key sets must agree.
CountVector run_secure_sum(const std::vector<CountVector>& per_party, MessageBus& bus,
                           std::mt19937_64& rng, std::size_t initiator = 1);

struct ClassifiedCandidate {
  CandidateKey key = 0;
  double dice = 0.0;
  bool is_match = false;
};

// dice = P * c / x (0 when x = 0); match iff dice >= s_t.
std::vector<ClassifiedCandidate> classify(const CountVector& sums, std::size_t parties,
                                          double s_t);

struct LinkageMatch {
  std::string bkv;
  std::vector<Pseudonym> members;  // party order
  double dice = 0.0;
};

struct LinkageResult {
  std::vector<LinkageMatch> matches;
  RunReport report;
  // The simulation owns all party states; callers use them to resolve
  // pseudonyms to true RIDs per party (as each real party would locally).
  std::vector<PartyState> parties;
};

// The whole pipeline: prepare, exchange, enumerate, count (filtered or not),
// reconcile survivors (filtered mode), secure-sum, classify, broadcast.
LinkageResult run_linkage(const std::vector<Database>& dbs, const ProtocolConfig& config);

}  // namespace pprl
