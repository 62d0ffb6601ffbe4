#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace pprl {

// Candidate sets are addressed by an opaque 64-bit key that every party
// derives identically from the shared block/candidate enumeration.
using CandidateKey = std::uint64_t;

struct CountPair {
  std::int64_t c = 0;  // conjunction count share
  std::int64_t x = 0;  // cardinality share
  bool operator==(const CountPair&) const = default;
};

// Sorted keys with aligned values. Used both for a party's own per-candidate
// contributions and for the unmasked totals handed back to the initiator.
struct CountVector {
  std::vector<CandidateKey> keys;
  std::vector<CountPair> values;

  std::size_t size() const { return keys.size(); }
};

// Private to the initiator; one fresh offset pair per candidate per run.
struct RandomOffsets {
  std::vector<CandidateKey> keys;
  std::vector<CountPair> values;
};

// The ring token. Only masked running sums ever leave a party.
struct MaskedVector {
  std::vector<CandidateKey> keys;
  std::vector<CountPair> entries;
  std::size_t hops = 0;
};

// Uniform offsets in [0, 2^31) per component, large enough to hide any
// realistic count (bounded by parties * filter length).
RandomOffsets draw_offsets(const std::vector<CandidateKey>& keys, std::mt19937_64& rng);

// Initiator seeds the ring: masked = offset + own, hop count 1.
MaskedVector init_masked(const CountVector& own, const RandomOffsets& offsets);

// Every later hop folds its own contributions in.
MaskedVector add_own(const MaskedVector& incoming, const CountVector& own);

// Initiator removes its offsets after the token returns. Requires exactly
// `parties` completed hops.
CountVector unmask(const MaskedVector& final_token, const RandomOffsets& offsets,
                   std::size_t parties);

}  // namespace pprl
