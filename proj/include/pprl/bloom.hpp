#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pprl/bitvector.hpp"
#include "pprl/hashing.hpp"

namespace pprl {

// Encoding parameters every party must agree on before a run.
struct BloomParams {
  std::size_t l = 500;  // filter length in bits; must satisfy l % parties == 0
  std::size_t k = 20;   // hash functions per gram
  std::size_t q = 2;    // gram length in characters
  HashKey hash_key_1;
  HashKey hash_key_2;
  std::size_t parties = 3;

  void validate() const;

  // Smallest l' >= l with l' % parties == 0. Parameter agreement rounds a
  // requested length up so filters stay segment-splittable.
  std::size_t negotiated_length() const { return (l + parties - 1) / parties * parties; }

  bool operator==(const BloomParams&) const = default;
};

// Distinct q-grams of one record, deduplicated before hashing.
struct QgramSet {
  std::vector<std::string> grams;  // sorted, unique
  std::size_t count() const { return grams.size(); }
};

// CLK Bloom filter over all q-grams of a record's QID values.
class BloomFilter {
 public:
  BloomFilter() = default;
  explicit BloomFilter(BitVector bits) : bits_(std::move(bits)), ones_(bits_.popcount()) {}

  const BitVector& bits() const { return bits_; }
  std::size_t length() const { return bits_.size(); }
  std::size_t ones() const { return ones_; }

  bool operator==(const BloomFilter&) const = default;

 private:
  BitVector bits_;
  std::size_t ones_ = 0;
};

// One of P equal contiguous slices of a filter; index is 1-based.
struct Segment {
  std::size_t index = 0;
  BitVector bits;
};

// Distinct contiguous length-q substrings of the lowercased, trimmed value.
// Values shorter than q yield the empty set; no padding is applied.
QgramSet qgrams(std::string_view value, std::size_t q);

// Union of the q-gram sets of all QID values, hashed into one filter with
// h_i(g) = (H1(g) + i*H2(g)) mod l for i in 1..k.
// Throws std::invalid_argument when no value yields any gram.
BloomFilter encode_clk(std::span<const std::string> record_qids, const BloomParams& params);

// The k positions one gram sets, in hash order; duplicates possible when the
// double-hashing step cycles.
std::vector<std::size_t> gram_positions(std::string_view gram, const BloomParams& params);

// Batch encoders over rows of QID values; every row must be encodable.
// The parallel version and the serial reference produce identical output.
std::vector<BloomFilter> encode_clk_batch(std::span<const std::vector<std::string>> rows,
                                          const BloomParams& params);
std::vector<BloomFilter> encode_clk_batch_serial(std::span<const std::vector<std::string>> rows,
                                                 const BloomParams& params);

// 2c / (x1 + x2); 0 when both filters are empty.
double dice_pair(const BloomFilter& b1, const BloomFilter& b2);

// P*c / sum(x_i) over two or more filters; 0 when all are empty.
double dice_multi(std::span<const BloomFilter> filters);

// Slices b into P segments of l/P bits each; requires l % P == 0.
std::vector<Segment> split(const BloomFilter& b, std::size_t parties);

// Bitwise AND of segments sharing one index and length.
Segment conjunct(std::span<const Segment> segments);

// round((l/Q) * ln 2), at least 1.
std::size_t optimal_k(std::size_t l, std::size_t grams_per_record);

// (1 / 2^ln2)^(l/Q)
double false_positive_rate(std::size_t l, std::size_t grams_per_record);

}  // namespace pprl
