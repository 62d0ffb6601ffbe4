#include "pprl/bloom.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pprl {

void BloomParams::validate() const {
  if (l == 0) throw std::invalid_argument("BloomParams: l must be positive");
  if (k < 1) throw std::invalid_argument("BloomParams: k must be at least 1");
  if (q < 1) throw std::invalid_argument("BloomParams: q must be at least 1");
  if (parties < 3) throw std::invalid_argument("BloomParams: at least 3 parties required");
  if (l % parties != 0) throw std::invalid_argument("BloomParams: l must be divisible by the party count");
}

QgramSet qgrams(std::string_view value, std::size_t q) {
  if (q < 1) throw std::invalid_argument("qgrams: q must be at least 1");

  std::size_t begin = 0, end = value.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(value[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(value[end - 1]))) --end;

  std::string norm;
  norm.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i)
    norm.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(value[i]))));

  QgramSet out;
  if (norm.size() < q) return out;
  out.grams.reserve(norm.size() - q + 1);
  for (std::size_t i = 0; i + q <= norm.size(); ++i) out.grams.push_back(norm.substr(i, q));
  std::sort(out.grams.begin(), out.grams.end());
  out.grams.erase(std::unique(out.grams.begin(), out.grams.end()), out.grams.end());
  return out;
}

std::vector<std::size_t> gram_positions(std::string_view gram, const BloomParams& params) {
  const std::uint64_t h1 = params.hash_key_1.digest(gram);
  const std::uint64_t h2 = params.hash_key_2.digest(gram);
  std::vector<std::size_t> out;
  out.reserve(params.k);
  for (std::size_t i = 1; i <= params.k; ++i)
    out.push_back(static_cast<std::size_t>((h1 + i * h2) % params.l));
  return out;
}

BloomFilter encode_clk(std::span<const std::string> record_qids, const BloomParams& params) {
  params.validate();

  std::vector<std::string> grams;
  for (const auto& value : record_qids) {
    auto gs = qgrams(value, params.q);
    grams.insert(grams.end(), std::make_move_iterator(gs.grams.begin()),
                 std::make_move_iterator(gs.grams.end()));
  }
  std::sort(grams.begin(), grams.end());
  grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
  if (grams.empty()) throw std::invalid_argument("encode_clk: record has no encodable q-grams");

  BitVector bits(params.l);
  for (const auto& gram : grams) {
    const std::uint64_t h1 = params.hash_key_1.digest(gram);
    const std::uint64_t h2 = params.hash_key_2.digest(gram);
    for (std::size_t i = 1; i <= params.k; ++i) {
      bits.set(static_cast<std::size_t>((h1 + i * h2) % params.l));
    }
  }
  return BloomFilter(std::move(bits));
}

std::vector<BloomFilter> encode_clk_batch(std::span<const std::vector<std::string>> rows,
                                          const BloomParams& params) {
  params.validate();
  std::vector<BloomFilter> out(rows.size());
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(rows.size()); ++i) {
    out[static_cast<std::size_t>(i)] = encode_clk(rows[static_cast<std::size_t>(i)], params);
  }
  return out;
}

std::vector<BloomFilter> encode_clk_batch_serial(std::span<const std::vector<std::string>> rows,
                                                 const BloomParams& params) {
  params.validate();
  std::vector<BloomFilter> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(encode_clk(row, params));
  return out;
}

double dice_pair(const BloomFilter& b1, const BloomFilter& b2) {
  if (b1.length() != b2.length()) throw std::invalid_argument("dice_pair: length mismatch");
  const std::size_t x = b1.ones() + b2.ones();
  if (x == 0) return 0.0;
  const std::size_t c = b1.bits().common_ones(b2.bits());
  return 2.0 * static_cast<double>(c) / static_cast<double>(x);
}

double dice_multi(std::span<const BloomFilter> filters) {
  if (filters.size() < 2) throw std::invalid_argument("dice_multi: need at least 2 filters");
  std::size_t x = filters[0].ones();
  BitVector common = filters[0].bits();
  for (std::size_t i = 1; i < filters.size(); ++i) {
    if (filters[i].length() != common.size()) throw std::invalid_argument("dice_multi: length mismatch");
    common.and_with(filters[i].bits());
    x += filters[i].ones();
  }
  if (x == 0) return 0.0;
  return static_cast<double>(filters.size()) * static_cast<double>(common.popcount()) /
         static_cast<double>(x);
}

std::vector<Segment> split(const BloomFilter& b, std::size_t parties) {
  if (parties == 0 || b.length() % parties != 0)
    throw std::invalid_argument("split: filter length not divisible by party count");
  const std::size_t seg_len = b.length() / parties;
  std::vector<Segment> out;
  out.reserve(parties);
  for (std::size_t i = 0; i < parties; ++i)
    out.push_back(Segment{i + 1, b.bits().slice(i * seg_len, seg_len)});
  return out;
}

Segment conjunct(std::span<const Segment> segments) {
  if (segments.empty()) throw std::invalid_argument("conjunct: empty segment list");
  Segment out = segments[0];
  for (std::size_t i = 1; i < segments.size(); ++i) {
    if (segments[i].index != out.index) throw std::invalid_argument("conjunct: segment index mismatch");
    out.bits.and_with(segments[i].bits);
  }
  return out;
}

std::size_t optimal_k(std::size_t l, std::size_t grams_per_record) {
  if (l == 0 || grams_per_record == 0) throw std::invalid_argument("optimal_k: l and Q must be positive");
  const double k = std::round(static_cast<double>(l) / static_cast<double>(grams_per_record) * std::numbers::ln2);
  return std::max<std::size_t>(1, static_cast<std::size_t>(k));
}

double false_positive_rate(std::size_t l, std::size_t grams_per_record) {
  if (l == 0 || grams_per_record == 0)
    throw std::invalid_argument("false_positive_rate: l and Q must be positive");
  return std::pow(1.0 / std::pow(2.0, std::numbers::ln2),
                  static_cast<double>(l) / static_cast<double>(grams_per_record));
}

}  // namespace pprl
