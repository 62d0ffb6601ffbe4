#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace pprl {

// Fixed-length bit array packed into 64-bit words, little-endian bit order:
// bit i lives in word i/64 at position i%64, and in byte i/8 at position i%8
// when exported with to_bytes().
class BitVector {
 public:
  BitVector() = default;

  explicit BitVector(std::size_t nbits) : words_((nbits + 63) / 64, 0), nbits_(nbits) {}

  std::size_t size() const { return nbits_; }

  bool test(std::size_t i) const {
    check(i);
    return (words_[i >> 6] >> (i & 63)) & 1u;
  }

  void set(std::size_t i) {
    check(i);
    words_[i >> 6] |= std::uint64_t{1} << (i & 63);
  }

  void reset(std::size_t i) {
    check(i);
    words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63));
  }

  std::size_t popcount() const {
    std::size_t n = 0;
    for (std::uint64_t w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }

  // In-place conjunction. Lengths must match.
  void and_with(const BitVector& other) {
    if (other.nbits_ != nbits_) throw std::invalid_argument("BitVector::and_with: length mismatch");
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] &= other.words_[w];
  }

  void or_with(const BitVector& other) {
    if (other.nbits_ != nbits_) throw std::invalid_argument("BitVector::or_with: length mismatch");
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] |= other.words_[w];
  }

  // Number of positions set in both this and other.
  std::size_t common_ones(const BitVector& other) const {
    if (other.nbits_ != nbits_) throw std::invalid_argument("BitVector::common_ones: length mismatch");
    std::size_t n = 0;
    for (std::size_t w = 0; w < words_.size(); ++w)
      n += static_cast<std::size_t>(std::popcount(words_[w] & other.words_[w]));
    return n;
  }

  // True when every set bit of this is also set in other.
  bool subset_of(const BitVector& other) const {
    if (other.nbits_ != nbits_) throw std::invalid_argument("BitVector::subset_of: length mismatch");
    for (std::size_t w = 0; w < words_.size(); ++w)
      if (words_[w] & ~other.words_[w]) return false;
    return true;
  }

  // Copy of bits [start, start+len).
  BitVector slice(std::size_t start, std::size_t len) const {
    if (start + len > nbits_) throw std::out_of_range("BitVector::slice: out of range");
    BitVector out(len);
    const std::size_t word0 = start >> 6;
    const unsigned shift = start & 63;
    for (std::size_t w = 0; w < out.words_.size(); ++w) {
      std::uint64_t lo = words_[word0 + w] >> shift;
      std::uint64_t hi = 0;
      if (shift != 0 && word0 + w + 1 < words_.size()) hi = words_[word0 + w + 1] << (64 - shift);
      out.words_[w] = lo | hi;
    }
    out.mask_tail();
    return out;
  }

  static BitVector concat(std::span<const BitVector> parts) {
    std::size_t total = 0;
    for (const auto& p : parts) total += p.size();
    BitVector out(total);
    std::size_t off = 0;
    for (const auto& p : parts) {
      for (std::size_t i = 0; i < p.size(); ++i)
        if (p.test(i)) out.set(off + i);
      off += p.size();
    }
    return out;
  }

  bool operator==(const BitVector& other) const = default;

  // Packed little-endian bytes; trailing byte zero-padded past size().
  std::vector<std::uint8_t> to_bytes() const {
    std::vector<std::uint8_t> out((nbits_ + 7) / 8, 0);
    for (std::size_t b = 0; b < out.size(); ++b) {
      const std::uint64_t w = words_[b >> 3];
      out[b] = static_cast<std::uint8_t>(w >> ((b & 7) * 8));
    }
    return out;
  }

  static BitVector from_bytes(std::span<const std::uint8_t> bytes, std::size_t nbits) {
    if (bytes.size() < (nbits + 7) / 8) throw std::invalid_argument("BitVector::from_bytes: short buffer");
    BitVector out(nbits);
    for (std::size_t b = 0; b < (nbits + 7) / 8; ++b)
      out.words_[b >> 3] |= std::uint64_t{bytes[b]} << ((b & 7) * 8);
    out.mask_tail();
    return out;
  }

  const std::vector<std::uint64_t>& words() const { return words_; }

  // FNV-1a over the packed words; used for pattern tables, not security.
  std::uint64_t fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::uint64_t w : words_) {
      for (int s = 0; s < 64; s += 8) {
        h ^= (w >> s) & 0xff;
        h *= 0x100000001b3ull;
      }
    }
    return h;
  }

 private:
  void check(std::size_t i) const {
    if (i >= nbits_) throw std::out_of_range("BitVector: index past end");
  }

  void mask_tail() {
    const unsigned rem = nbits_ & 63;
    if (rem != 0 && !words_.empty()) words_.back() &= (std::uint64_t{1} << rem) - 1;
  }

  std::vector<std::uint64_t> words_;
  std::size_t nbits_ = 0;
};

struct BitVectorHash {
  std::size_t operator()(const BitVector& v) const { return static_cast<std::size_t>(v.fingerprint()); }
};

}  // namespace pprl
