#include "pprl/securesum.hpp"

#include <limits>
#include <stdexcept>

namespace pprl {

namespace {

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_add_overflow(a, b, &out))
    throw std::overflow_error("secure sum: 64-bit accumulator overflow");
  return out;
}

void require_same_keys(const std::vector<CandidateKey>& a,
                       const std::vector<CandidateKey>& b, const char* where) {
  if (a != b) throw std::invalid_argument(std::string(where) + ": candidate key sets differ");
}

}  // namespace

RandomOffsets draw_offsets(const std::vector<CandidateKey>& keys, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::int64_t> dist(0, (std::int64_t{1} << 31) - 1);
  RandomOffsets r;
  r.keys = keys;
  r.values.reserve(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) r.values.push_back({dist(rng), dist(rng)});
  return r;
}

MaskedVector init_masked(const CountVector& own, const RandomOffsets& offsets) {
  require_same_keys(own.keys, offsets.keys, "init_masked");
  MaskedVector m;
  m.keys = own.keys;
  m.entries.reserve(own.size());
  for (std::size_t i = 0; i < own.size(); ++i)
    m.entries.push_back({checked_add(offsets.values[i].c, own.values[i].c),
                         checked_add(offsets.values[i].x, own.values[i].x)});
  m.hops = 1;
  return m;
}

MaskedVector add_own(const MaskedVector& incoming, const CountVector& own) {
  require_same_keys(incoming.keys, own.keys, "add_own");
  MaskedVector m = incoming;
  for (std::size_t i = 0; i < own.size(); ++i) {
    m.entries[i].c = checked_add(m.entries[i].c, own.values[i].c);
    m.entries[i].x = checked_add(m.entries[i].x, own.values[i].x);
  }
  m.hops = incoming.hops + 1;
  return m;
}

CountVector unmask(const MaskedVector& final_token, const RandomOffsets& offsets,
                   std::size_t parties) {
  if (final_token.hops != parties)
    throw std::logic_error("unmask: ring token has not visited every party exactly once");
  require_same_keys(final_token.keys, offsets.keys, "unmask");
  CountVector out;
  out.keys = final_token.keys;
  out.values.reserve(final_token.entries.size());
  for (std::size_t i = 0; i < final_token.entries.size(); ++i)
    out.values.push_back({final_token.entries[i].c - offsets.values[i].c,
                          final_token.entries[i].x - offsets.values[i].x});
  return out;
}

}  // namespace pprl
