#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <mutex>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pprl/bitvector.hpp"
#include "pprl/securesum.hpp"

namespace pprl {

using RunId = std::array<std::uint8_t, 16>;

// Run-scoped random token standing in for an encrypted record identifier.
// The true RID behind a pseudonym never leaves the owning party.
using Pseudonym = std::array<std::uint8_t, 16>;

std::string to_hex(std::span<const std::uint8_t> bytes);

// The complete set of things parties are allowed to put on the wire.
// candidate_keys exists only for the survivor-reconciliation pass of the
// filtered mode; plain runs never emit it.
enum class MessageType : std::uint8_t {
  segment_shares = 1,
  masked_vector = 2,
  match_results = 3,
  candidate_keys = 4,
};

struct SegmentShare {
  Pseudonym pseudonym{};
  std::string bkv;
  BitVector segment;
};

// One logical segment-exchange message: everything sender ships to one
// recipient. The recipient's party index doubles as the segment index.
struct SegmentShareBatch {
  std::uint8_t sender = 0;
  std::uint8_t recipient = 0;
  std::vector<SegmentShare> shares;
};

struct MatchRecord {
  std::string bkv;
  std::vector<Pseudonym> members;  // position i-1 = party p_i's record
  double dice = 0.0;
};

struct MatchResultsMsg {
  std::vector<MatchRecord> matches;
};

struct CandidateKeysMsg {
  std::vector<CandidateKey> keys;  // sorted
};

using MessagePayload =
    std::variant<SegmentShareBatch, MaskedVector, MatchResultsMsg, CandidateKeysMsg>;

MessageType type_of(const MessagePayload& payload);

struct Envelope {
  RunId run_id{};
  MessagePayload payload;
};

// Frame layout: u32 length (of everything after it), u8 type tag, 16-byte
// run id, then the type-specific body. All integers little-endian; bit
// arrays packed with bit 0 in the lowest bit of the first byte.
std::vector<std::uint8_t> encode_message(const Envelope& env);
Envelope decode_message(std::span<const std::uint8_t> frame);

struct TypeTraffic {
  std::uint64_t messages = 0;
  std::uint64_t bytes = 0;
};

struct TrafficStats {
  TypeTraffic total;
  std::array<TypeTraffic, 5> by_type{};  // indexed by MessageType value; 0 unused

  const TypeTraffic& of(MessageType t) const { return by_type[static_cast<std::size_t>(t)]; }
};

// In-process transport between party contexts. Every send serializes the
// payload for real, so the recorded byte counts are the wire truth.
class MessageBus {
 public:
  MessageBus(std::size_t parties, RunId run_id);

  // from/to are 1-based party indexes.
  void send(std::size_t from, std::size_t to, MessagePayload payload);

  // Pops the oldest frame addressed to `to` and decodes it. Throws if the
  // mailbox is empty or the run id does not match this bus.
  Envelope receive(std::size_t to);

  bool has_mail(std::size_t to) const;
  TrafficStats stats() const;
  const RunId& run_id() const { return run_id_; }

 private:
  void check_party(std::size_t p) const;

  RunId run_id_;
  mutable std::mutex mu_;
  std::vector<std::deque<std::vector<std::uint8_t>>> mailboxes_;
  TrafficStats stats_;
};

// Convenience for receivers that know what must arrive next.
template <typename T>
T& expect_payload(Envelope& env, const char* where) {
  T* p = std::get_if<T>(&env.payload);
  if (!p) throw std::logic_error(std::string(where) + ": unexpected message type");
  return *p;
}

}  // namespace pprl
