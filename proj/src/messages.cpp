#include "pprl/messages.hpp"

#include <bit>
#include <cstring>
#include <limits>
#include <stdexcept>

namespace pprl {

namespace {

struct Writer {
  std::vector<std::uint8_t> buf;

  void u8(std::uint8_t v) { buf.push_back(v); }

  void u16(std::uint16_t v) {
    buf.push_back(std::uint8_t(v));
    buf.push_back(std::uint8_t(v >> 8));
  }

  void u32(std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) buf.push_back(std::uint8_t(v >> s));
  }

  void u64(std::uint64_t v) {
    for (int s = 0; s < 64; s += 8) buf.push_back(std::uint8_t(v >> s));
  }

  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }

  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

  void bytes(std::span<const std::uint8_t> b) { buf.insert(buf.end(), b.begin(), b.end()); }

  void str16(const std::string& s) {
    if (s.size() > std::numeric_limits<std::uint16_t>::max())
      throw std::invalid_argument("wire: string too long");
    u16(static_cast<std::uint16_t>(s.size()));
    buf.insert(buf.end(), s.begin(), s.end());
  }
};

struct Reader {
  std::span<const std::uint8_t> data;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > data.size()) throw std::runtime_error("wire: truncated message");
  }

  std::uint8_t u8() {
    need(1);
    return data[pos++];
  }

  std::uint16_t u16() {
    need(2);
    std::uint16_t v = std::uint16_t(data[pos]) | std::uint16_t(data[pos + 1]) << 8;
    pos += 2;
    return v;
  }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(data[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(data[pos + i]) << (8 * i);
    pos += 8;
    return v;
  }

  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }

  double f64() { return std::bit_cast<double>(u64()); }

  std::span<const std::uint8_t> bytes(std::size_t n) {
    need(n);
    auto out = data.subspan(pos, n);
    pos += n;
    return out;
  }

  std::string str16() {
    std::size_t n = u16();
    auto b = bytes(n);
    return std::string(b.begin(), b.end());
  }

  void done() const {
    if (pos != data.size()) throw std::runtime_error("wire: trailing bytes");
  }
};

void write_body(Writer& w, const SegmentShareBatch& m) {
  w.u8(m.sender);
  w.u8(m.recipient);
  std::uint32_t seg_bits = m.shares.empty() ? 0 : std::uint32_t(m.shares[0].segment.size());
  w.u32(seg_bits);
  w.u32(std::uint32_t(m.shares.size()));
  for (const auto& s : m.shares) {
    if (s.segment.size() != seg_bits)
      throw std::invalid_argument("wire: ragged segment lengths in one batch");
    w.bytes(s.pseudonym);
    w.str16(s.bkv);
    w.bytes(s.segment.to_bytes());
  }
}

void write_body(Writer& w, const MaskedVector& m) {
  w.u8(std::uint8_t(m.hops));
  w.u32(std::uint32_t(m.keys.size()));
  for (std::size_t i = 0; i < m.keys.size(); ++i) {
    w.u64(m.keys[i]);
    w.i64(m.entries[i].c);
    w.i64(m.entries[i].x);
  }
}

void write_body(Writer& w, const MatchResultsMsg& m) {
  std::uint8_t parties = m.matches.empty() ? 0 : std::uint8_t(m.matches[0].members.size());
  w.u8(parties);
  w.u32(std::uint32_t(m.matches.size()));
  for (const auto& r : m.matches) {
    if (r.members.size() != parties)
      throw std::invalid_argument("wire: ragged match tuples");
    w.str16(r.bkv);
    for (const auto& p : r.members) w.bytes(p);
    w.f64(r.dice);
  }
}

void write_body(Writer& w, const CandidateKeysMsg& m) {
  w.u32(std::uint32_t(m.keys.size()));
  for (auto k : m.keys) w.u64(k);
}

Pseudonym read_pseudonym(Reader& r) {
  Pseudonym p;
  auto b = r.bytes(p.size());
  std::memcpy(p.data(), b.data(), p.size());
  return p;
}

SegmentShareBatch read_segment_shares(Reader& r) {
  SegmentShareBatch m;
  m.sender = r.u8();
  m.recipient = r.u8();
  std::uint32_t seg_bits = r.u32();
  std::uint32_t count = r.u32();
  m.shares.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    SegmentShare s;
    s.pseudonym = read_pseudonym(r);
    s.bkv = r.str16();
    s.segment = BitVector::from_bytes(r.bytes((seg_bits + 7) / 8), seg_bits);
    m.shares.push_back(std::move(s));
  }
  return m;
}

MaskedVector read_masked_vector(Reader& r) {
  MaskedVector m;
  m.hops = r.u8();
  std::uint32_t count = r.u32();
  m.keys.reserve(count);
  m.entries.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    m.keys.push_back(r.u64());
    CountPair e;
    e.c = r.i64();
    e.x = r.i64();
    m.entries.push_back(e);
  }
  return m;
}

MatchResultsMsg read_match_results(Reader& r) {
  MatchResultsMsg m;
  std::uint8_t parties = r.u8();
  std::uint32_t count = r.u32();
  m.matches.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    MatchRecord rec;
    rec.bkv = r.str16();
    rec.members.reserve(parties);
    for (std::uint8_t p = 0; p < parties; ++p) rec.members.push_back(read_pseudonym(r));
    rec.dice = r.f64();
    m.matches.push_back(std::move(rec));
  }
  return m;
}

CandidateKeysMsg read_candidate_keys(Reader& r) {
  CandidateKeysMsg m;
  std::uint32_t count = r.u32();
  m.keys.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) m.keys.push_back(r.u64());
  return m;
}

}  // namespace

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static const char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 15]);
  }
  return out;
}

MessageType type_of(const MessagePayload& payload) {
  return static_cast<MessageType>(payload.index() + 1);
}

std::vector<std::uint8_t> encode_message(const Envelope& env) {
  Writer w;
  w.u32(0);  // length backpatched below
  w.u8(static_cast<std::uint8_t>(type_of(env.payload)));
  w.bytes(env.run_id);
  std::visit([&w](const auto& body) { write_body(w, body); }, env.payload);

  std::uint32_t len = std::uint32_t(w.buf.size() - 4);
  for (int i = 0; i < 4; ++i) w.buf[i] = std::uint8_t(len >> (8 * i));
  return std::move(w.buf);
}

Envelope decode_message(std::span<const std::uint8_t> frame) {
  Reader r{frame};
  std::uint32_t len = r.u32();
  if (len != frame.size() - 4) throw std::runtime_error("wire: length prefix mismatch");
  auto tag = r.u8();
  Envelope env;
  auto id = r.bytes(env.run_id.size());
  std::memcpy(env.run_id.data(), id.data(), env.run_id.size());
  switch (static_cast<MessageType>(tag)) {
    case MessageType::segment_shares:
      env.payload = read_segment_shares(r);
      break;
    case MessageType::masked_vector:
      env.payload = read_masked_vector(r);
      break;
    case MessageType::match_results:
      env.payload = read_match_results(r);
      break;
    case MessageType::candidate_keys:
      env.payload = read_candidate_keys(r);
      break;
    default:
      throw std::runtime_error("wire: unknown message type tag");
  }
  r.done();
  return env;
}

MessageBus::MessageBus(std::size_t parties, RunId run_id)
    : run_id_(run_id), mailboxes_(parties) {
  if (parties < 2) throw std::invalid_argument("MessageBus: needs at least two parties");
}

void MessageBus::check_party(std::size_t p) const {
  if (p < 1 || p > mailboxes_.size()) throw std::invalid_argument("MessageBus: bad party index");
}

void MessageBus::send(std::size_t from, std::size_t to, MessagePayload payload) {
  check_party(from);
  check_party(to);
  if (from == to) throw std::invalid_argument("MessageBus: party addressing itself");
  MessageType t = type_of(payload);
  auto frame = encode_message(Envelope{run_id_, std::move(payload)});

  std::lock_guard<std::mutex> lock(mu_);
  stats_.total.messages += 1;
  stats_.total.bytes += frame.size();
  auto& tt = stats_.by_type[static_cast<std::size_t>(t)];
  tt.messages += 1;
  tt.bytes += frame.size();
  mailboxes_[to - 1].push_back(std::move(frame));
}

Envelope MessageBus::receive(std::size_t to) {
  check_party(to);
  std::vector<std::uint8_t> frame;
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto& box = mailboxes_[to - 1];
    if (box.empty()) throw std::logic_error("MessageBus: receive on empty mailbox");
    frame = std::move(box.front());
    box.pop_front();
  }
  Envelope env = decode_message(frame);
  if (env.run_id != run_id_) throw std::runtime_error("MessageBus: run id mismatch");
  return env;
}

bool MessageBus::has_mail(std::size_t to) const {
  check_party(to);
  std::lock_guard<std::mutex> lock(mu_);
  return !mailboxes_[to - 1].empty();
}

TrafficStats MessageBus::stats() const {
  std::lock_guard<std::mutex> lock(mu_);
  return stats_;
}

}  // namespace pprl
