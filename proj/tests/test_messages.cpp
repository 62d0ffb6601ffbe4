#include <doctest.h>

#include <random>
#include <stdexcept>

#include "pprl/messages.hpp"
#include "test_util.hpp"

using namespace pprl;

namespace {

RunId test_run_id() {
  RunId id{};
  for (std::size_t i = 0; i < id.size(); ++i) id[i] = std::uint8_t(0xa0 + i);
  return id;
}

Pseudonym pseud(std::uint8_t fill) {
  Pseudonym p;
  p.fill(fill);
  return p;
}

}  // namespace

TEST_CASE("segment batch round trip preserves every field") {
  std::mt19937_64 rng(3);
  SegmentShareBatch batch;
  batch.sender = 2;
  batch.recipient = 3;
  for (int i = 0; i < 5; ++i)
    batch.shares.push_back({pseud(std::uint8_t(i)), "S53" + std::to_string(i),
                            testutil::random_bits(167, rng)});

  auto frame = encode_message({test_run_id(), batch});
  Envelope env = decode_message(frame);
  CHECK_EQ(env.run_id, test_run_id());
  auto& out = std::get<SegmentShareBatch>(env.payload);
  CHECK_EQ(out.sender, 2);
  CHECK_EQ(out.recipient, 3);
  REQUIRE_EQ(out.shares.size(), batch.shares.size());
  for (std::size_t i = 0; i < batch.shares.size(); ++i) {
    CHECK_EQ(out.shares[i].pseudonym, batch.shares[i].pseudonym);
    CHECK_EQ(out.shares[i].bkv, batch.shares[i].bkv);
    CHECK_EQ(out.shares[i].segment, batch.shares[i].segment);
  }
}

TEST_CASE("frame layout: length prefix, type tag, run id") {
  CandidateKeysMsg msg{{7, 9}};
  auto frame = encode_message({test_run_id(), msg});
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len |= std::uint32_t(frame[i]) << (8 * i);
  CHECK_EQ(len, frame.size() - 4);
  CHECK_EQ(frame[4], std::uint8_t(MessageType::candidate_keys));
  for (std::size_t i = 0; i < 16; ++i) CHECK_EQ(frame[5 + i], test_run_id()[i]);
  // body: u32 count then 2 keys
  CHECK_EQ(frame.size(), 4u + 1 + 16 + 4 + 16);
}

TEST_CASE("masked vector and match results round trip") {
  MaskedVector mv;
  mv.keys = {1, 5, 900};
  mv.entries = {{10, 20}, {-3, 4}, {1 << 30, 77}};
  mv.hops = 2;
  auto env = decode_message(encode_message({test_run_id(), mv}));
  auto& mv2 = std::get<MaskedVector>(env.payload);
  CHECK_EQ(mv2.keys, mv.keys);
  CHECK_EQ(mv2.entries[1], CountPair{-3, 4});
  CHECK_EQ(mv2.hops, 2);

  MatchResultsMsg mm;
  mm.matches.push_back({"S530", {pseud(1), pseud(2), pseud(3)}, 0.8125});
  mm.matches.push_back({"M460", {pseud(4), pseud(5), pseud(6)}, 1.0});
  auto env2 = decode_message(encode_message({test_run_id(), mm}));
  auto& mm2 = std::get<MatchResultsMsg>(env2.payload);
  REQUIRE_EQ(mm2.matches.size(), 2);
  CHECK_EQ(mm2.matches[0].bkv, "S530");
  CHECK_EQ(mm2.matches[0].members[2], pseud(3));
  CHECK_EQ(mm2.matches[0].dice, 0.8125);
}

TEST_CASE("decoder rejects malformed frames") {
  auto frame = encode_message({test_run_id(), CandidateKeysMsg{{1}}});
  auto truncated = frame;
  truncated.pop_back();
  CHECK_THROWS_AS((void)decode_message(truncated), std::runtime_error);

  auto bad_tag = frame;
  bad_tag[4] = 99;
  CHECK_THROWS_AS((void)decode_message(bad_tag), std::runtime_error);

  auto extended = frame;
  extended.push_back(0);
  CHECK_THROWS_AS((void)decode_message(extended), std::runtime_error);
}

TEST_CASE("bus delivers in order and accounts traffic by type") {
  MessageBus bus(3, test_run_id());
  bus.send(1, 2, CandidateKeysMsg{{1, 2, 3}});
  bus.send(1, 2, MaskedVector{{5}, {{1, 2}}, 1});
  bus.send(3, 2, CandidateKeysMsg{{9}});

  auto stats = bus.stats();
  CHECK_EQ(stats.total.messages, 3);
  CHECK_EQ(stats.of(MessageType::candidate_keys).messages, 2);
  CHECK_EQ(stats.of(MessageType::masked_vector).messages, 1);
  CHECK_GT(stats.total.bytes, 0);
  CHECK_EQ(stats.total.bytes, stats.of(MessageType::candidate_keys).bytes +
                                  stats.of(MessageType::masked_vector).bytes);

  auto first = bus.receive(2);
  CHECK_EQ(std::get<CandidateKeysMsg>(first.payload).keys.size(), 3);
  auto second = bus.receive(2);
  CHECK_EQ(type_of(second.payload), MessageType::masked_vector);
  CHECK(bus.has_mail(2));
  (void)bus.receive(2);
  CHECK_FALSE(bus.has_mail(2));
  CHECK_THROWS_AS((void)bus.receive(2), std::logic_error);
}

TEST_CASE("bus rejects self-sends and bad indexes") {
  MessageBus bus(3, test_run_id());
  CHECK_THROWS_AS(bus.send(1, 1, CandidateKeysMsg{}), std::invalid_argument);
  CHECK_THROWS_AS(bus.send(0, 2, CandidateKeysMsg{}), std::invalid_argument);
  CHECK_THROWS_AS(bus.send(1, 4, CandidateKeysMsg{}), std::invalid_argument);
}

TEST_CASE("expect_payload names the mismatch") {
  Envelope env{test_run_id(), CandidateKeysMsg{{1}}};
  CHECK_NOTHROW(expect_payload<CandidateKeysMsg>(env, "here"));
  CHECK_THROWS_AS(expect_payload<MaskedVector>(env, "here"), std::logic_error);
}
