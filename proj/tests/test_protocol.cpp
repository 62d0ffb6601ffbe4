#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <stdexcept>

#include "pprl/protocol.hpp"
#include "test_util.hpp"

using namespace pprl;
using namespace testutil;

namespace {

Database tiny_db(const std::string& prefix,
                 std::vector<std::array<std::string, 4>> rows) {
  Database db;
  db.attributes = {"given_name", "surname", "suburb", "postcode"};
  int n = 1;
  for (auto& r : rows)
    db.rows.push_back({prefix + std::to_string(n++), {r[0], r[1], r[2], r[3]}});
  return db;
}

CountVector restrict_counts(const CountVector& cv, const std::vector<CandidateKey>& keys) {
  CountVector out;
  std::size_t i = 0;
  for (CandidateKey k : keys) {
    while (i < cv.keys.size() && cv.keys[i] < k) ++i;
    REQUIRE(i < cv.keys.size());
    REQUIRE(cv.keys[i] == k);
    out.keys.push_back(k);
    out.values.push_back(cv.values[i]);
  }
  return out;
}

struct PipelineRun {
  std::vector<Inbox> inboxes;
  CandidateEnumeration enumeration;  // party 1's (all parties agree)
  std::vector<PartialCountsResult> partials;
  CountVector sums;
  std::vector<ClassifiedCandidate> classified;
};

// Exchange, count, reconcile (if filtering), sum, classify; initiator 1.
PipelineRun run_pipeline(const MicroInstance& mi, double s_m, double s_t) {
  const std::size_t P = mi.parties.size();
  PipelineRun run;
  MessageBus bus = make_bus(P);
  run.inboxes = exchange_segments(mi.parties, bus);

  std::vector<CandidateEnumeration> enums;
  for (std::size_t p = 0; p < P; ++p)
    enums.push_back(enumerate_candidates(run.inboxes[p], common_bkvs(run.inboxes[p])));
  run.enumeration = enums[0];

  std::vector<CountVector> counts;
  for (std::size_t p = 0; p < P; ++p) {
    run.partials.push_back(
        s_m < 0.0
            ? compute_partial_counts(mi.parties[p], run.inboxes[p], enums[p])
            : compute_partial_counts_filtered(mi.parties[p], run.inboxes[p], enums[p], s_m));
    counts.push_back(run.partials.back().counts);
  }

  std::vector<CandidateKey> survivors = counts[0].keys;
  for (std::size_t p = 1; p < P; ++p) {
    std::vector<CandidateKey> merged;
    std::set_intersection(survivors.begin(), survivors.end(), counts[p].keys.begin(),
                          counts[p].keys.end(), std::back_inserter(merged));
    survivors.swap(merged);
  }
  for (auto& cv : counts) cv = restrict_counts(cv, survivors);

  std::mt19937_64 rng(99);
  run.sums = run_secure_sum(counts, bus, rng, 1);
  run.classified = classify(run.sums, P, s_t);
  return run;
}

}  // namespace

TEST_CASE("prepare_party pseudonymizes, blocks, and skips unencodable rows") {
  auto cfg = micro_config(30, 3, 42);
  auto db = tiny_db("A", {{"peter", "smith", "sydney", "2000"},
                          {"", "", "", ""},
                          {"mary", "miller", "perth", "6000"}});
  PartyState st = prepare_party(db, cfg, 1);
  CHECK_EQ(st.records.size(), 2);
  CHECK_EQ(st.skipped, 1);
  CHECK_EQ(st.records[0].bkv, "S530");
  CHECK_EQ(st.records[1].bkv, "M460");
  CHECK_EQ(st.true_rid(st.records[0].pseudonym), "A1");
  CHECK_EQ(st.true_rid(st.records[1].pseudonym), "A3");
  CHECK_THROWS_AS((void)st.true_rid(Pseudonym{}), std::invalid_argument);

  PartyState again = prepare_party(db, cfg, 1);
  CHECK_EQ(again.records[0].pseudonym, st.records[0].pseudonym);
  PartyState other = prepare_party(db, cfg, 2);
  CHECK_NE(other.records[0].pseudonym, st.records[0].pseudonym);

  Database empty;
  empty.attributes = db.attributes;
  CHECK_THROWS_AS((void)prepare_party(empty, cfg, 1), std::invalid_argument);
}

TEST_CASE("segment exchange fills every inbox and reassembles filters") {
  std::mt19937_64 rng(5);
  auto mi = random_micro(3, 30, 1, 2, rng, 7);
  // force exactly 2 records per party for the counting check
  while (true) {
    bool ok = true;
    for (const auto& st : mi.parties) ok = ok && st.records.size() == 2;
    if (ok) break;
    mi = random_micro(3, 30, 1, 2, rng, 7);
  }

  MessageBus bus = make_bus(3);
  auto inboxes = exchange_segments(mi.parties, bus);
  CHECK_EQ(bus.stats().of(MessageType::segment_shares).messages, 6);  // P(P-1)

  for (std::size_t p = 0; p < 3; ++p) {
    std::size_t shares = 0;
    for (const auto& views : inboxes[p].by_party) shares += views.size();
    CHECK_EQ(shares, 6);  // 4 foreign + 2 own
  }

  // concatenating the per-party segments of one pseudonym across the three
  // inboxes reproduces the original full filter
  for (const auto& [pseudonym, bits] : mi.full_bits) {
    std::vector<BitVector> parts;
    for (std::size_t seg = 0; seg < 3; ++seg) {
      for (const auto& views : inboxes[seg].by_party)
        for (const auto& v : views)
          if (v.pseudonym == pseudonym) parts.push_back(v.segment);
    }
    REQUIRE_EQ(parts.size(), 3);
    CHECK_EQ(BitVector::concat(parts), bits);
  }
}

TEST_CASE("segment exchange aborts on parameter mismatch") {
  std::mt19937_64 rng(6);
  auto mi = random_micro(3, 30, 1, 2, rng, 8);
  mi.parties[2].config.params.k += 1;
  MessageBus bus = make_bus(3);
  CHECK_THROWS_AS((void)exchange_segments(mi.parties, bus), std::runtime_error);
}

TEST_CASE("candidate enumeration counts cross products per block") {
  auto cfg = micro_config(30, 3, 11);
  std::mt19937_64 rng(12);
  std::vector<std::vector<std::tuple<std::string, std::string, BitVector>>> rows(3);
  auto add = [&](std::size_t party, const std::string& rid, const std::string& bkv) {
    rows[party].emplace_back(rid, bkv, random_bits(30, rng));
  };
  add(0, "A1", "S530");
  add(0, "A2", "S530");
  add(1, "B1", "S530");
  add(1, "B2", "S530");
  add(2, "C1", "S530");
  add(0, "A3", "M460");  // not common: missing at parties 2 and 3

  std::vector<PartyState> parties;
  for (std::size_t p = 0; p < 3; ++p)
    parties.push_back(party_state_from_filters(p + 1, cfg, rows[p]));

  MessageBus bus = make_bus(3);
  auto inboxes = exchange_segments(parties, bus);
  auto bkvs = common_bkvs(inboxes[0]);
  CHECK_EQ(bkvs, std::vector<std::string>{"S530"});

  auto en = enumerate_candidates(inboxes[0], bkvs);
  CHECK_EQ(en.total, 4);  // 2 * 2 * 1
  REQUIRE_EQ(en.blocks.size(), 1);
  CHECK_EQ(en.blocks[0].count, 4);

  for (CandidateKey k = 0; k < en.total; ++k) {
    auto [blk, slots] = en.decode(k);
    CHECK_EQ(blk->bkv, "S530");
    REQUIRE_EQ(slots.size(), 3);
    // slot indexes point at inbox entries carrying the block's BKV
    for (std::size_t p = 0; p < 3; ++p)
      CHECK_EQ(inboxes[0].by_party[p][slots[p]].bkv, "S530");
  }
  CHECK_THROWS_AS((void)en.decode(en.total), std::out_of_range);
}

TEST_CASE("partial counts: parallel, serial, and full-filter oracle agree") {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 12; ++rep) {
    std::size_t P = 3 + rep % 3;
    std::size_t l = (rep % 2 == 0) ? 30 : 60;
    if (l % P != 0) l = P * (l / P + 1);
    auto mi = random_micro(P, l, 2, 3, rng, 100 + rep);
    auto oracle = oracle_candidates(mi);

    auto run = run_pipeline(mi, -1.0, 0.8);
    REQUIRE_EQ(run.sums.keys.size(), oracle.size());

    for (std::size_t p = 0; p < P; ++p) {
      auto serial = compute_partial_counts_serial(mi.parties[p], run.inboxes[p],
                                                  run.enumeration);
      CHECK_EQ(serial.counts.keys, run.partials[p].counts.keys);
      for (std::size_t i = 0; i < serial.counts.values.size(); ++i)
        CHECK_EQ(serial.counts.values[i], run.partials[p].counts.values[i]);
      CHECK_EQ(serial.evaluated, run.partials[p].evaluated);
    }

    // summed segment counts equal the full-filter conjunction, candidate by
    // candidate, and the members line up with the oracle's enumeration
    for (std::size_t i = 0; i < oracle.size(); ++i) {
      CHECK_EQ(run.sums.values[i].c, oracle[i].c);
      CHECK_EQ(run.sums.values[i].x, oracle[i].x_sum);
      auto [blk, slots] = run.enumeration.decode(run.sums.keys[i]);
      CHECK_EQ(blk->bkv, oracle[i].bkv);
      for (std::size_t p = 0; p < P; ++p)
        CHECK_EQ(run.inboxes[0].by_party[p][slots[p]].pseudonym, oracle[i].members[p]);
    }
  }
}

TEST_CASE("identical records give diagonal counts equal to own segment ones") {
  auto cfg = micro_config(30, 3, 31);
  std::mt19937_64 rng(32);
  BitVector shared = random_bits(30, rng);
  std::vector<PartyState> parties;
  for (std::size_t p = 1; p <= 3; ++p)
    parties.push_back(party_state_from_filters(
        p, cfg, {{"R" + std::to_string(p), "B000", shared}}));

  MessageBus bus = make_bus(3);
  auto inboxes = exchange_segments(parties, bus);
  for (std::size_t p = 0; p < 3; ++p) {
    auto en = enumerate_candidates(inboxes[p], common_bkvs(inboxes[p]));
    auto res = compute_partial_counts(parties[p], inboxes[p], en);
    REQUIRE_EQ(res.counts.size(), 1);
    CHECK_EQ(std::size_t(res.counts.values[0].c),
             inboxes[p].by_party[p][0].seg_ones);
    CHECK_EQ(std::size_t(res.counts.values[0].x), shared.popcount());
  }
}

TEST_CASE("filtering with zero threshold changes nothing") {
  std::mt19937_64 rng(41);
  for (int rep = 0; rep < 6; ++rep) {
    auto mi = random_micro(3, 30, 2, 3, rng, 200 + rep);
    auto plain = run_pipeline(mi, -1.0, 0.8);
    auto zero = run_pipeline(mi, 0.0, 0.8);
    CHECK_EQ(plain.sums.keys, zero.sums.keys);
    for (std::size_t i = 0; i < plain.sums.values.size(); ++i)
      CHECK_EQ(plain.sums.values[i], zero.sums.values[i]);
    CHECK_EQ(zero.partials[0].evaluated, zero.partials[0].candidates_total);
  }
}

TEST_CASE("filtering keeps sets of identical filters even at threshold one") {
  auto cfg = micro_config(30, 3, 51);
  std::mt19937_64 rng(52);
  BitVector shared = random_bits(30, rng, 0.6);
  std::vector<PartyState> parties;
  for (std::size_t p = 1; p <= 3; ++p)
    parties.push_back(party_state_from_filters(p, cfg, {{"R", "B000", shared}}));
  MessageBus bus = make_bus(3);
  auto inboxes = exchange_segments(parties, bus);
  auto en = enumerate_candidates(inboxes[0], common_bkvs(inboxes[0]));
  auto res = compute_partial_counts_filtered(parties[0], inboxes[0], en, 1.0);
  CHECK_EQ(res.counts.size(), 1);
  CHECK_EQ(res.evaluated, 1);
}

// Block of 2,2,3 records where exactly one pair prefix fails the segment
// threshold: the three extensions of that prefix are never compared.
TEST_CASE("one failing pair prefix cuts comparisons from 12 to 9") {
  auto cfg = micro_config(30, 3, 61);

  auto pattern = [](std::initializer_list<int> ones) {
    BitVector v(30);
    for (int seg = 0; seg < 3; ++seg)
      for (int b : ones) v.set(std::size_t(seg * 10 + b));
    return v;
  };
  BitVector a1 = pattern({0, 1, 2, 3, 4});
  BitVector a2 = pattern({5, 6, 7, 8, 9});
  BitVector b1 = pattern({3, 4, 5, 6, 7});
  BitVector b2 = pattern({5, 6, 7, 8, 9});
  BitVector c = pattern({3, 4, 5, 6, 7});

  std::vector<PartyState> parties;
  parties.push_back(party_state_from_filters(1, cfg, {{"RA1", "B000", a1}, {"RA2", "B000", a2}}));
  parties.push_back(party_state_from_filters(2, cfg, {{"RB1", "B000", b1}, {"RB2", "B000", b2}}));
  parties.push_back(party_state_from_filters(
      3, cfg, {{"RC1", "B000", c}, {"RC2", "B000", c}, {"RC3", "B000", c}}));

  MessageBus bus = make_bus(3);
  auto inboxes = exchange_segments(parties, bus);
  for (std::size_t p = 0; p < 3; ++p) {
    auto en = enumerate_candidates(inboxes[p], common_bkvs(inboxes[p]));
    CHECK_EQ(en.total, 12);
    auto filtered = compute_partial_counts_filtered(parties[p], inboxes[p], en, 0.3);
    CHECK_EQ(filtered.evaluated, 9);
    CHECK_EQ(filtered.counts.size(), 9);

    // survivors carry exactly the unfiltered values
    auto plain = compute_partial_counts(parties[p], inboxes[p], en);
    for (std::size_t i = 0; i < filtered.counts.size(); ++i) {
      auto it = std::find(plain.counts.keys.begin(), plain.counts.keys.end(),
                          filtered.counts.keys[i]);
      REQUIRE(it != plain.counts.keys.end());
      CHECK_EQ(plain.counts.values[std::size_t(it - plain.counts.keys.begin())],
               filtered.counts.values[i]);
    }
  }
}

TEST_CASE("filtered matches are a subset of unfiltered matches") {
  std::mt19937_64 rng(71);
  for (int rep = 0; rep < 10; ++rep) {
    auto mi = random_micro(3, 30, 2, 3, rng, 300 + rep);
    auto plain = run_pipeline(mi, -1.0, 0.5);
    auto filtered = run_pipeline(mi, 0.5, 0.5);
    std::set<CandidateKey> plain_matches, filtered_matches;
    for (const auto& c : plain.classified)
      if (c.is_match) plain_matches.insert(c.key);
    for (const auto& c : filtered.classified)
      if (c.is_match) filtered_matches.insert(c.key);
    CHECK(std::includes(plain_matches.begin(), plain_matches.end(),
                        filtered_matches.begin(), filtered_matches.end()));
  }
}

TEST_CASE("secure sum over the bus: singles and random oracle") {
  MessageBus bus = make_bus(3);
  std::mt19937_64 rng(81);
  std::vector<CountVector> parts(3);
  std::int64_t cs[3] = {2, 1, 1}, xs[3] = {8, 7, 8};
  for (std::size_t p = 0; p < 3; ++p) {
    parts[p].keys = {0};
    parts[p].values = {{cs[p], xs[p]}};
  }
  auto sums = run_secure_sum(parts, bus, rng, 1);
  CHECK_EQ(sums.values[0], CountPair{4, 23});
  CHECK_EQ(bus.stats().of(MessageType::masked_vector).messages, 3);

  // key divergence is a protocol error
  parts[2].keys = {1};
  CHECK_THROWS_AS((void)run_secure_sum(parts, bus, rng, 1), std::runtime_error);
}

TEST_CASE("classification applies P*c/x against the threshold inclusively") {
  CountVector sums;
  sums.keys = {0, 1, 2};
  sums.values = {{4, 23}, {20, 75}, {0, 0}};
  auto out = classify(sums, 3, 0.8);
  CHECK_EQ(out[0].dice, doctest::Approx(12.0 / 23.0));
  CHECK_FALSE(out[0].is_match);
  CHECK_EQ(out[1].dice, doctest::Approx(0.8));
  CHECK(out[1].is_match);  // boundary is a match
  CHECK_EQ(out[2].dice, 0.0);
  CHECK_FALSE(out[2].is_match);
}

TEST_CASE("end-to-end: identical single-record databases match with dice 1") {
  auto cfg = micro_config(90, 3, 91);
  std::vector<Database> dbs = {
      tiny_db("A", {{"peter", "smith", "sydney", "2000"}}),
      tiny_db("B", {{"peter", "smith", "sydney", "2000"}}),
      tiny_db("C", {{"peter", "smith", "sydney", "2000"}})};
  auto result = run_linkage(dbs, cfg);
  REQUIRE_EQ(result.matches.size(), 1);
  CHECK_EQ(result.matches[0].dice, doctest::Approx(1.0));
  CHECK_EQ(result.report.candidates_total, 1);
  CHECK_EQ(result.report.matches, 1);
  // 6 segment batches + 3 ring hops + 2 match broadcasts
  CHECK_EQ(result.report.messages, 11);
  CHECK_GT(result.report.segment_bytes, 0);
  CHECK_EQ(result.report.runtime_ms_per_step.size(), 6);

  // each party can resolve its own member of the match tuple
  for (std::size_t p = 0; p < 3; ++p) {
    const auto& rid = result.parties[p].true_rid(result.matches[0].members[p]);
    CHECK_EQ(rid, std::string(1, char('A' + p)) + "1");
  }
}

TEST_CASE("end-to-end runs are deterministic under a fixed seed") {
  auto cfg = micro_config(90, 3, 101);
  std::vector<Database> dbs = {
      tiny_db("A", {{"peter", "smith", "sydney", "2000"}, {"mary", "smith", "perth", "6000"}}),
      tiny_db("B", {{"petra", "smyth", "sydney", "2001"}, {"mark", "smith", "perth", "6001"}}),
      tiny_db("C", {{"peter", "smith", "sidney", "2000"}, {"marie", "smith", "perth", "6000"}})};
  auto r1 = run_linkage(dbs, cfg);
  auto r2 = run_linkage(dbs, cfg);
  CHECK_EQ(r1.matches.size(), r2.matches.size());
  for (std::size_t i = 0; i < r1.matches.size(); ++i) {
    CHECK_EQ(r1.matches[i].members, r2.matches[i].members);
    CHECK_EQ(r1.matches[i].dice, r2.matches[i].dice);
  }
  CHECK_EQ(r1.report.candidates_total, r2.report.candidates_total);
  CHECK_EQ(r1.report.bytes, r2.report.bytes);
}

TEST_CASE("per-party threads and rotated initiators agree with the default run") {
  auto cfg = micro_config(90, 3, 111);
  std::vector<Database> dbs = {
      tiny_db("A", {{"peter", "smith", "sydney", "2000"}, {"anna", "miller", "perth", "6000"}}),
      tiny_db("B", {{"peter", "smyth", "sydney", "2000"}, {"anne", "mueller", "perth", "6000"}}),
      tiny_db("C", {{"peter", "smith", "sydny", "2000"}, {"anna", "miller", "pert", "6000"}})};
  auto base = run_linkage(dbs, cfg);

  auto threaded_cfg = cfg;
  threaded_cfg.party_threads = true;
  auto threaded = run_linkage(dbs, threaded_cfg);
  CHECK_EQ(threaded.matches.size(), base.matches.size());
  for (std::size_t i = 0; i < base.matches.size(); ++i)
    CHECK_EQ(threaded.matches[i].members, base.matches[i].members);

  auto rotated_cfg = cfg;
  rotated_cfg.rotate_initiator = true;
  auto rotated = run_linkage(dbs, rotated_cfg);
  REQUIRE_EQ(rotated.matches.size(), base.matches.size());
  for (std::size_t i = 0; i < base.matches.size(); ++i) {
    CHECK_EQ(rotated.matches[i].members, base.matches[i].members);
    CHECK_EQ(rotated.matches[i].dice, base.matches[i].dice);
  }
}

TEST_CASE("linkage dice equals the whole-filter multi-party similarity") {
  auto cfg = micro_config(90, 3, 121);
  std::vector<Database> dbs = {
      tiny_db("A", {{"katherine", "richardson", "wollongong", "2500"}}),
      tiny_db("B", {{"katherine", "richardson", "wollongong", "2500"}}),
      tiny_db("C", {{"catherine", "richardson", "wollongong", "2500"}})};
  auto result = run_linkage(dbs, cfg);

  std::vector<BloomFilter> fs;
  for (const auto& db : dbs) {
    std::vector<std::string> vals(db.rows[0].values.begin(), db.rows[0].values.end());
    fs.push_back(encode_clk(vals, cfg.params));
  }
  double want = dice_multi(fs);
  REQUIRE_EQ(result.report.candidates_total, 1);
  if (want >= cfg.s_t) {
    REQUIRE_EQ(result.matches.size(), 1);
    CHECK_EQ(result.matches[0].dice, want);
  } else {
    CHECK(result.matches.empty());
  }
}
