#include "pprl/baseline.hpp"

#include <chrono>
#include <stdexcept>

#include "pprl/blocking.hpp"
#include "pprl/messages.hpp"

namespace pprl {

namespace {

// Baseline validation: the protocol's blocking requirement does not apply
// here, an empty blocking attribute list means one global filter per party.
void validate_lai(const ProtocolConfig& config) {
  config.params.validate();
  if (config.qid_attrs.empty()) throw std::invalid_argument("config: no QID attributes");
}

std::vector<std::string> sorted_common_bkvs(const std::vector<LaiPartyState>& parties) {
  std::vector<std::string> common;
  for (const auto& [bkv, blk] : parties[0].blocks) common.push_back(bkv);
  for (std::size_t p = 1; p < parties.size(); ++p) {
    std::vector<std::string> kept;
    for (const auto& bkv : common)
      if (parties[p].blocks.count(bkv)) kept.push_back(bkv);
    common.swap(kept);
  }
  return common;
}

}  // namespace

LaiPartyState lai_prepare(const Database& db, const ProtocolConfig& config,
                          std::size_t party_index) {
  validate_lai(config);
  if (db.rows.empty()) throw std::invalid_argument("lai_prepare: empty database");
  if (party_index < 1 || party_index > config.params.parties)
    throw std::invalid_argument("lai_prepare: party index out of range");

  LaiPartyState st;
  st.index = party_index;

  auto qid_idx = db.attribute_indices(config.qid_attrs);
  auto block_idx = db.attribute_indices(config.blocking_attrs);

  std::vector<std::vector<std::string>> qid_rows;
  std::vector<std::pair<std::string, std::string>> kept;  // (rid, bkv)
  for (const auto& row : db.rows) {
    std::vector<std::string> vals;
    vals.reserve(qid_idx.size());
    for (auto a : qid_idx) vals.push_back(row.values[a]);
    bool encodable = false;
    for (const auto& v : vals)
      if (qgrams(v, config.params.q).count() > 0) encodable = true;
    if (!encodable) {
      ++st.skipped;
      continue;
    }
    std::string bkv = block_idx.empty() ? std::string("*") : blocking_key(row, block_idx);
    kept.emplace_back(row.rid, std::move(bkv));
    qid_rows.push_back(std::move(vals));
  }
  if (kept.empty()) throw std::invalid_argument("lai_prepare: no encodable records");

  std::vector<BloomFilter> filters = config.party_threads
                                         ? encode_clk_batch_serial(qid_rows, config.params)
                                         : encode_clk_batch(qid_rows, config.params);

  for (std::size_t i = 0; i < kept.size(); ++i) {
    LaiBlock& blk = st.blocks[kept[i].second];
    if (blk.rids.empty()) blk.party_filter = BloomFilter(BitVector(config.params.l));
    BitVector merged = blk.party_filter.bits();
    merged.or_with(filters[i].bits());
    blk.party_filter = BloomFilter(std::move(merged));
    blk.rids.push_back(kept[i].first);
    blk.filters.push_back(std::move(filters[i]));
  }
  return st;
}

LaiResult run_lai(const std::vector<Database>& dbs, const ProtocolConfig& config) {
  validate_lai(config);
  const std::size_t P = config.params.parties;
  if (dbs.size() != P)
    throw std::invalid_argument("run_lai: database count differs from party count");

  LaiResult result;
  RunReport& rep = result.report;
  rep.mode = "lai";
  rep.parties = P;
  rep.filter_length = config.params.l;
  rep.hash_count = config.params.k;
  rep.gram_length = config.params.q;
  rep.threshold = config.s_t;
  rep.seed = config.seed;

  std::mt19937_64 master(config.seed);
  RunId run_id;
  for (std::size_t i = 0; i < run_id.size(); i += 8) {
    std::uint64_t w = master();
    for (std::size_t b = 0; b < 8; ++b) run_id[i + b] = std::uint8_t(w >> (8 * b));
  }
  MessageBus bus(P, run_id);

  using clock = std::chrono::steady_clock;
  auto timed = [&rep](const char* name, auto&& fn) {
    auto t0 = clock::now();
    try {
      fn();
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string("step ") + name + ": " + e.what());
    }
    double ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    rep.runtime_ms_per_step.push_back({name, ms});
    rep.memory_kb_per_step.push_back({name, double(peak_rss_kb())});
  };

  std::vector<LaiPartyState> parties;
  std::vector<std::string> common;
  timed("prepare", [&] {
    for (std::size_t p = 1; p <= P; ++p) parties.push_back(lai_prepare(dbs[p - 1], config, p));
    for (const auto& st : parties) rep.skipped_records += st.skipped;
    common = sorted_common_bkvs(parties);
  });

  const std::size_t seg_len = config.params.l / P;

  // Segment j of every party filter travels to party j; each party then ANDs
  // the P segments it holds for its position.
  std::vector<std::map<std::string, BitVector>> conjuncted(P);
  timed("exchange", [&] {
    for (std::size_t sender = 1; sender <= P; ++sender) {
      for (std::size_t recipient = 1; recipient <= P; ++recipient) {
        SegmentShareBatch batch;
        batch.sender = sender;
        batch.recipient = recipient;
        for (const auto& bkv : common) {
          const BitVector& bits = parties[sender - 1].blocks.at(bkv).party_filter.bits();
          batch.shares.push_back(
              {Pseudonym{}, bkv, bits.slice((recipient - 1) * seg_len, seg_len)});
        }
        if (sender == recipient) {
          for (auto& share : batch.shares)
            conjuncted[recipient - 1].emplace(share.bkv, std::move(share.segment));
        } else {
          bus.send(sender, recipient, std::move(batch));
        }
      }
    }
    for (std::size_t recipient = 1; recipient <= P; ++recipient) {
      for (std::size_t received = 1; received < P; ++received) {
        Envelope env = bus.receive(recipient);
        auto& batch = expect_payload<SegmentShareBatch>(env, "lai exchange");
        if (batch.recipient != recipient)
          throw std::runtime_error("lai exchange: misrouted batch");
        for (auto& share : batch.shares) {
          auto it = conjuncted[recipient - 1].find(share.bkv);
          if (it == conjuncted[recipient - 1].end())
            throw std::runtime_error("lai exchange: unexpected block key");
          it->second.and_with(share.segment);
        }
      }
    }
  });

  // Conjuncted segments go all-to-all; every party concatenates them into the
  // final filter per block.
  std::vector<std::map<std::string, std::vector<BitVector>>> assembled(P);
  timed("distribute", [&] {
    for (std::size_t sender = 1; sender <= P; ++sender) {
      SegmentShareBatch batch;
      batch.sender = sender;
      for (const auto& [bkv, seg] : conjuncted[sender - 1])
        batch.shares.push_back({Pseudonym{}, bkv, seg});
      for (std::size_t recipient = 1; recipient <= P; ++recipient) {
        if (recipient == sender) continue;
        SegmentShareBatch copy = batch;
        copy.recipient = recipient;
        bus.send(sender, recipient, std::move(copy));
      }
    }
    for (std::size_t recipient = 1; recipient <= P; ++recipient) {
      auto& mine = assembled[recipient - 1];
      for (const auto& bkv : common) {
        mine[bkv].resize(P);
        mine[bkv][recipient - 1] = conjuncted[recipient - 1].at(bkv);
      }
      for (std::size_t received = 1; received < P; ++received) {
        Envelope env = bus.receive(recipient);
        auto& batch = expect_payload<SegmentShareBatch>(env, "lai distribute");
        for (auto& share : batch.shares)
          mine.at(share.bkv)[batch.sender - 1] = std::move(share.segment);
      }
    }
  });

  timed("membership", [&] {
    result.matched_rids.resize(P);
    std::uint64_t tested = 0, matched = 0;
    for (std::size_t p = 0; p < P; ++p) {
      const auto& final_segments = assembled[p];
      for (const auto& bkv : common) {
        BitVector final_filter = BitVector::concat(final_segments.at(bkv));
        const LaiBlock& blk = parties[p].blocks.at(bkv);
        for (std::size_t i = 0; i < blk.rids.size(); ++i) {
          ++tested;
          if (blk.filters[i].bits().subset_of(final_filter)) {
            result.matched_rids[p].push_back(blk.rids[i]);
            ++matched;
          }
        }
      }
    }
    rep.candidates_total = tested;
    rep.candidates_after_filter = tested;
    rep.matches = matched;
  });

  TrafficStats traffic = bus.stats();
  rep.messages = traffic.total.messages;
  rep.bytes = traffic.total.bytes;
  rep.segment_messages = traffic.of(MessageType::segment_shares).messages;
  rep.segment_bytes = traffic.of(MessageType::segment_shares).bytes;
  rep.peak_memory_kb = peak_rss_kb();
  return result;
}

}  // namespace pprl
