#include "pprl/protocol.hpp"

#include <algorithm>
#include <chrono>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace pprl {

namespace {

Pseudonym draw_pseudonym(std::mt19937_64& rng) {
  Pseudonym p;
  for (std::size_t i = 0; i < p.size(); i += 8) {
    std::uint64_t w = rng();
    for (std::size_t b = 0; b < 8; ++b) p[i + b] = std::uint8_t(w >> (8 * b));
  }
  return p;
}

std::mt19937_64 party_rng(std::uint64_t seed, std::size_t party_index) {
  std::seed_seq seq{seed, std::uint64_t(party_index), std::uint64_t(0x9e3779b97f4a7c15ULL)};
  return std::mt19937_64(seq);
}

void sort_by_pseudonym(std::vector<SegmentView>& views) {
  std::sort(views.begin(), views.end(),
            [](const SegmentView& a, const SegmentView& b) { return a.pseudonym < b.pseudonym; });
}

void require_equal_params(const std::vector<PartyState>& parties) {
  const BloomParams& p0 = parties[0].config.params;
  for (const auto& st : parties) {
    const BloomParams& p = st.config.params;
    if (p.l != p0.l || p.k != p0.k || p.q != p0.q || p.parties != p0.parties ||
        p.hash_key_1.k0 != p0.hash_key_1.k0 || p.hash_key_1.k1 != p0.hash_key_1.k1 ||
        p.hash_key_2.k0 != p0.hash_key_2.k0 || p.hash_key_2.k1 != p0.hash_key_2.k1)
      throw std::runtime_error("protocol abort: parties disagree on filter parameters");
  }
  if (parties.size() != p0.parties)
    throw std::runtime_error("protocol abort: party count does not match parameters");
}

// Per-block depth-first fold. s_m < 0 disables pruning entirely.
struct BlockWalk {
  const Inbox& inbox;
  const CandidateBlock& blk;
  const std::map<Pseudonym, std::int64_t>& own_ones;
  std::size_t own_party;  // 1-based
  double s_m;

  std::vector<CandidateKey> keys;
  std::vector<CountPair> values;
  std::uint64_t evaluated = 0;

  void run() { descend(0, 0, nullptr, 0, 0); }

  void descend(std::size_t level, std::uint64_t prefix, const BitVector* acc,
               std::size_t seg_x, std::int64_t own_x) {
    const std::size_t P = blk.members.size();
    const auto& slots = blk.members[level];
    const auto& views = inbox.by_party[level];
    for (std::size_t m = 0; m < slots.size(); ++m) {
      const SegmentView& v = views[slots[m]];
      BitVector conj = acc ? *acc : v.segment;
      if (acc) conj.and_with(v.segment);
      const std::size_t seg_c = conj.popcount();
      const std::size_t sx = seg_x + v.seg_ones;
      const std::uint64_t ord = prefix * slots.size() + m;
      const std::int64_t ox =
          (level + 1 == own_party) ? own_ones.at(v.pseudonym) : own_x;
      const double folded = double(level + 1);
      const double sim = sx == 0 ? 0.0 : folded * double(seg_c) / double(sx);
      const bool fails = s_m >= 0.0 && sim < s_m;
      if (level + 1 == P) {
        ++evaluated;
        if (!fails) {
          keys.push_back(blk.base + ord);
          values.push_back({std::int64_t(seg_c), ox});
        }
      } else {
        if (fails) continue;  // abandon every extension of this prefix
        descend(level + 1, ord, &conj, sx, ox);
      }
    }
  }
};

std::map<Pseudonym, std::int64_t> own_ones_index(const PartyState& st) {
  std::map<Pseudonym, std::int64_t> m;
  for (const auto& r : st.records) m[r.pseudonym] = std::int64_t(r.filter.ones());
  return m;
}

PartialCountsResult compute_counts_impl(const PartyState& st, const Inbox& inbox,
                                        const CandidateEnumeration& en, double s_m) {
  auto own_ones = own_ones_index(st);
  const long long nblocks = (long long)en.blocks.size();
  std::vector<std::unique_ptr<BlockWalk>> walks(en.blocks.size());
  for (long long b = 0; b < nblocks; ++b)
    walks[b] = std::make_unique<BlockWalk>(
        BlockWalk{inbox, en.blocks[b], own_ones, st.index, s_m});

#pragma omp parallel for schedule(dynamic)
  for (long long b = 0; b < nblocks; ++b) walks[b]->run();

  PartialCountsResult out;
  out.candidates_total = en.total;
  for (long long b = 0; b < nblocks; ++b) {
    out.evaluated += walks[b]->evaluated;
    out.counts.keys.insert(out.counts.keys.end(), walks[b]->keys.begin(), walks[b]->keys.end());
    out.counts.values.insert(out.counts.values.end(), walks[b]->values.begin(),
                             walks[b]->values.end());
  }
  return out;
}

CountVector restrict_to(const CountVector& cv, const std::vector<CandidateKey>& keys) {
  CountVector out;
  out.keys.reserve(keys.size());
  out.values.reserve(keys.size());
  std::size_t i = 0;
  for (CandidateKey k : keys) {
    while (i < cv.keys.size() && cv.keys[i] < k) ++i;
    if (i == cv.keys.size() || cv.keys[i] != k)
      throw std::logic_error("survivor reconciliation produced a key this party never computed");
    out.keys.push_back(k);
    out.values.push_back(cv.values[i]);
  }
  return out;
}

}  // namespace

void ProtocolConfig::validate() const {
  params.validate();
  if (!(s_t > 0.0 && s_t <= 1.0))
    throw std::invalid_argument("config: match threshold must be in (0, 1]");
  if (filtering && !(s_m >= 0.0 && s_m <= 1.0))
    throw std::invalid_argument("config: segment threshold must be in [0, 1] when filtering");
  if (qid_attrs.empty()) throw std::invalid_argument("config: no QID attributes");
  if (blocking_attrs.empty()) throw std::invalid_argument("config: no blocking attributes");
}

const std::string& PartyState::true_rid(const Pseudonym& p) const {
  auto it = rid_of.find(p);
  if (it == rid_of.end())
    throw std::invalid_argument("pseudonym unknown to this party");
  return it->second;
}

PartyState prepare_party(const Database& db, const ProtocolConfig& config,
                         std::size_t party_index) {
  config.validate();
  if (db.rows.empty()) throw std::invalid_argument("prepare_party: empty database");
  if (party_index < 1 || party_index > config.params.parties)
    throw std::invalid_argument("prepare_party: party index out of range");

  PartyState st;
  st.index = party_index;
  st.config = config;

  auto qid_idx = db.attribute_indices(config.qid_attrs);
  auto block_idx = db.attribute_indices(config.blocking_attrs);

  // A row is encodable iff its QID values produce at least one q-gram.
  std::vector<std::size_t> keep;
  std::vector<std::vector<std::string>> qid_rows;
  for (std::size_t i = 0; i < db.rows.size(); ++i) {
    std::vector<std::string> vals;
    vals.reserve(qid_idx.size());
    for (auto a : qid_idx) vals.push_back(db.rows[i].values[a]);
    bool encodable = false;
    for (const auto& v : vals)
      if (qgrams(v, config.params.q).count() > 0) encodable = true;
    if (encodable) {
      keep.push_back(i);
      qid_rows.push_back(std::move(vals));
    } else {
      ++st.skipped;
    }
  }
  if (keep.empty()) throw std::invalid_argument("prepare_party: no encodable records");

  std::vector<BloomFilter> filters = config.party_threads
                                         ? encode_clk_batch_serial(qid_rows, config.params)
                                         : encode_clk_batch(qid_rows, config.params);

  auto rng = party_rng(config.seed, party_index);
  st.records.reserve(keep.size());
  for (std::size_t j = 0; j < keep.size(); ++j) {
    const Record& row = db.rows[keep[j]];
    Pseudonym p = draw_pseudonym(rng);
    while (st.rid_of.count(p)) p = draw_pseudonym(rng);
    st.rid_of[p] = row.rid;
    st.records.push_back({p, blocking_key(row, block_idx), std::move(filters[j])});
  }
  return st;
}

PartyState party_state_from_filters(
    std::size_t party_index, const ProtocolConfig& config,
    const std::vector<std::tuple<std::string, std::string, BitVector>>& rows) {
  config.validate();
  if (rows.empty()) throw std::invalid_argument("party_state_from_filters: no rows");
  PartyState st;
  st.index = party_index;
  st.config = config;
  auto rng = party_rng(config.seed, party_index);
  for (const auto& [rid, bkv, bits] : rows) {
    if (bits.size() != config.params.l)
      throw std::invalid_argument("party_state_from_filters: filter length mismatch");
    Pseudonym p = draw_pseudonym(rng);
    while (st.rid_of.count(p)) p = draw_pseudonym(rng);
    st.rid_of[p] = rid;
    st.records.push_back({p, bkv, BloomFilter(bits)});
  }
  return st;
}

std::vector<Inbox> exchange_segments(const std::vector<PartyState>& parties,
                                     MessageBus& bus) {
  if (parties.empty()) throw std::invalid_argument("exchange_segments: no parties");
  require_equal_params(parties);
  const std::size_t P = parties.size();
  const std::size_t seg_len = parties[0].config.params.l / P;

  for (std::size_t i = 1; i <= P; ++i) {
    for (std::size_t j = 1; j <= P; ++j) {
      if (i == j) continue;
      SegmentShareBatch batch;
      batch.sender = std::uint8_t(i);
      batch.recipient = std::uint8_t(j);
      batch.shares.reserve(parties[i - 1].records.size());
      for (const auto& rec : parties[i - 1].records)
        batch.shares.push_back(
            {rec.pseudonym, rec.bkv, rec.filter.bits().slice((j - 1) * seg_len, seg_len)});
      bus.send(i, j, std::move(batch));
    }
  }

  std::vector<Inbox> inboxes(P);
  for (std::size_t j = 1; j <= P; ++j) {
    Inbox& inbox = inboxes[j - 1];
    inbox.owner = j;
    inbox.by_party.resize(P);
    for (std::size_t n = 0; n + 1 < P; ++n) {
      Envelope env = bus.receive(j);
      auto& batch = expect_payload<SegmentShareBatch>(env, "exchange_segments");
      if (batch.recipient != j || batch.sender < 1 || batch.sender > P || batch.sender == j)
        throw std::runtime_error("protocol abort: misrouted segment batch");
      auto& views = inbox.by_party[batch.sender - 1];
      if (!views.empty())
        throw std::runtime_error("protocol abort: duplicate segment batch from one sender");
      views.reserve(batch.shares.size());
      for (auto& s : batch.shares) {
        std::size_t ones = s.segment.popcount();
        views.push_back({s.pseudonym, std::move(s.bkv), std::move(s.segment), ones});
      }
    }
    auto& own = inbox.by_party[j - 1];
    own.reserve(parties[j - 1].records.size());
    for (const auto& rec : parties[j - 1].records) {
      BitVector seg = rec.filter.bits().slice((j - 1) * seg_len, seg_len);
      std::size_t ones = seg.popcount();
      own.push_back({rec.pseudonym, rec.bkv, std::move(seg), ones});
    }
    for (auto& views : inbox.by_party) sort_by_pseudonym(views);
  }
  return inboxes;
}

std::vector<std::string> common_bkvs(const Inbox& inbox) {
  std::set<std::string> common;
  for (const auto& v : inbox.by_party[0]) common.insert(v.bkv);
  for (std::size_t p = 1; p < inbox.by_party.size(); ++p) {
    std::set<std::string> here;
    for (const auto& v : inbox.by_party[p]) here.insert(v.bkv);
    std::set<std::string> kept;
    std::set_intersection(common.begin(), common.end(), here.begin(), here.end(),
                          std::inserter(kept, kept.begin()));
    common.swap(kept);
  }
  return {common.begin(), common.end()};
}

CandidateEnumeration enumerate_candidates(const Inbox& inbox,
                                          const std::vector<std::string>& bkvs) {
  CandidateEnumeration en;
  const std::size_t P = inbox.by_party.size();
  for (const auto& bkv : bkvs) {
    CandidateBlock blk;
    blk.bkv = bkv;
    blk.members.resize(P);
    blk.count = 1;
    for (std::size_t p = 0; p < P; ++p) {
      const auto& views = inbox.by_party[p];
      for (std::size_t i = 0; i < views.size(); ++i)
        if (views[i].bkv == bkv) blk.members[p].push_back(i);
      if (blk.members[p].empty())
        throw std::logic_error("enumerate_candidates: block not present at every party");
      if (__builtin_mul_overflow(blk.count, std::uint64_t(blk.members[p].size()), &blk.count))
        throw std::overflow_error("enumerate_candidates: candidate space too large");
    }
    blk.base = en.total;
    if (__builtin_add_overflow(en.total, blk.count, &en.total))
      throw std::overflow_error("enumerate_candidates: candidate space too large");
    en.blocks.push_back(std::move(blk));
  }
  return en;
}

std::pair<const CandidateBlock*, std::vector<std::size_t>> CandidateEnumeration::decode(
    CandidateKey key) const {
  auto it = std::upper_bound(blocks.begin(), blocks.end(), key,
                             [](CandidateKey k, const CandidateBlock& b) { return k < b.base; });
  if (it == blocks.begin()) throw std::out_of_range("candidate key before first block");
  const CandidateBlock& blk = *std::prev(it);
  std::uint64_t ord = key - blk.base;
  if (ord >= blk.count) throw std::out_of_range("candidate key past enumeration");
  const std::size_t P = blk.members.size();
  std::vector<std::size_t> slot(P);
  for (std::size_t p = P; p-- > 0;) {
    std::size_t n = blk.members[p].size();
    slot[p] = blk.members[p][ord % n];
    ord /= n;
  }
  return {&blk, std::move(slot)};
}

PartialCountsResult compute_partial_counts(const PartyState& st, const Inbox& inbox,
                                           const CandidateEnumeration& en) {
  return compute_counts_impl(st, inbox, en, -1.0);
}

PartialCountsResult compute_partial_counts_filtered(const PartyState& st, const Inbox& inbox,
                                                    const CandidateEnumeration& en,
                                                    double s_m) {
  if (s_m < 0.0 || s_m > 1.0)
    throw std::invalid_argument("segment threshold out of range");
  return compute_counts_impl(st, inbox, en, s_m);
}

PartialCountsResult compute_partial_counts_serial(const PartyState& st, const Inbox& inbox,
                                                  const CandidateEnumeration& en) {
  auto own_ones = own_ones_index(st);
  PartialCountsResult out;
  out.candidates_total = en.total;
  for (const auto& blk : en.blocks) {
    const std::size_t P = blk.members.size();
    for (std::uint64_t o = 0; o < blk.count; ++o) {
      std::uint64_t ord = o;
      std::vector<const SegmentView*> chosen(P);
      for (std::size_t p = P; p-- > 0;) {
        std::size_t n = blk.members[p].size();
        chosen[p] = &inbox.by_party[p][blk.members[p][ord % n]];
        ord /= n;
      }
      BitVector conj = chosen[0]->segment;
      for (std::size_t p = 1; p < P; ++p) conj.and_with(chosen[p]->segment);
      out.counts.keys.push_back(blk.base + o);
      out.counts.values.push_back(
          {std::int64_t(conj.popcount()), own_ones.at(chosen[st.index - 1]->pseudonym)});
      ++out.evaluated;
    }
  }
  return out;
}

CountVector run_secure_sum(const std::vector<CountVector>& per_party, MessageBus& bus,
                           std::mt19937_64& rng, std::size_t initiator) {
  const std::size_t P = per_party.size();
  if (P < 2) throw std::invalid_argument("run_secure_sum: needs at least two parties");
  if (initiator < 1 || initiator > P) throw std::invalid_argument("run_secure_sum: bad initiator");
  for (std::size_t p = 0; p < P; ++p) {
    if (per_party[p].keys == per_party[initiator - 1].keys) continue;
    std::ostringstream os;
    os << "protocol error: candidate keys of party " << (p + 1)
       << " diverge from initiator's (" << per_party[p].keys.size() << " vs "
       << per_party[initiator - 1].keys.size() << " candidates";
    std::size_t n = std::min(per_party[p].keys.size(), per_party[initiator - 1].keys.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (per_party[p].keys[i] != per_party[initiator - 1].keys[i]) {
        os << "; first difference at position " << i << ": " << per_party[p].keys[i]
           << " vs " << per_party[initiator - 1].keys[i];
        break;
      }
    }
    os << ")";
    throw std::runtime_error(os.str());
  }

  RandomOffsets offsets = draw_offsets(per_party[initiator - 1].keys, rng);
  MaskedVector token = init_masked(per_party[initiator - 1], offsets);
  std::size_t cur = initiator;
  for (std::size_t hop = 1; hop < P; ++hop) {
    std::size_t next = cur % P + 1;
    bus.send(cur, next, std::move(token));
    Envelope env = bus.receive(next);
    token = add_own(expect_payload<MaskedVector>(env, "run_secure_sum"), per_party[next - 1]);
    cur = next;
  }
  bus.send(cur, initiator, std::move(token));
  Envelope env = bus.receive(initiator);
  return unmask(expect_payload<MaskedVector>(env, "run_secure_sum"), offsets, P);
}

std::vector<ClassifiedCandidate> classify(const CountVector& sums, std::size_t parties,
                                          double s_t) {
  std::vector<ClassifiedCandidate> out;
  out.reserve(sums.size());
  for (std::size_t i = 0; i < sums.size(); ++i) {
    const auto& v = sums.values[i];
    double dice = v.x <= 0 ? 0.0 : double(parties) * double(v.c) / double(v.x);
    out.push_back({sums.keys[i], dice, dice >= s_t});
  }
  return out;
}

LinkageResult run_linkage(const std::vector<Database>& dbs, const ProtocolConfig& config) {
  config.validate();
  const std::size_t P = config.params.parties;
  if (dbs.size() != P)
    throw std::invalid_argument("run_linkage: database count differs from party count");
  if (P < 3) throw std::invalid_argument("run_linkage: needs at least three parties");

  LinkageResult result;
  RunReport& rep = result.report;
  rep.mode = config.filtering ? "mpam-f" : "mpam";
  rep.parties = P;
  rep.filter_length = config.params.l;
  rep.hash_count = config.params.k;
  rep.gram_length = config.params.q;
  rep.threshold = config.s_t;
  rep.seg_threshold = config.filtering ? config.s_m : 0.0;
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

  // Party loops run either plainly (vector kernels parallelize inside) or as
  // one thread per party when the config asks for it.
  auto per_party = [&](auto&& fn) {
    if (!config.party_threads) {
      for (std::size_t p = 1; p <= P; ++p) fn(p);
      return;
    }
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(P);
    for (std::size_t p = 1; p <= P; ++p)
      threads.emplace_back([&, p] {
        try {
          fn(p);
        } catch (...) {
          errors[p - 1] = std::current_exception();
        }
      });
    for (auto& t : threads) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  };

  std::vector<PartyState> parties(P);
  timed("prepare", [&] {
    per_party([&](std::size_t p) { parties[p - 1] = prepare_party(dbs[p - 1], config, p); });
    for (const auto& st : parties) rep.skipped_records += st.skipped;
  });

  std::vector<Inbox> inboxes;
  timed("exchange", [&] { inboxes = exchange_segments(parties, bus); });

  std::vector<CandidateEnumeration> enums(P);
  timed("enumerate", [&] {
    per_party([&](std::size_t p) {
      enums[p - 1] = enumerate_candidates(inboxes[p - 1], common_bkvs(inboxes[p - 1]));
    });
    for (const auto& en : enums)
      if (en.total != enums[0].total)
        throw std::logic_error("parties disagree on the candidate enumeration");
    rep.candidates_total = enums[0].total;
  });

  std::vector<PartialCountsResult> partials(P);
  timed("partial_counts", [&] {
    per_party([&](std::size_t p) {
      partials[p - 1] = config.filtering
                            ? compute_partial_counts_filtered(parties[p - 1], inboxes[p - 1],
                                                              enums[p - 1], config.s_m)
                            : compute_partial_counts(parties[p - 1], inboxes[p - 1], enums[p - 1]);
    });
    rep.candidates_after_filter = partials[0].evaluated;
  });

  std::vector<CountVector> counts(P);
  for (std::size_t p = 0; p < P; ++p) counts[p] = std::move(partials[p].counts);

  if (config.filtering) {
    // Parties may prune differently (each sees different segments). One ring
    // pass intersects the per-party survivor keys; the initiator then
    // redistributes the agreed set and everyone restricts to it.
    timed("reconcile", [&] {
      CandidateKeysMsg keys{counts[0].keys};
      for (std::size_t p = 1; p < P; ++p) {
        bus.send(p, p + 1, std::move(keys));
        Envelope env = bus.receive(p + 1);
        auto& incoming = expect_payload<CandidateKeysMsg>(env, "reconcile");
        std::vector<CandidateKey> merged;
        std::set_intersection(incoming.keys.begin(), incoming.keys.end(),
                              counts[p].keys.begin(), counts[p].keys.end(),
                              std::back_inserter(merged));
        keys.keys = std::move(merged);
      }
      bus.send(P, 1, std::move(keys));
      Envelope env = bus.receive(1);
      auto survivors = expect_payload<CandidateKeysMsg>(env, "reconcile").keys;
      for (std::size_t p = 2; p <= P; ++p) {
        bus.send(1, p, CandidateKeysMsg{survivors});
        (void)bus.receive(p);
      }
      for (std::size_t p = 0; p < P; ++p) counts[p] = restrict_to(counts[p], survivors);
    });
  }

  // Initiator shards: by default party 1 sums and classifies everything;
  // with rotation, block b's candidates go to party (b mod P) + 1.
  std::vector<std::pair<std::size_t, std::vector<CandidateKey>>> shards;
  if (!config.rotate_initiator) {
    shards.emplace_back(1, counts[0].keys);
  } else {
    const auto& en = enums[0];
    std::vector<std::vector<CandidateKey>> by_init(P);
    std::size_t b = 0;
    for (CandidateKey k : counts[0].keys) {
      while (k >= en.blocks[b].base + en.blocks[b].count) ++b;
      by_init[b % P].push_back(k);
    }
    for (std::size_t p = 0; p < P; ++p)
      if (!by_init[p].empty()) shards.emplace_back(p + 1, std::move(by_init[p]));
  }

  std::vector<std::pair<std::size_t, std::vector<ClassifiedCandidate>>> classified_shards;
  timed("secure_sum", [&] {
    for (auto& [init, keys] : shards) {
      std::vector<CountVector> shard_counts(P);
      for (std::size_t p = 0; p < P; ++p) shard_counts[p] = restrict_to(counts[p], keys);
      CountVector sums = run_secure_sum(shard_counts, bus, master, init);
      classified_shards.emplace_back(init, classify(sums, P, config.s_t));
    }
  });

  timed("classify", [&] {
    std::vector<std::pair<CandidateKey, LinkageMatch>> keyed;
    for (auto& [init, classified] : classified_shards) {
      MatchResultsMsg broadcast;
      for (const auto& c : classified) {
        if (!c.is_match) continue;
        auto [blk, slots] = enums[0].decode(c.key);
        MatchRecord rec;
        rec.bkv = blk->bkv;
        rec.dice = c.dice;
        for (std::size_t p = 0; p < P; ++p)
          rec.members.push_back(inboxes[0].by_party[p][slots[p]].pseudonym);
        broadcast.matches.push_back(rec);
        keyed.emplace_back(c.key, LinkageMatch{rec.bkv, rec.members, rec.dice});
      }
      for (std::size_t p = 1; p <= P; ++p) {
        if (p == init) continue;
        bus.send(init, p, broadcast);
        (void)bus.receive(p);
      }
    }
    std::sort(keyed.begin(), keyed.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [key, match] : keyed) result.matches.push_back(std::move(match));
    rep.matches = result.matches.size();
  });

  TrafficStats traffic = bus.stats();
  rep.messages = traffic.total.messages;
  rep.bytes = traffic.total.bytes;
  rep.segment_messages = traffic.of(MessageType::segment_shares).messages;
  rep.segment_bytes = traffic.of(MessageType::segment_shares).bytes;
  rep.peak_memory_kb = peak_rss_kb();
  result.parties = std::move(parties);
  return result;
}

}  // namespace pprl
