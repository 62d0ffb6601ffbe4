// Serial reference kernels against their parallel counterparts: CLK batch
// encoding and per-candidate conjunction counting.

#include <benchmark/benchmark.h>

#include <vector>

#include "pprl/datagen.hpp"
#include "pprl/protocol.hpp"

using namespace pprl;

namespace {

ProtocolConfig bench_config() {
  ProtocolConfig pc;
  pc.params.parties = 3;
  pc.params.l = pc.params.negotiated_length();
  pc.params.hash_key_1 = HashKey::from_secret("bench-key-1");
  pc.params.hash_key_2 = HashKey::from_secret("bench-key-2");
  pc.seed = 77;
  return pc;
}

const std::vector<Database>& dataset() {
  static const GeneratedData data = [] {
    GenSpec spec;
    spec.parties = 3;
    spec.records_per_party = 4000;
    spec.overlap = 0.5;
    spec.corruption = 0.2;
    spec.seed = 77;
    return generate(spec);
  }();
  return data.parties;
}

std::vector<std::vector<std::string>> qid_rows(const Database& db,
                                               const ProtocolConfig& pc) {
  auto idx = db.attribute_indices(pc.qid_attrs);
  std::vector<std::vector<std::string>> rows;
  rows.reserve(db.rows.size());
  for (const auto& rec : db.rows) {
    std::vector<std::string> vals;
    for (auto a : idx) vals.push_back(rec.values[a]);
    rows.push_back(std::move(vals));
  }
  return rows;
}

// Shared setup for the counting benchmarks: states, exchanged segments and
// the candidate enumeration, built once.
struct CountFixture {
  ProtocolConfig config = bench_config();
  std::vector<PartyState> states;
  std::vector<Inbox> inboxes;
  CandidateEnumeration enumeration;

  CountFixture() {
    for (std::size_t p = 1; p <= 3; ++p)
      states.push_back(prepare_party(dataset()[p - 1], config, p));
    MessageBus bus(3, RunId{});
    inboxes = exchange_segments(states, bus);
    enumeration = enumerate_candidates(inboxes[0], common_bkvs(inboxes[0]));
  }
};

CountFixture& count_fixture() {
  static CountFixture fx;
  return fx;
}

void BM_encode_parallel(benchmark::State& state) {
  auto pc = bench_config();
  auto rows = qid_rows(dataset()[0], pc);
  for (auto _ : state) {
    auto filters = encode_clk_batch(rows, pc.params);
    benchmark::DoNotOptimize(filters);
  }
  state.SetItemsProcessed(int64_t(state.iterations()) * int64_t(rows.size()));
}

void BM_encode_serial(benchmark::State& state) {
  auto pc = bench_config();
  auto rows = qid_rows(dataset()[0], pc);
  for (auto _ : state) {
    auto filters = encode_clk_batch_serial(rows, pc.params);
    benchmark::DoNotOptimize(filters);
  }
  state.SetItemsProcessed(int64_t(state.iterations()) * int64_t(rows.size()));
}

void BM_partial_counts_parallel(benchmark::State& state) {
  auto& fx = count_fixture();
  for (auto _ : state) {
    auto result = compute_partial_counts(fx.states[0], fx.inboxes[0], fx.enumeration);
    benchmark::DoNotOptimize(result);
  }
  state.SetItemsProcessed(int64_t(state.iterations()) * int64_t(fx.enumeration.total));
}

void BM_partial_counts_serial(benchmark::State& state) {
  auto& fx = count_fixture();
  for (auto _ : state) {
    auto result = compute_partial_counts_serial(fx.states[0], fx.inboxes[0], fx.enumeration);
    benchmark::DoNotOptimize(result);
  }
  state.SetItemsProcessed(int64_t(state.iterations()) * int64_t(fx.enumeration.total));
}

}  // namespace

BENCHMARK(BM_encode_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_encode_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_partial_counts_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_partial_counts_parallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
