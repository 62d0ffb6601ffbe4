#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "pprl/baseline.hpp"
#include "pprl/blocking.hpp"

using namespace pprl;

namespace {

ProtocolConfig lai_config(std::size_t parties, bool blocked) {
  ProtocolConfig config;
  config.params.l = 500;
  config.params.k = 20;
  config.params.q = 2;
  config.params.parties = parties;
  config.params.l = config.params.negotiated_length();
  config.params.hash_key_1 = HashKey::from_secret("lai-test-key-1");
  config.params.hash_key_2 = HashKey::from_secret("lai-test-key-2");
  config.qid_attrs = {"name"};
  config.blocking_attrs = blocked ? std::vector<std::string>{"name"} : std::vector<std::string>{};
  config.seed = 9;
  return config;
}

Database name_db(std::string prefix, const std::vector<std::string>& names) {
  Database db;
  db.attributes = {"name"};
  for (std::size_t i = 0; i < names.size(); ++i)
    db.rows.push_back({prefix + std::to_string(i + 1), {names[i]}});
  return db;
}

std::set<std::string> matched_set(const LaiResult& result, std::size_t party) {
  return {result.matched_rids[party - 1].begin(), result.matched_rids[party - 1].end()};
}

}  // namespace

TEST_CASE("lai_prepare ORs record filters into the party filter") {
  auto config = lai_config(3, true);
  auto db = name_db("A", {"peter", "petra", "pedro", "mary", "marie"});
  auto state = lai_prepare(db, config, 1);

  CHECK(state.index == 1);
  CHECK(state.skipped == 0);
  std::size_t records = 0;
  for (const auto& [bkv, block] : state.blocks) {
    REQUIRE(block.rids.size() == block.filters.size());
    records += block.rids.size();
    BitVector expect(config.params.l);
    for (const auto& f : block.filters) expect.or_with(f.bits());
    CHECK(block.party_filter.bits() == expect);
    for (std::size_t i = 0; i < block.rids.size(); ++i) {
      const auto& row = db.rows[std::stoul(block.rids[i].substr(1)) - 1];
      CHECK(blocking_key(row, {0}) == bkv);
      CHECK(block.filters[i] == encode_clk(row.values, config.params));
    }
  }
  CHECK(records == 5);
  CHECK(state.blocks.count(soundex("peter")) == 1);
  CHECK(state.blocks.count(soundex("mary")) == 1);
}

TEST_CASE("lai_prepare with no blocking attributes forms one shared block") {
  auto config = lai_config(3, false);
  auto db = name_db("A", {"peter", "mary", "walter"});
  auto state = lai_prepare(db, config, 1);
  REQUIRE(state.blocks.size() == 1);
  CHECK(state.blocks.begin()->first == "*");
  CHECK(state.blocks.begin()->second.rids.size() == 3);
}

TEST_CASE("lai_prepare skips rows with no encodable value") {
  auto config = lai_config(3, false);
  Database db;
  db.attributes = {"name"};
  db.rows.push_back({"A1", {"peter"}});
  db.rows.push_back({"A2", {""}});
  db.rows.push_back({"A3", {"x"}});  // shorter than one bigram
  auto state = lai_prepare(db, config, 1);
  CHECK(state.skipped == 2);
  CHECK(state.blocks.begin()->second.rids == std::vector<std::string>{"A1"});
}

TEST_CASE("records present at every party always pass the membership test") {
  auto config = lai_config(3, true);
  std::vector<std::string> common = {"peter",  "mary",   "walter", "susan", "george",
                                     "helena", "victor", "monica", "frank", "louise",
                                     "albert", "teresa", "oscar",  "diana", "hector"};
  std::vector<Database> dbs = {
      name_db("A", common), name_db("B", common), name_db("C", common)};
  // distinct extra noise per party
  dbs[0].rows.push_back({"A90", {"zebulon"}});
  dbs[1].rows.push_back({"B90", {"quilliam"}});
  dbs[2].rows.push_back({"C90", {"xanthea"}});

  auto result = run_lai(dbs, config);
  for (std::size_t p = 1; p <= 3; ++p) {
    auto matched = matched_set(result, p);
    for (std::size_t i = 1; i <= common.size(); ++i)
      CHECK(matched.count(std::string(1, char('A' + p - 1)) + std::to_string(i)) == 1);
  }
}

TEST_CASE("membership is bit-subset equality, not record equality") {
  auto config = lai_config(3, false);
  // qgrams("pete") is a subset of qgrams("peter"), so pete's bits survive the
  // conjunction while peter's do not.
  std::vector<Database> dbs = {
      name_db("A", {"pete"}), name_db("B", {"peter"}), name_db("C", {"peter"})};

  auto g_small = qgrams("pete", 2);
  auto g_big = qgrams("peter", 2);
  CHECK(std::includes(g_big.grams.begin(), g_big.grams.end(), g_small.grams.begin(),
                      g_small.grams.end()));

  auto result = run_lai(dbs, config);
  CHECK(matched_set(result, 1) == std::set<std::string>{"A1"});
  CHECK(matched_set(result, 2).empty());
  CHECK(matched_set(result, 3).empty());
}

TEST_CASE("a record held by one party only does not match") {
  auto config = lai_config(3, true);
  std::vector<Database> dbs = {name_db("A", {"peter", "xavier"}), name_db("B", {"peter"}),
                               name_db("C", {"peter"})};
  auto result = run_lai(dbs, config);
  CHECK(matched_set(result, 1) == std::set<std::string>{"A1"});
  CHECK(matched_set(result, 2) == std::set<std::string>{"B1"});
  CHECK(matched_set(result, 3) == std::set<std::string>{"C1"});
}

TEST_CASE("blocks missing at any party are never tested") {
  auto config = lai_config(3, true);
  // mary (M600) exists only at parties 1 and 2; peter everywhere.
  std::vector<Database> dbs = {name_db("A", {"peter", "mary"}),
                               name_db("B", {"peter", "mary"}), name_db("C", {"peter"})};
  auto result = run_lai(dbs, config);
  CHECK(matched_set(result, 1) == std::set<std::string>{"A1"});
  CHECK(matched_set(result, 2) == std::set<std::string>{"B1"});
  CHECK(result.report.candidates_total == 3);  // only the common block's records
}

TEST_CASE("message and step accounting") {
  auto config = lai_config(3, true);
  std::vector<Database> dbs = {name_db("A", {"peter", "mary"}),
                               name_db("B", {"peter", "petra"}), name_db("C", {"peter"})};
  auto result = run_lai(dbs, config);

  CHECK(result.report.mode == "lai");
  CHECK(result.report.parties == 3);
  CHECK(result.report.messages == 2 * 3 * 2);  // two all-to-all exchange rounds
  CHECK(result.report.bytes > 0);
  REQUIRE(result.report.runtime_ms_per_step.size() == 4);
  CHECK(result.report.runtime_ms_per_step[0].step == "prepare");
  CHECK(result.report.runtime_ms_per_step[1].step == "exchange");
  CHECK(result.report.runtime_ms_per_step[2].step == "distribute");
  CHECK(result.report.runtime_ms_per_step[3].step == "membership");
  CHECK(result.report.matches == result.matched_rids[0].size() +
                                     result.matched_rids[1].size() +
                                     result.matched_rids[2].size());
}

TEST_CASE("single shared block equals the unblocked scheme") {
  // Same-soundex names: one block under blocking, same partition as none.
  std::vector<std::string> names1 = {"peter", "pedro", "pietro"};
  std::vector<std::string> names2 = {"peter", "pedro"};
  std::vector<std::string> names3 = {"peter", "pietro"};
  for (const auto& n : names1) CHECK(soundex(n) == soundex("peter"));

  std::vector<Database> dbs = {name_db("A", names1), name_db("B", names2),
                               name_db("C", names3)};
  auto blocked = run_lai(dbs, lai_config(3, true));
  auto global = run_lai(dbs, lai_config(3, false));
  CHECK(blocked.matched_rids == global.matched_rids);
}

TEST_CASE("lai runs are deterministic") {
  auto config = lai_config(4, true);
  std::vector<Database> dbs = {name_db("A", {"peter", "mary", "susan"}),
                               name_db("B", {"peter", "mary"}),
                               name_db("C", {"peter", "susan"}),
                               name_db("D", {"peter", "mary", "susan"})};
  auto r1 = run_lai(dbs, config);
  auto r2 = run_lai(dbs, config);
  CHECK(r1.matched_rids == r2.matched_rids);
  CHECK(r1.report.messages == r2.report.messages);
  CHECK(r1.report.messages == 2 * 4 * 3);
}

TEST_CASE("lai validates inputs") {
  auto config = lai_config(3, true);
  std::vector<Database> dbs = {name_db("A", {"peter"}), name_db("B", {"peter"})};
  CHECK_THROWS(run_lai(dbs, config));  // party count mismatch

  auto bad = config;
  bad.qid_attrs.clear();
  std::vector<Database> three = {name_db("A", {"peter"}), name_db("B", {"peter"}),
                                 name_db("C", {"peter"})};
  CHECK_THROWS_AS(run_lai(three, bad), std::invalid_argument);
}
