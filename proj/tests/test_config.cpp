#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "pprl/config.hpp"

using namespace pprl;

TEST_CASE("config parsing") {
  auto cfg = parse_config(
      "# top comment\n"
      "mode = mpam-f\n"
      "\n"
      "[protocol]\n"
      "l = 500\n"
      "threshold=0.8\n"
      "  rotate_initiator = yes  \n"
      "qid_attrs = given_name, surname ,suburb,\n"
      "\n"
      "[gen]\n"
      "overlap = 0.5\n"
      "l = 42\n");

  CHECK(cfg.get("mode", "") == "mpam-f");
  CHECK(cfg.get_u64("protocol.l", 0) == 500);
  CHECK(cfg.get_u64("gen.l", 0) == 42);  // sections keep keys apart
  CHECK(cfg.get_double("protocol.threshold", 0) == doctest::Approx(0.8));
  CHECK(cfg.get_bool("protocol.rotate_initiator", false));
  CHECK(cfg.get_list("protocol.qid_attrs", {}) ==
        std::vector<std::string>{"given_name", "surname", "suburb"});

  SUBCASE("fallbacks apply only to missing keys") {
    CHECK(cfg.get("absent", "dflt") == "dflt");
    CHECK(cfg.get_u64("absent", 7) == 7);
    CHECK(cfg.get_double("absent", 1.5) == 1.5);
    CHECK(cfg.get_bool("absent", true));
    CHECK(cfg.get_list("absent", {"a"}) == std::vector<std::string>{"a"});
    CHECK_FALSE(cfg.has("absent"));
    CHECK(cfg.has("protocol.l"));
  }
}

TEST_CASE("later assignments win") {
  auto cfg = parse_config("a = 1\na = 2\n");
  CHECK(cfg.get_u64("a", 0) == 2);
}

TEST_CASE("malformed config lines throw with the line number") {
  CHECK_THROWS_WITH_AS(parse_config("ok = 1\nbroken\n"),
                       "config line 2: expected key = value", std::runtime_error);
  CHECK_THROWS_AS(parse_config("[section\nk = v\n"), std::runtime_error);
  CHECK_THROWS_AS(parse_config("[]\n"), std::runtime_error);
  CHECK_THROWS_AS(parse_config(" = value\n"), std::runtime_error);
}

TEST_CASE("typed getters reject junk values") {
  auto cfg = parse_config("n = 12x\nf = 1.2.3\nb = maybe\n");
  CHECK_THROWS_AS(cfg.get_u64("n", 0), std::runtime_error);
  CHECK_THROWS_AS(cfg.get_double("f", 0), std::runtime_error);
  CHECK_THROWS_AS(cfg.get_bool("b", false), std::runtime_error);
}

TEST_CASE("config file round trip") {
  const char* path = "cfg_roundtrip.ini";
  {
    std::ofstream out(path);
    out << "[protocol]\nparties = 5\n";
  }
  auto cfg = read_config_file(path);
  CHECK(cfg.get_u64("protocol.parties", 0) == 5);
  std::remove(path);
  CHECK_THROWS_AS(read_config_file("no_such_file.ini"), std::runtime_error);
}
