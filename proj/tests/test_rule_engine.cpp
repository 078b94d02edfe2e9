#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "oracle.hpp"
#include "sentinel/campaign_simulator.hpp"
#include "sentinel/rule_engine.hpp"

using namespace sentinel;

TEST_CASE("match_pattern handles wildcards, anchors, and case folds") {
  CHECK(match_pattern("%jnmxrvt%", "C:\\Users\\x\\JNMXRVT hcsm.exe"));
  CHECK(match_pattern("%.ppam", "decoy.PPAM"));
  CHECK_FALSE(match_pattern("%.ppam", "decoy.ppam.txt"));  // anchored at the end
  CHECK(match_pattern("a_c", "abc"));
  CHECK_FALSE(match_pattern("a_c", "ac"));    // '_' needs exactly one char
  CHECK_FALSE(match_pattern("a_c", "abbc"));
  CHECK(match_pattern("%", ""));
  CHECK(match_pattern("", ""));
  CHECK_FALSE(match_pattern("", "x"));
  CHECK(match_pattern("%%b%", "b"));
  CHECK(match_pattern("C:\\temp\\%", "c:\\TEMP\\f.txt"));  // backslash is literal
  CHECK_FALSE(match_pattern("abc", "ab"));
  CHECK(match_pattern("%a%a%", "xaxax"));
}

TEST_CASE("match_pattern agrees with a regex translation on random inputs") {
  std::mt19937_64 rng(20250714);
  const std::string pattern_chars = "ab%_\\.:e ";
  const std::string text_chars = "abAB\\.: e";
  for (int i = 0; i < 4000; ++i) {
    std::string pattern, text;
    for (int j = std::uniform_int_distribution<int>(0, 8)(rng); j > 0; --j) {
      pattern += pattern_chars[std::uniform_int_distribution<std::size_t>(
          0, pattern_chars.size() - 1)(rng)];
    }
    for (int j = std::uniform_int_distribution<int>(0, 10)(rng); j > 0; --j) {
      text += text_chars[std::uniform_int_distribution<std::size_t>(
          0, text_chars.size() - 1)(rng)];
    }
    bool got = match_pattern(pattern, text);
    bool want = oracle::like(pattern, text);
    if (got != want) {
      CAPTURE(pattern);
      CAPTURE(text);
    }
    REQUIRE(got == want);
  }
}

TEST_CASE("compile_rule rejects unknown fields and empty rules") {
  CHECK_THROWS_WITH_AS(
      compile_rule(R"({"rule_id":"r","severity":"low","parts":[)"
                   R"({"kind":"file","where":{"eq":{"field":"no_such_column","value":"x"}}}]})"),
      doctest::Contains("UnknownField"), RuleFormatException);
  CHECK_THROWS_WITH_AS(
      compile_rule(R"({"rule_id":"r","severity":"low","parts":[]})"),
      doctest::Contains("EmptyRule"), RuleFormatException);
  CHECK_THROWS_AS(compile_rule("not json"), RuleFormatException);
}

TEST_CASE("compiled rules evaluate like hand-built predicate trees") {
  std::string text = R"({
    "rule_id": "ppam-writes",
    "severity": "high",
    "description": "Office add-in written to disk",
    "parts": [
      {"kind": "file",
       "where": {"all": [
         {"eq": {"field": "action", "value": "FILE_WRITE"}},
         {"like": {"field": "target_path", "pattern": "%.ppam"}}
       ]}}
    ]
  })";
  DetectionRule rule = compile_rule(text);
  CHECK(rule.rule_id == "ppam-writes");
  CHECK(rule.severity == Severity::High);
  REQUIRE(rule.parts.size() == 1);

  std::istringstream log(generate_reference_log());
  auto store = ingest_log(log).store;
  auto hits = eval_rule(rule, store);
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].event.file().md5 == "d946e3e94fec670f9e47aca186ecaabe");
}

TEST_CASE("load_rules_dir loads every file and rejects duplicate ids") {
  std::string dir = "/tmp/sentinel_rules_test";
  std::filesystem::create_directories(dir);
  std::string doc = R"({"rule_id":"dup","severity":"low","parts":[)"
                    R"({"kind":"socket","where":{"eq":{"field":"remote_port","value":19821}}}]})";
  std::ofstream(dir + "/a.json") << doc;
  std::ofstream(dir + "/readme.txt") << "not a rule";  // non-json files skipped
  auto rules = load_rules_dir(dir);
  REQUIRE(rules.size() == 1);
  CHECK(rules[0].rule_id == "dup");

  std::ofstream(dir + "/b.json") << doc;
  CHECK_THROWS_WITH_AS(load_rules_dir(dir), doctest::Contains("DuplicateRuleId"),
                       RuleFormatException);
  std::filesystem::remove_all(dir);
}

TEST_CASE("the shipped example rule compiles and fires on the recorded log") {
  auto rules = load_rules_dir(std::string(SENTINEL_SOURCE_DIR) + "/data/rules");
  REQUIRE(rules.size() == 1);
  std::istringstream log(generate_reference_log());
  auto store = ingest_log(log).store;
  CHECK(eval_rule(rules[0], store).size() == 1);
}

TEST_CASE("the built-in campaign rule matches the recorded log exactly") {
  std::istringstream log(generate_reference_log());
  auto store = ingest_log(log).store;
  auto detections = eval_rule(builtin_crimson_rat_rule(), store);

  auto expected = oracle::crimson_rat_scan(store);
  REQUIRE(detections.size() == expected.size());
  for (std::size_t i = 0; i < detections.size(); ++i) {
    // The oracle walks positions in store order; detections are ordered by
    // (time, position, part), which coincides on this log.
    CHECK(detections[i].rule_id == "crimson-rat-sindoor");
    CHECK(detections[i].severity == Severity::Critical);
  }

  std::size_t file_hits = 0, socket_hits = 0;
  for (const auto& d : detections) {
    if (d.event.kind == EventKind::File) ++file_hits;
    if (d.event.kind == EventKind::Socket) ++socket_hits;
    // The filtered :443 connects must never surface.
    if (d.event.kind == EventKind::Socket) {
      CHECK(d.event.socket().remote_port == 19821);
    }
  }
  CHECK(file_hits == 9);
  CHECK(socket_hits == 2);
}

TEST_CASE("rule parts match independently: the union is order-free") {
  DetectionRule rule = builtin_crimson_rat_rule();
  std::istringstream log(generate_reference_log());
  auto store = ingest_log(log).store;

  auto full = eval_rule(rule, store);

  std::size_t sum = 0;
  for (std::size_t p = 0; p < rule.parts.size(); ++p) {
    DetectionRule single = rule;
    single.parts = {rule.parts[p]};
    sum += eval_rule(single, store).size();
  }
  CHECK(sum == full.size());
}

TEST_CASE("negative controls stay quiet") {
  std::istringstream log(generate_reference_log());
  auto store = ingest_log(log).store;
  DetectionRule rule = builtin_crimson_rat_rule();

  for (const auto& d : eval_rule(rule, store)) {
    if (d.event.kind == EventKind::File) {
      // Temp-file staging writes never satisfy any branch.
      CHECK(d.event.file().target_path.find("wct4") == std::string::npos);
    }
  }

  EventStore empty;
  CHECK(eval_rule(rule, empty).empty());
}

TEST_CASE("benign traffic produces zero detections") {
  ScenarioSpec spec;
  spec.drop = spec.rename = spec.exec = spec.c2 = spec.phishing_connects = false;
  spec.noise_events = 2000;
  spec.jitter_seed = 99;
  std::istringstream log(generate_scenario(spec));
  auto store = ingest_log(log).store;
  CHECK(eval_rule(builtin_crimson_rat_rule(), store).empty());
}

TEST_CASE("parallel evaluation equals the serial reference") {
  for (std::uint64_t seed : {1ull, 7ull, 1234ull}) {
    ScenarioSpec spec;
    spec.noise_events = 6000;
    spec.jitter_seed = seed;
    std::istringstream log(generate_scenario(spec));
    auto store = ingest_log(log).store;

    auto serial = eval_rule_serial(builtin_crimson_rat_rule(), store);
    auto parallel = eval_rule(builtin_crimson_rat_rule(), store);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
      CHECK(serial[i].event == parallel[i].event);
      CHECK(serial[i].matched_part == parallel[i].matched_part);
    }
  }
}

TEST_CASE("detection lines carry the event fields downstream tools need") {
  std::istringstream log(generate_reference_log());
  auto store = ingest_log(log).store;
  auto detections = eval_rule(builtin_crimson_rat_rule(), store);
  REQUIRE(!detections.empty());
  const Detection& last = detections.back();
  std::string line = detection_to_json_line(last);
  CHECK(line.find("\"rule_id\":\"crimson-rat-sindoor\"") != std::string::npos);
  CHECK(line.find("\"severity\":\"critical\"") != std::string::npos);
  if (last.event.kind == EventKind::Socket) {
    CHECK(line.find("93.127.133.58:19821") != std::string::npos);
  }
}
