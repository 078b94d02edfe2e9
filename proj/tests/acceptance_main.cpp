// End-to-end acceptance checks. Each criterion prints one pass/fail line;
// the process exits nonzero if any criterion fails.
#include <chrono>
#include <cstdio>
#include <set>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "sentinel/campaign_simulator.hpp"
#include "sentinel/chain_analyzer.hpp"
#include "sentinel/ioc_store.hpp"
#include "sentinel/log_ingest.hpp"
#include "sentinel/rule_engine.hpp"

using namespace sentinel;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int number, const char* title, bool ok, const std::string& detail = "") {
  std::printf("[%s] criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", number, title,
              detail.empty() ? "" : " — ", detail.c_str());
  if (!ok) ++g_failures;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

EventStore reference_store() {
  std::istringstream log(generate_reference_log());
  return ingest_log(log).store;
}

// Kind-tagged serialized events, order-insensitive comparison form.
std::vector<std::string> oracle_signature(const EventStore& store) {
  std::vector<std::string> out;
  for (const auto& hit : oracle::crimson_rat_scan(store)) {
    out.push_back(serialize(store.at(hit.position)));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> engine_signature(const std::vector<Detection>& detections) {
  std::vector<std::string> out;
  for (const auto& d : detections) out.push_back(serialize(d.event));
  std::sort(out.begin(), out.end());
  return out;
}

ScenarioSpec random_spec(std::mt19937_64& rng, std::size_t max_noise) {
  ScenarioSpec spec;
  // Stage toggles form a prefix chain: drop >= rename >= exec >= c2.
  int depth = static_cast<int>(rng() % 5);
  spec.drop = depth >= 1;
  spec.rename = depth >= 2;
  spec.exec = depth >= 3;
  spec.c2 = depth >= 4;
  spec.phishing_connects = rng() % 2 == 0;
  spec.jitter_seed = rng();
  spec.noise_events = rng() % (max_noise + 1);
  spec.base_time = 1600000000 + static_cast<std::int64_t>(rng() % 200000000);
  return spec;
}

void criterion_1_golden_detections() {
  auto start = Clock::now();
  auto store = reference_store();
  auto detections = eval_rule(builtin_crimson_rat_rule(), store);
  double elapsed = seconds_since(start);

  bool ok = detections.size() == 11;
  ok = ok && engine_signature(detections) == oracle_signature(store);

  std::size_t file_hits = 0, socket_hits = 0;
  bool ppam_md5 = false, rename_hit = false, filtered_leak = false;
  for (const auto& d : detections) {
    if (d.event.kind == EventKind::File) {
      ++file_hits;
      if (d.event.file().md5 == "d946e3e94fec670f9e47aca186ecaabe" &&
          d.event.file().action == FileAction::FileCreate) {
        ppam_md5 = true;
      }
      if (d.event.file().action == FileAction::FileRename) rename_hit = true;
    } else if (d.event.kind == EventKind::Socket) {
      ++socket_hits;
      if (d.event.socket().remote_port == 443) filtered_leak = true;
    }
  }
  ok = ok && file_hits == 9 && socket_hits == 2 && ppam_md5 && rename_hit &&
       !filtered_leak && elapsed < 1.0;
  report(1, "recorded campaign yields the 11 expected detections", ok,
         std::to_string(detections.size()) + " detections in " +
             std::to_string(elapsed) + "s");
}

void criterion_2_chain_reconstruction() {
  auto store = reference_store();
  auto graph = build_process_graph(store);
  auto result = forward_track(
      "8cbd47119356081e70fc023d3ac78af560651e7932636adeca7bec96b09e0e95", store, graph);

  bool ok = std::holds_alternative<AttackChain>(result);
  if (ok) {
    const auto& chain = std::get<AttackChain>(result);
    ok = chain.processes.size() == 2 &&
         chain.processes[0].guid == "68C10DB4-5156-11F0-B8DF-0800270D762D" &&
         chain.processes[1].guid == "68C10DCA-5156-11F0-B8DF-0800270D762D" &&
         chain.stages.size() == 5;
    const Stage order[] = {Stage::DecoyOpen, Stage::PayloadDrop, Stage::PayloadRename,
                           Stage::PayloadExec, Stage::C2Connect};
    const std::int64_t times[] = {1752503624, 1752503629, 1752503629, 1752503629,
                                  1752503675};
    for (std::size_t i = 0; ok && i < 5; ++i) {
      ok = chain.stages[i].stage == order[i] && chain.stages[i].time == times[i];
    }
  }
  report(2, "payload hash forward-tracks to the two-process chain with staged timeline",
         ok);
}

void criterion_3_heuristics() {
  auto findings = run_heuristics(reference_store());
  std::size_t h1 = 0, h2 = 0, h3 = 0, h4 = 0;
  bool h1_gap = false, h3_port = false, h4_dir = false;
  for (const auto& f : findings) {
    if (f.heuristic_id == "H1") { ++h1; h1_gap = f.explanation.find("after 5 s") != std::string::npos; }
    if (f.heuristic_id == "H2") ++h2;
    if (f.heuristic_id == "H3") { ++h3; h3_port = h3_port || f.explanation.find("19821") != std::string::npos; }
    if (f.heuristic_id == "H4") { ++h4; h4_dir = f.explanation.find("0ffice360-48") != std::string::npos; }
  }
  bool ok = findings.size() == 5 && h1 == 1 && h2 == 1 && h3 == 2 && h4 == 1 &&
            h1_gap && h3_port && h4_dir;
  report(3, "behavior heuristics flag exactly the five known anomalies", ok,
         "H1=" + std::to_string(h1) + " H2=" + std::to_string(h2) +
             " H3=" + std::to_string(h3) + " H4=" + std::to_string(h4));
}

void criterion_4_scenario_fuzz() {
  auto start = Clock::now();
  std::mt19937_64 rng(0x5e0d2025);
  bool ok = true;
  int runs = 0;
  for (; runs < 220 && ok; ++runs) {
    ScenarioSpec spec = random_spec(rng, 10000);
    std::istringstream log(generate_scenario(spec));
    auto store = ingest_log(log).store;
    auto detections = eval_rule(builtin_crimson_rat_rule(), store);
    ok = engine_signature(detections) == oracle_signature(store);
  }
  double elapsed = seconds_since(start);
  ok = ok && elapsed < 60.0;
  report(4, "rule engine matches the brute-force scan on randomized scenarios", ok,
         std::to_string(runs) + " scenarios in " + std::to_string(elapsed) + "s");
}

void criterion_5_pattern_fuzz() {
  std::mt19937_64 rng(0x11CE2025);
  const std::string pattern_chars = "ab%_\\.: xE";
  const std::string text_chars = "abABxX\\.: e";
  int checked = 0;
  bool ok = true;
  for (; checked < 12000 && ok; ++checked) {
    std::string pattern, text;
    for (int j = static_cast<int>(rng() % 9); j > 0; --j) {
      pattern += pattern_chars[rng() % pattern_chars.size()];
    }
    for (int j = static_cast<int>(rng() % 12); j > 0; --j) {
      text += text_chars[rng() % text_chars.size()];
    }
    ok = match_pattern(pattern, text) == oracle::like(pattern, text);
  }
  report(5, "wildcard matcher agrees with the regex oracle", ok,
         std::to_string(checked) + " pattern/text pairs");
}

void criterion_6_round_trip() {
  std::mt19937_64 rng(0x2024F00D);
  bool ok = true;
  int runs = 0;
  for (; runs < 100 && ok; ++runs) {
    ScenarioSpec spec = random_spec(rng, 400);
    auto events = scenario_events(spec);
    std::istringstream log(generate_scenario(spec));
    auto result = ingest_log(log);
    ok = result.report.rejected.empty() && result.store.size() == events.size();
    for (std::size_t i = 0; ok && i < events.size(); ++i) {
      auto parsed = parse_event_line(serialize(events[i]));
      ok = std::holds_alternative<ParsedLine>(parsed);
      if (!ok) break;
      const auto& pl = std::get<ParsedLine>(parsed);
      auto validated = validate_event(pl.columns, pl.table_name, pl.host);
      ok = std::holds_alternative<Event>(validated) &&
           std::get<Event>(validated) == events[i];
    }
  }
  report(6, "serialization round-trips every generated event losslessly", ok,
         std::to_string(runs) + " scenarios");
}

void criterion_7_ioc_corpus() {
  const IocSet& iocs = builtin_iocs();
  static const char* expected_ips[] = {
      "93.127.133.58", "104.129.27.14", "37.221.64.134", "78.40.143.189",
      "45.141.58.224", "45.141.59.167", "45.141.58.33",  "78.40.143.98",
      "84.54.51.12",   "176.65.143.215", "45.141.59.72", "192.64.118.76"};
  bool ok = iocs.ip_addresses.size() == 12 && iocs.ports.size() == 11 &&
            iocs.md5_hashes.size() == 9 && iocs.sha256_hashes.size() == 1 &&
            iocs.domains.size() == 15 && iocs.decoy_filenames.size() == 16;
  for (const char* ip : expected_ips) ok = ok && iocs.ip_addresses.count(ip) == 1;
  ok = ok && iocs.sha256_hashes.count(
                 "8cbd47119356081e70fc023d3ac78af560651e7932636adeca7bec96b09e0e95") == 1;
  ok = ok && iocs.allowlist == std::set<std::pair<std::string, int>>{{"96.17.168.104", 443}};

  // Allowlist suppression: a fully listed destination must match nothing.
  Event probe = reference_store().at(0);
  SocketEvent s;
  s.time = 1752503675;
  s.action = SocketAction::SocketConnect;
  s.remote_address = "96.17.168.104";
  s.remote_port = 443;
  probe.kind = EventKind::Socket;
  probe.payload = s;
  ok = ok && match_event(probe, iocs).empty();
  report(7, "threat-intel corpus is complete and the allowlist suppresses", ok);
}

void criterion_8_throughput() {
  ScenarioSpec spec;
  spec.noise_events = 100000;
  spec.jitter_seed = 8;
  std::string text = generate_scenario(spec);

  auto start = Clock::now();
  std::istringstream log(text);
  auto store = ingest_log(log).store;
  auto detections = eval_rule(builtin_crimson_rat_rule(), store);
  double elapsed = seconds_since(start);

  bool ok = store.size() == 100025 && detections.size() == 11 && elapsed < 10.0;
  report(8, "100k-event log ingests and evaluates within budget", ok,
         std::to_string(store.size()) + " events in " + std::to_string(elapsed) + "s");
}

}  // namespace

int main() {
  criterion_1_golden_detections();
  criterion_2_chain_reconstruction();
  criterion_3_heuristics();
  criterion_4_scenario_fuzz();
  criterion_5_pattern_fuzz();
  criterion_6_round_trip();
  criterion_7_ioc_corpus();
  criterion_8_throughput();
  std::printf("%d of 8 criteria passed\n", 8 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
