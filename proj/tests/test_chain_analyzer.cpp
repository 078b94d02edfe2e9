#include <doctest.h>

#include <sstream>

#include "sentinel/campaign_simulator.hpp"
#include "sentinel/chain_analyzer.hpp"

using namespace sentinel;

namespace {

EventStore reference_store() {
  std::istringstream log(generate_reference_log());
  return ingest_log(log).store;
}

}  // namespace

TEST_CASE("the process graph links parent and child by GUID") {
  auto store = reference_store();
  auto graph = build_process_graph(store);

  const auto* parent = graph.find(kPowerpntGuid);
  const auto* child = graph.find(kRatGuid);
  REQUIRE(parent != nullptr);
  REQUIRE(child != nullptr);
  CHECK(child->parent_guid == kPowerpntGuid);
  CHECK(parent->pid == 10476);
  CHECK(child->pid == 2192);
  CHECK(!parent->external);

  // explorer never has its own PROC_CREATE record -> external node.
  const auto* shell = graph.find(kExplorerGuid);
  REQUIRE(shell != nullptr);
  CHECK(shell->external);

  const auto& children = graph.edges.at(to_upper_ascii(kPowerpntGuid));
  CHECK(std::find(children.begin(), children.end(), to_upper_ascii(kRatGuid)) !=
        children.end());
  CHECK(graph.warnings.empty());
}

TEST_CASE("an empty store yields an empty graph") {
  EventStore store;
  auto graph = build_process_graph(store);
  CHECK(graph.nodes.empty());
  CHECK(graph.edges.empty());
}

TEST_CASE("a parent cycle is broken with a warning, not a hang") {
  auto events = reference_events();
  // Point POWERPNT's parent at its own child.
  for (Event& e : events) {
    if (e.kind == EventKind::Process && e.process_guid() == kPowerpntGuid) {
      std::get<ProcessEvent>(e.payload).parent_process_guid = kRatGuid;
    }
  }
  EventStore::Builder b;
  for (Event& e : events) b.add(std::move(e));
  auto store = std::move(b).seal();
  auto graph = build_process_graph(store);
  REQUIRE(!graph.warnings.empty());
  CHECK(graph.warnings.front().find("CycleDetected") != std::string::npos);
}

TEST_CASE("forward tracking from the payload hash reconstructs the chain") {
  auto store = reference_store();
  auto graph = build_process_graph(store);
  auto result = forward_track(kSampleSha256, store, graph);
  REQUIRE(std::holds_alternative<AttackChain>(result));
  const auto& chain = std::get<AttackChain>(result);

  REQUIRE(chain.processes.size() == 2);
  CHECK(chain.processes[0].guid == kPowerpntGuid);
  CHECK(chain.processes[1].guid == kRatGuid);

  REQUIRE(chain.stages.size() == 5);
  CHECK(chain.stages[0].stage == Stage::DecoyOpen);
  CHECK(chain.stages[0].time == 1752503624);
  CHECK(chain.stages[1].stage == Stage::PayloadDrop);
  CHECK(chain.stages[1].time == 1752503629);
  CHECK(chain.stages[2].stage == Stage::PayloadRename);
  CHECK(chain.stages[2].time == 1752503629);
  CHECK(chain.stages[3].stage == Stage::PayloadExec);
  CHECK(chain.stages[3].time == 1752503629);
  CHECK(chain.stages[4].stage == Stage::C2Connect);
  CHECK(chain.stages[4].time == 1752503675);

  CHECK(chain.span.first == 1752503624);
  CHECK(chain.span.second >= 1752503675);

  // Both C2 connects reuse one recorded eid; the chain keeps both events
  // and flags the collision.
  CHECK(chain.socket_events.size() == 5);
  REQUIRE(chain.duplicate_eids.size() == 1);
  CHECK(chain.duplicate_eids[0] == kEidC2Connect);
}

TEST_CASE("an unknown seed reports SeedNotFound") {
  auto store = reference_store();
  auto graph = build_process_graph(store);
  auto result = forward_track(std::string(64, 'f'), store, graph);
  REQUIRE(std::holds_alternative<SeedNotFound>(result));
  CHECK(std::get<SeedNotFound>(result).seed == std::string(64, 'f'));
}

TEST_CASE("every chained event belongs to a chain process") {
  auto store = reference_store();
  auto graph = build_process_graph(store);
  auto chain = std::get<AttackChain>(forward_track(kSampleSha256, store, graph));

  std::vector<std::string> guids;
  for (const auto& p : chain.processes) guids.push_back(to_upper_ascii(p.guid));
  auto in_chain = [&](const Event& e) {
    return std::find(guids.begin(), guids.end(), to_upper_ascii(e.process_guid())) !=
           guids.end();
  };
  for (std::size_t pos : chain.file_events) CHECK(in_chain(store.at(pos)));
  for (std::size_t pos : chain.socket_events) CHECK(in_chain(store.at(pos)));

  // Attached events arrive in time order.
  for (std::size_t i = 1; i < chain.file_events.size(); ++i) {
    CHECK(store.at(chain.file_events[i - 1]).time() <=
          store.at(chain.file_events[i]).time());
  }
}

TEST_CASE("the recorded log triggers exactly the expected heuristics") {
  auto findings = run_heuristics(reference_store());
  REQUIRE(findings.size() == 5);
  CHECK(findings[0].heuristic_id == "H4");
  CHECK(findings[1].heuristic_id == "H1");
  CHECK(findings[2].heuristic_id == "H2");
  CHECK(findings[3].heuristic_id == "H3");
  CHECK(findings[4].heuristic_id == "H3");
  CHECK(findings[0].explanation.find("0ffice360-48") != std::string::npos);
  CHECK(findings[1].explanation.find("after 5 s") != std::string::npos);
  CHECK(findings[2].explanation.find("WEISTE.jpg") != std::string::npos);
  CHECK(findings[3].explanation.find("19821") != std::string::npos);
  // Sorted by (time, heuristic id).
  for (std::size_t i = 1; i < findings.size(); ++i) {
    CHECK(std::make_pair(findings[i - 1].time, findings[i - 1].heuristic_id) <=
          std::make_pair(findings[i].time, findings[i].heuristic_id));
  }
}

TEST_CASE("heuristics can be disabled individually") {
  auto store = reference_store();
  HeuristicConfig cfg;
  cfg.enable_h3 = false;
  auto findings = run_heuristics(store, cfg);
  for (const auto& f : findings) CHECK(f.heuristic_id != "H3");
  CHECK(findings.size() == 3);

  HeuristicConfig none;
  none.enable_h1 = none.enable_h2 = none.enable_h3 = none.enable_h4 = false;
  CHECK(run_heuristics(store, none).empty());
}

TEST_CASE("a rename across directories does not look like extension swapping") {
  auto events = reference_events();
  for (Event& e : events) {
    if (e.kind == EventKind::File &&
        e.file().action == FileAction::FileRename) {
      std::get<FileEvent>(e.payload).target_path =
          "D:\\elsewhere\\jnmxrvt hcsm.exe";
    }
  }
  EventStore::Builder b;
  for (Event& e : events) b.add(std::move(e));
  auto store = std::move(b).seal();
  for (const auto& f : run_heuristics(store)) CHECK(f.heuristic_id != "H2");
}

TEST_CASE("edit_distance is the classic metric") {
  CHECK(edit_distance("", "") == 0);
  CHECK(edit_distance("abc", "abc") == 0);
  CHECK(edit_distance("abc", "abd") == 1);
  CHECK(edit_distance("kitten", "sitting") == 3);
  CHECK(edit_distance("", "xyz") == 3);
  CHECK(edit_distance("0ffice", "office") == 1);
}

TEST_CASE("vendor near-miss flags lookalikes but never the real name") {
  std::vector<std::string> vendors = {"Office", "Microsoft", "Google"};
  CHECK(is_vendor_near_miss("0ffice360-48", vendors));
  CHECK(is_vendor_near_miss("Micros0ft Shared", vendors));
  CHECK_FALSE(is_vendor_near_miss("Office16", vendors));         // exact substring
  CHECK_FALSE(is_vendor_near_miss("Microsoft Office", vendors));
  CHECK_FALSE(is_vendor_near_miss("Downloads", vendors));        // too far from all
  CHECK_FALSE(is_vendor_near_miss("", vendors));
}

TEST_CASE("chain rendering names every process and stage") {
  auto store = reference_store();
  auto graph = build_process_graph(store);
  auto chain = std::get<AttackChain>(forward_track(kSampleSha256, store, graph));

  std::string text = chain_to_text(chain, store);
  CHECK(text.find("POWERPNT.EXE") != std::string::npos);
  CHECK(text.find("jnmxrvt hcsm.exe") != std::string::npos);

  std::string json_out = chain_to_json(chain, store);
  for (const char* stage :
       {"decoy_open", "payload_drop", "payload_rename", "payload_exec", "c2_connect"}) {
    CHECK(json_out.find(stage) != std::string::npos);
  }
}
