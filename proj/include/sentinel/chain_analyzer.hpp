#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sentinel/event_model.hpp"
#include "sentinel/log_ingest.hpp"

namespace sentinel {

/// Process-lineage graph keyed by uppercased process GUID.
struct ProcessGraph {
  struct Node {
    std::string guid;  // input casing
    std::int64_t pid = 0;
    std::string path;
    std::string cmdline;
    std::string user;
    std::optional<std::int64_t> create_time;
    std::optional<std::int64_t> exit_time;
    std::string parent_guid;       // empty for roots
    bool external = false;         // seen only as a parent reference
    std::string create_eid;
  };

  std::map<std::string, Node> nodes;                        // key: upper GUID
  std::map<std::string, std::vector<std::string>> edges;    // parent key -> child keys
  std::vector<std::string> warnings;

  const Node* find(const std::string& guid) const;
};

ProcessGraph build_process_graph(const EventStore& store);

enum class Stage { DecoyOpen, PayloadDrop, PayloadRename, PayloadExec, C2Connect };
std::string to_string(Stage s);

struct StageRecord {
  Stage stage;
  std::vector<std::string> evidence;  // event eids
  std::int64_t time = 0;
};

struct AttackChain {
  enum class SeedKind { Hash, Guid };
  SeedKind seed_kind = SeedKind::Hash;
  std::string seed_value;
  std::vector<ProcessGraph::Node> processes;   // root first, then lineage order
  std::vector<std::size_t> file_events;        // store positions, time order
  std::vector<std::size_t> socket_events;
  std::vector<StageRecord> stages;
  std::pair<std::int64_t, std::int64_t> span{0, 0};
  std::vector<std::string> duplicate_eids;     // shared eids kept, flagged
};

struct SeedNotFound {
  std::string seed;
};

/// Forward tracking: root at the earliest process tied to the hash,
/// close over descendants, attach their file/socket events, derive stages.
std::variant<AttackChain, SeedNotFound> forward_track(const std::string& seed_hash,
                                                      const EventStore& store,
                                                      const ProcessGraph& graph,
                                                      int max_depth = 16);

struct HeuristicConfig {
  std::int64_t spawn_window_seconds = 30;                       // H1
  std::vector<std::string> office_binaries = {"WINWORD.EXE", "POWERPNT.EXE", "EXCEL.EXE"};
  std::vector<std::string> image_extensions = {"jpg", "jpeg", "png", "gif", "bmp"};
  std::vector<std::string> executable_extensions = {"exe", "dll", "scr", "com"};
  std::vector<int> well_known_ports = {80, 443, 53, 8080};      // H3
  std::vector<std::string> vendor_names = {"Office", "Microsoft", "Windows", "Google",
                                           "Adobe"};            // H4
  bool enable_h1 = true, enable_h2 = true, enable_h3 = true, enable_h4 = true;
};

struct HeuristicFinding {
  std::string heuristic_id;  // "H1".."H4"
  std::vector<std::string> evidence;  // event eids
  std::string explanation;
  std::int64_t time = 0;

  bool operator==(const HeuristicFinding&) const = default;
};

/// H1 office-spawns-executable, H2 image-to-executable rename,
/// H3 unusual port from a user-profile binary, H4 vendor-name
/// masquerade directory. Findings ordered by (time, heuristic_id).
std::vector<HeuristicFinding> run_heuristics(const EventStore& store,
                                             const HeuristicConfig& config = {});

/// Edit distance used by the H4 near-miss check; exposed for tests.
std::size_t edit_distance(const std::string& a, const std::string& b);

/// Minimum window edit distance of any vendor name against the
/// directory component; 1..2 counts as a masquerade.
bool is_vendor_near_miss(const std::string& component,
                         const std::vector<std::string>& vendor_names);

std::string chain_to_json(const AttackChain& chain, const EventStore& store);
/// One line per event, indented by lineage depth.
std::string chain_to_text(const AttackChain& chain, const EventStore& store);

}  // namespace sentinel
