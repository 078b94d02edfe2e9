#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sentinel/chain_analyzer.hpp"
#include "sentinel/ioc_store.hpp"
#include "sentinel/log_ingest.hpp"
#include "sentinel/rule_engine.hpp"

namespace sentinel {

/// Exit contract: 0 clean, 1 detections/findings present, 2 operational error.
struct RunReport {
  std::string command;
  std::vector<std::pair<std::string, std::string>> inputs;  // (name, value)
  std::vector<Detection> detections;
  std::vector<std::pair<std::size_t, std::vector<IocHit>>> ioc_hits;  // (position, hits)
  std::vector<HeuristicFinding> findings;
  std::optional<AttackChain> chain;
  std::optional<EventStore> store;
  IngestReport stats;
  int exit_code = 0;
  std::vector<std::string> messages;

  std::string to_json() const;
  std::string to_text() const;
};

struct DetectOptions {
  std::string log_path;
  std::optional<std::string> rules_dir;
  std::optional<std::string> iocs_path;  // SENTINEL_IOC_PATH honored when unset
};

RunReport run_ingest(const std::string& log_path, bool stats);
RunReport run_detect(const DetectOptions& options);
RunReport run_trace(const std::string& log_path, const std::string& seed_hash);
RunReport run_heuristics_scan(const std::string& log_path);

}  // namespace sentinel
