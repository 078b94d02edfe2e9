#include "sentinel/report.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

#include <json.hpp>

namespace sentinel {

using nlohmann::json;

namespace {

json detection_json(const Detection& d) {
  return json::parse(detection_to_json_line(d));
}

json finding_json(const HeuristicFinding& f) {
  return {{"heuristic_id", f.heuristic_id},
          {"evidence", f.evidence},
          {"explanation", f.explanation},
          {"time", f.time},
          {"utc_time", format_utc(f.time)}};
}

}  // namespace

std::string RunReport::to_json() const {
  json doc;
  doc["schema_version"] = "1";
  doc["command"] = command;
  doc["inputs"] = json::object();
  for (const auto& [k, v] : inputs) doc["inputs"][k] = v;
  doc["exit_code"] = exit_code;
  doc["stats"] = {{"accepted", stats.accepted},
                  {"rejected", stats.rejected.size()},
                  {"skipped", stats.skipped},
                  {"duration_ms", stats.duration_ms}};
  if (!stats.rejected.empty()) {
    doc["stats"]["rejects"] = json::array();
    for (const auto& [line, err] : stats.rejected) {
      doc["stats"]["rejects"].push_back({{"line", line}, {"error", err}});
    }
  }
  doc["detections"] = json::array();
  for (const auto& d : detections) doc["detections"].push_back(detection_json(d));
  doc["findings"] = json::array();
  for (const auto& f : findings) doc["findings"].push_back(finding_json(f));
  if (!ioc_hits.empty() && store) {
    doc["ioc_hits"] = json::array();
    for (const auto& [pos, hits] : ioc_hits) {
      const Event& e = store->at(pos);
      json entry = {{"eid", e.eid()},
                    {"table_name", e.table_name},
                    {"utc_time", format_utc(e.time())},
                    {"matches", json::array()}};
      for (const auto& hit : hits) {
        entry["matches"].push_back(
            {{"field", to_string(hit.field_matched)}, {"value", hit.value}});
      }
      doc["ioc_hits"].push_back(std::move(entry));
    }
  }
  if (chain && store) {
    doc["chain"] = json::parse(chain_to_json(*chain, *store));
  }
  if (!messages.empty()) doc["messages"] = messages;
  return doc.dump(2);
}

std::string RunReport::to_text() const {
  std::ostringstream out;
  out << "command: " << command << '\n';
  for (const auto& [k, v] : inputs) out << "  " << k << ": " << v << '\n';
  out << "ingest: accepted " << stats.accepted << ", rejected " << stats.rejected.size();
  if (stats.skipped > 0) out << ", skipped " << stats.skipped;
  out << '\n';
  for (const auto& [line, err] : stats.rejected) {
    out << "  line " << line << ": " << err << '\n';
  }
  if (!detections.empty()) {
    out << "detections: " << detections.size() << '\n';
    for (const auto& d : detections) out << "  " << detection_to_json_line(d) << '\n';
  }
  if (!ioc_hits.empty() && store) {
    out << "ioc hits: " << ioc_hits.size() << " events\n";
    for (const auto& [pos, hits] : ioc_hits) {
      const Event& e = store->at(pos);
      out << "  " << format_utc(e.time()) << ' ' << e.table_name << ':';
      for (const auto& hit : hits) {
        out << ' ' << to_string(hit.field_matched) << '=' << hit.value;
      }
      out << '\n';
    }
  }
  if (!findings.empty()) {
    out << "findings: " << findings.size() << '\n';
    for (const auto& f : findings) {
      out << "  " << f.heuristic_id << ' ' << format_utc(f.time) << ' ' << f.explanation
          << '\n';
    }
  }
  if (chain && store) {
    out << "attack chain (" << chain->processes.size() << " processes):\n";
    out << chain_to_text(*chain, *store);
    out << "stages:\n";
    for (const auto& s : chain->stages) {
      out << "  " << to_string(s.stage) << " @ " << format_utc(s.time) << '\n';
    }
  }
  for (const auto& m : messages) out << m << '\n';
  out << "exit: " << exit_code << '\n';
  return out.str();
}

RunReport run_ingest(const std::string& log_path, bool stats) {
  RunReport report;
  report.command = "ingest";
  report.inputs.emplace_back("log", log_path);
  try {
    auto result = ingest_log_file(log_path);
    report.stats = result.report;
    report.store = std::move(result.store);
    if (stats) {
      for (const auto& [kind, count] : report.store->stats().by_kind) {
        report.messages.push_back(table_name_for(kind) + ": " + std::to_string(count));
      }
    }
    report.exit_code = 0;
  } catch (const std::exception& e) {
    report.messages.push_back(e.what());
    report.exit_code = 2;
  }
  return report;
}

RunReport run_detect(const DetectOptions& options) {
  RunReport report;
  report.command = "detect";
  report.inputs.emplace_back("log", options.log_path);
  try {
    std::vector<DetectionRule> rules;
    rules.push_back(builtin_crimson_rat_rule());
    if (options.rules_dir) {
      report.inputs.emplace_back("rules", *options.rules_dir);
      for (auto& rule : load_rules_dir(*options.rules_dir)) {
        if (rule.rule_id == rules.front().rule_id) {
          throw RuleFormatException("DuplicateRuleId(\"" + rule.rule_id +
                                    "\") shadows the built-in rule");
        }
        rules.push_back(std::move(rule));
      }
    }

    IocSet iocs;
    std::optional<std::string> ioc_path = options.iocs_path;
    if (!ioc_path) {
      if (const char* env = std::getenv("SENTINEL_IOC_PATH")) ioc_path = env;
    }
    if (ioc_path) {
      report.inputs.emplace_back("iocs", *ioc_path);
      iocs = load_iocs_file(*ioc_path);
    } else {
      iocs = builtin_iocs();
    }

    auto result = ingest_log_file(options.log_path);
    report.stats = result.report;
    report.store = std::move(result.store);

    for (const auto& rule : rules) {
      auto detections = eval_rule(rule, *report.store);
      report.detections.insert(report.detections.end(),
                               std::make_move_iterator(detections.begin()),
                               std::make_move_iterator(detections.end()));
    }
    std::stable_sort(report.detections.begin(), report.detections.end(),
                     [](const Detection& a, const Detection& b) {
                       return std::make_pair(a.event.time(), a.rule_id) <
                              std::make_pair(b.event.time(), b.rule_id);
                     });

    for (std::size_t pos = 0; pos < report.store->size(); ++pos) {
      auto hits = match_event(report.store->at(pos), iocs);
      if (!hits.empty()) report.ioc_hits.emplace_back(pos, std::move(hits));
    }

    report.exit_code = (report.detections.empty() && report.ioc_hits.empty()) ? 0 : 1;
  } catch (const std::exception& e) {
    report.messages.push_back(e.what());
    report.exit_code = 2;
  }
  return report;
}

RunReport run_trace(const std::string& log_path, const std::string& seed_hash) {
  RunReport report;
  report.command = "trace";
  report.inputs.emplace_back("log", log_path);
  report.inputs.emplace_back("seed", seed_hash);
  try {
    auto result = ingest_log_file(log_path);
    report.stats = result.report;
    report.store = std::move(result.store);
    auto graph = build_process_graph(*report.store);
    for (const auto& w : graph.warnings) report.messages.push_back(w);
    auto tracked = forward_track(seed_hash, *report.store, graph);
    if (auto* not_found = std::get_if<SeedNotFound>(&tracked)) {
      report.messages.push_back("seed not found: " + not_found->seed);
      report.exit_code = 0;
    } else {
      report.chain = std::move(std::get<AttackChain>(tracked));
      report.exit_code = 1;
    }
  } catch (const std::exception& e) {
    report.messages.push_back(e.what());
    report.exit_code = 2;
  }
  return report;
}

RunReport run_heuristics_scan(const std::string& log_path) {
  RunReport report;
  report.command = "heuristics";
  report.inputs.emplace_back("log", log_path);
  try {
    auto result = ingest_log_file(log_path);
    report.stats = result.report;
    report.store = std::move(result.store);
    report.findings = run_heuristics(*report.store);
    report.exit_code = report.findings.empty() ? 0 : 1;
  } catch (const std::exception& e) {
    report.messages.push_back(e.what());
    report.exit_code = 2;
  }
  return report;
}

}  // namespace sentinel
