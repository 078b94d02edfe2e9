#include "sentinel/chain_analyzer.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace sentinel {

using nlohmann::json;

namespace {

std::string dirname_of(const std::string& path) {
  auto pos = path.find_last_of("\\/");
  return pos == std::string::npos ? std::string{} : path.substr(0, pos);
}

std::string basename_of(const std::string& path) {
  auto pos = path.find_last_of("\\/");
  return pos == std::string::npos ? path : path.substr(pos + 1);
}

std::string extension_of(const std::string& path) {
  std::string base = basename_of(path);
  auto dot = base.find_last_of('.');
  return dot == std::string::npos ? std::string{} : to_lower_ascii(base.substr(dot + 1));
}

bool contains_ci(const std::string& haystack, const std::string& needle) {
  return to_lower_ascii(haystack).find(to_lower_ascii(needle)) != std::string::npos;
}

}  // namespace

std::string to_string(Stage s) {
  switch (s) {
    case Stage::DecoyOpen: return "decoy_open";
    case Stage::PayloadDrop: return "payload_drop";
    case Stage::PayloadRename: return "payload_rename";
    case Stage::PayloadExec: return "payload_exec";
    case Stage::C2Connect: return "c2_connect";
  }
  return "?";
}

const ProcessGraph::Node* ProcessGraph::find(const std::string& guid) const {
  auto it = nodes.find(to_upper_ascii(guid));
  return it == nodes.end() ? nullptr : &it->second;
}

ProcessGraph build_process_graph(const EventStore& store) {
  ProcessGraph graph;

  auto node_for = [&](const std::string& guid, bool as_reference) -> ProcessGraph::Node& {
    std::string key = to_upper_ascii(guid);
    auto [it, inserted] = graph.nodes.try_emplace(key);
    if (inserted) {
      it->second.guid = guid;
      it->second.external = as_reference;
    } else if (!as_reference) {
      it->second.external = false;
    }
    return it->second;
  };

  for (std::size_t pos : store.by_kind(EventKind::Process)) {
    const ProcessEvent& p = store.at(pos).process();
    if (p.action == ProcessAction::ProcCreate) {
      auto& node = node_for(p.process_guid, false);
      node.pid = p.pid;
      node.path = p.path;
      node.cmdline = p.cmdline;
      node.user = p.user;
      node.create_time = p.time;
      node.create_eid = p.eid;
      node.parent_guid = p.parent_process_guid;

      auto& parent = node_for(p.parent_process_guid, true);
      if (parent.external && parent.pid == 0) {
        parent.pid = p.parent_pid;
      }
      std::string parent_key = to_upper_ascii(p.parent_process_guid);
      std::string child_key = to_upper_ascii(p.process_guid);
      auto& children = graph.edges[parent_key];
      if (std::find(children.begin(), children.end(), child_key) == children.end()) {
        children.push_back(child_key);
      }
    } else {
      node_for(p.process_guid, false).exit_time = p.time;
    }
  }

  // Corrupt telemetry can close a lineage loop; drop the closing edge.
  std::map<std::string, int> color;  // 0 white, 1 grey, 2 black
  for (const auto& [key, _] : graph.nodes) {
    if (color[key] != 0) continue;
    std::vector<std::pair<std::string, std::size_t>> stack{{key, 0}};
    color[key] = 1;
    while (!stack.empty()) {
      auto& [cur, idx] = stack.back();
      auto eit = graph.edges.find(cur);
      if (eit == graph.edges.end() || idx >= eit->second.size()) {
        color[cur] = 2;
        stack.pop_back();
        continue;
      }
      std::string child = eit->second[idx++];
      if (color[child] == 1) {
        graph.warnings.push_back("CycleDetected: dropped edge " + cur + " -> " + child);
        eit->second.erase(std::remove(eit->second.begin(), eit->second.end(), child),
                          eit->second.end());
        idx = 0;  // iterator invalidated
        continue;
      }
      if (color[child] == 0) {
        color[child] = 1;
        stack.emplace_back(child, 0);
      }
    }
  }
  return graph;
}

std::variant<AttackChain, SeedNotFound> forward_track(const std::string& seed_hash,
                                                      const EventStore& store,
                                                      const ProcessGraph& graph,
                                                      int max_depth) {
  const std::string seed = to_lower_ascii(seed_hash);

  // (a) file events bearing the hash.
  std::set<std::string> candidate_keys;
  std::vector<std::string> hashed_filenames;
  for (std::size_t pos : store.by_kind(EventKind::File)) {
    const FileEvent& f = store.at(pos).file();
    if (f.md5 == seed || f.sha256 == seed) {
      candidate_keys.insert(to_upper_ascii(f.process_guid));
      std::string base = basename_of(f.target_path);
      if (!base.empty()) hashed_filenames.push_back(base);
    }
  }
  if (hashed_filenames.empty()) {
    return SeedNotFound{seed};
  }
  // (b) processes whose cmdline names the hashed file.
  for (std::size_t pos : store.by_kind(EventKind::Process)) {
    const ProcessEvent& p = store.at(pos).process();
    if (p.action != ProcessAction::ProcCreate) continue;
    for (const auto& name : hashed_filenames) {
      if (contains_ci(p.cmdline, name)) {
        candidate_keys.insert(to_upper_ascii(p.process_guid));
        break;
      }
    }
  }

  // Root at the earliest candidate process.
  const ProcessGraph::Node* root = nullptr;
  for (const auto& key : candidate_keys) {
    auto it = graph.nodes.find(key);
    if (it == graph.nodes.end()) continue;
    const auto& node = it->second;
    std::int64_t t = node.create_time.value_or(INT64_MAX);
    if (!root || t < root->create_time.value_or(INT64_MAX)) {
      root = &node;
    }
  }
  if (!root) {
    return SeedNotFound{seed};
  }

  AttackChain chain;
  chain.seed_kind = AttackChain::SeedKind::Hash;
  chain.seed_value = seed;

  // Descendant closure, breadth first.
  std::set<std::string> closure;
  std::deque<std::pair<std::string, int>> queue{{to_upper_ascii(root->guid), 0}};
  while (!queue.empty()) {
    auto [key, depth] = queue.front();
    queue.pop_front();
    if (!closure.insert(key).second) continue;
    chain.processes.push_back(graph.nodes.at(key));
    if (depth >= max_depth) continue;
    auto eit = graph.edges.find(key);
    if (eit == graph.edges.end()) continue;
    for (const auto& child : eit->second) {
      queue.emplace_back(child, depth + 1);
    }
  }

  // Attach the closure's file/socket events in time order.
  std::map<std::string, int> eid_counts;
  std::int64_t first = INT64_MAX, last = INT64_MIN;
  for (std::size_t pos : store.by_time()) {
    const Event& e = store.at(pos);
    if (e.kind == EventKind::Process) continue;
    if (!closure.count(to_upper_ascii(e.process_guid()))) continue;
    (e.kind == EventKind::File ? chain.file_events : chain.socket_events).push_back(pos);
    if (!e.eid().empty()) ++eid_counts[e.eid()];
    first = std::min(first, e.time());
    last = std::max(last, e.time());
  }
  for (const auto& node : chain.processes) {
    if (node.create_time) {
      first = std::min(first, *node.create_time);
      last = std::max(last, *node.create_time);
    }
  }
  chain.span = {first == INT64_MAX ? 0 : first, last == INT64_MIN ? 0 : last};
  for (const auto& [eid, count] : eid_counts) {
    if (count > 1) chain.duplicate_eids.push_back(eid);
  }

  // Stage derivation.
  if (root->create_time) {
    chain.stages.push_back({Stage::DecoyOpen, {root->create_eid}, *root->create_time});
  }

  const HeuristicConfig defaults;
  auto has_ext = [](const std::string& path, const std::vector<std::string>& exts) {
    std::string ext = extension_of(path);
    return std::find(exts.begin(), exts.end(), ext) != exts.end();
  };

  const FileEvent* drop = nullptr;
  const FileEvent* rename = nullptr;
  std::vector<const FileEvent*> exec_renames;
  for (std::size_t pos : chain.file_events) {
    const FileEvent& r = store.at(pos).file();
    if (r.action != FileAction::FileRename ||
        !has_ext(r.target_path, defaults.executable_extensions)) {
      continue;
    }
    exec_renames.push_back(&r);
    if (rename) continue;
    for (std::size_t cpos : chain.file_events) {
      const FileEvent& c = store.at(cpos).file();
      if (c.action == FileAction::FileCreate && c.time <= r.time &&
          has_ext(c.target_path, defaults.image_extensions) &&
          to_upper_ascii(c.process_guid) == to_upper_ascii(r.process_guid) &&
          to_lower_ascii(dirname_of(c.target_path)) ==
              to_lower_ascii(dirname_of(r.target_path))) {
        drop = &c;
        rename = &r;
        break;
      }
    }
  }
  if (drop) chain.stages.push_back({Stage::PayloadDrop, {drop->eid}, drop->time});
  if (rename) chain.stages.push_back({Stage::PayloadRename, {rename->eid}, rename->time});

  const ProcessGraph::Node* payload = nullptr;
  for (const auto& node : chain.processes) {
    for (const FileEvent* r : exec_renames) {
      if (to_lower_ascii(node.path) == to_lower_ascii(r->target_path)) {
        payload = &node;
        break;
      }
    }
    if (payload) break;
  }
  if (payload && payload->create_time) {
    chain.stages.push_back(
        {Stage::PayloadExec, {payload->create_eid}, *payload->create_time});
  }

  const SocketEvent* c2 = nullptr;
  for (std::size_t pos : chain.socket_events) {
    const SocketEvent& s = store.at(pos).socket();
    if (s.action != SocketAction::SocketConnect) continue;
    bool from_payload =
        payload && to_upper_ascii(s.process_guid) == to_upper_ascii(payload->guid);
    if (payload ? from_payload : true) {
      c2 = &s;
      break;
    }
  }
  if (c2) chain.stages.push_back({Stage::C2Connect, {c2->eid}, c2->time});

  std::stable_sort(chain.stages.begin(), chain.stages.end(),
                   [](const StageRecord& a, const StageRecord& b) {
                     return a.time < b.time;
                   });
  return chain;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

bool is_vendor_near_miss(const std::string& component,
                         const std::vector<std::string>& vendor_names) {
  const std::string comp = to_lower_ascii(component);
  std::size_t best = SIZE_MAX;
  for (const auto& vendor : vendor_names) {
    const std::string v = to_lower_ascii(vendor);
    if (v.empty()) continue;
    std::size_t lo = v.size() > 2 ? v.size() - 2 : 1;
    std::size_t hi = std::min(comp.size(), v.size() + 2);
    for (std::size_t len = lo; len <= hi; ++len) {
      for (std::size_t start = 0; start + len <= comp.size(); ++start) {
        best = std::min(best, edit_distance(comp.substr(start, len), v));
        if (best == 0) return false;  // exact vendor name present: legit
      }
    }
  }
  return best >= 1 && best <= 2;
}

namespace {

struct FindingBuilder {
  std::vector<HeuristicFinding> findings;

  void add(std::string id, std::vector<std::string> evidence, std::string explanation,
           std::int64_t time) {
    findings.push_back({std::move(id), std::move(evidence), std::move(explanation), time});
  }
};

bool under_standard_dirs(const std::string& path) {
  std::string p = to_lower_ascii(path);
  return p.rfind("c:\\program files", 0) == 0 || p.rfind("c:\\windows", 0) == 0;
}

bool under_user_profile(const std::string& path) {
  return to_lower_ascii(path).find(":\\users\\") != std::string::npos;
}

}  // namespace

std::vector<HeuristicFinding> run_heuristics(const EventStore& store,
                                             const HeuristicConfig& config) {
  FindingBuilder out;

  auto has_ext = [&](const std::string& path, const std::vector<std::string>& exts) {
    std::string ext = extension_of(path);
    return std::find(exts.begin(), exts.end(), ext) != exts.end();
  };
  auto is_office_binary = [&](const std::string& path) {
    std::string base = to_lower_ascii(basename_of(path));
    return std::any_of(config.office_binaries.begin(), config.office_binaries.end(),
                       [&](const std::string& b) { return base == to_lower_ascii(b); });
  };

  // H1: Office binary spawns an executable outside the standard
  // program directories within the spawn window.
  if (config.enable_h1) {
    std::unordered_map<std::string, const ProcessEvent*> creates;
    for (std::size_t pos : store.by_kind(EventKind::Process)) {
      const ProcessEvent& p = store.at(pos).process();
      if (p.action == ProcessAction::ProcCreate) {
        creates.emplace(to_upper_ascii(p.process_guid), &p);
      }
    }
    for (std::size_t pos : store.by_kind(EventKind::Process)) {
      const ProcessEvent& child = store.at(pos).process();
      if (child.action != ProcessAction::ProcCreate) continue;
      auto it = creates.find(to_upper_ascii(child.parent_process_guid));
      if (it == creates.end()) continue;
      const ProcessEvent& parent = *it->second;
      std::int64_t gap = child.time - parent.time;
      if (is_office_binary(parent.path) &&
          has_ext(child.path, config.executable_extensions) &&
          !under_standard_dirs(child.path) && gap >= 0 &&
          gap <= config.spawn_window_seconds) {
        out.add("H1", {parent.eid, child.eid},
                basename_of(parent.path) + " spawned " + child.path + " after " +
                    std::to_string(gap) + " s",
                child.time);
      }
    }
  }

  // H2: rename to an executable where the same process created an
  // image-named file in the same directory beforehand.
  if (config.enable_h2) {
    std::unordered_map<std::string, const FileEvent*> last_image_create;
    for (std::size_t pos : store.by_time()) {
      const Event& e = store.at(pos);
      if (e.kind != EventKind::File) continue;
      const FileEvent& f = e.file();
      std::string key = to_upper_ascii(f.process_guid) + "|" +
                        to_lower_ascii(dirname_of(f.target_path));
      if (f.action == FileAction::FileCreate &&
          has_ext(f.target_path, config.image_extensions)) {
        last_image_create[key] = &f;
      } else if (f.action == FileAction::FileRename &&
                 has_ext(f.target_path, config.executable_extensions)) {
        auto it = last_image_create.find(key);
        if (it != last_image_create.end() && it->second->time <= f.time) {
          out.add("H2", {it->second->eid, f.eid},
                  basename_of(it->second->target_path) + " renamed to " +
                      basename_of(f.target_path),
                  f.time);
        }
      }
    }
  }

  // H3: connect to a non-well-known port from a user-profile binary.
  if (config.enable_h3) {
    for (std::size_t pos : store.by_kind(EventKind::Socket)) {
      const SocketEvent& s = store.at(pos).socket();
      if (s.action != SocketAction::SocketConnect) continue;
      bool well_known = std::find(config.well_known_ports.begin(),
                                  config.well_known_ports.end(),
                                  s.remote_port) != config.well_known_ports.end();
      if (!well_known && under_user_profile(s.process_name)) {
        out.add("H3", {s.eid},
                basename_of(s.process_name) + " connected to " + s.remote_address + ":" +
                    std::to_string(s.remote_port),
                s.time);
      }
    }
  }

  // H4: directory component a near-miss of a trusted vendor name.
  if (config.enable_h4) {
    struct DirHit {
      std::vector<std::string> evidence;
      std::int64_t first_time = INT64_MAX;
      std::string display;
    };
    std::map<std::string, DirHit> hits;
    auto scan = [&](const std::string& path, const Event& e) {
      std::string dir = dirname_of(path);
      std::size_t start = 0;
      while (start <= dir.size()) {
        std::size_t sep = dir.find('\\', start);
        std::string comp = dir.substr(start, sep == std::string::npos ? sep : sep - start);
        if (!comp.empty() && is_vendor_near_miss(comp, config.vendor_names)) {
          auto& hit = hits[to_lower_ascii(comp)];
          hit.display = comp;
          hit.evidence.push_back(e.eid());
          hit.first_time = std::min(hit.first_time, e.time());
        }
        if (sep == std::string::npos) break;
        start = sep + 1;
      }
    };
    for (std::size_t pos : store.by_time()) {
      const Event& e = store.at(pos);
      switch (e.kind) {
        case EventKind::Process: scan(e.process().path, e); break;
        case EventKind::File:
          scan(e.file().target_path, e);
          scan(e.file().process_name, e);
          break;
        case EventKind::Socket: scan(e.socket().process_name, e); break;
      }
    }
    for (auto& [key, hit] : hits) {
      out.add("H4", hit.evidence,
              "directory \"" + hit.display + "\" is a near-miss of a trusted vendor name",
              hit.first_time);
    }
  }

  std::stable_sort(out.findings.begin(), out.findings.end(),
                   [](const HeuristicFinding& a, const HeuristicFinding& b) {
                     return std::tie(a.time, a.heuristic_id) <
                            std::tie(b.time, b.heuristic_id);
                   });
  return out.findings;
}

namespace {

json event_to_json(const Event& e) {
  json obj = json::object();
  obj["table_name"] = e.table_name;
  for (const auto& field : schema_fields(e.kind)) {
    obj[field] = *get_field(e, field);
  }
  obj["utc_time"] = format_utc(e.time());
  return obj;
}

}  // namespace

std::string chain_to_json(const AttackChain& chain, const EventStore& store) {
  json doc;
  doc["seed"] = {{"kind", chain.seed_kind == AttackChain::SeedKind::Hash ? "hash" : "guid"},
                 {"value", chain.seed_value}};
  doc["processes"] = json::array();
  for (const auto& node : chain.processes) {
    json n = {{"process_guid", node.guid}, {"pid", node.pid},      {"path", node.path},
              {"cmdline", node.cmdline},   {"user", node.user},    {"external", node.external},
              {"parent_process_guid", node.parent_guid}};
    if (node.create_time) n["create_time"] = *node.create_time;
    if (node.exit_time) n["exit_time"] = *node.exit_time;
    doc["processes"].push_back(std::move(n));
  }
  doc["file_events"] = json::array();
  for (std::size_t pos : chain.file_events) {
    doc["file_events"].push_back(event_to_json(store.at(pos)));
  }
  doc["socket_events"] = json::array();
  for (std::size_t pos : chain.socket_events) {
    doc["socket_events"].push_back(event_to_json(store.at(pos)));
  }
  doc["stages"] = json::array();
  for (const auto& s : chain.stages) {
    doc["stages"].push_back({{"stage", to_string(s.stage)},
                             {"time", s.time},
                             {"utc_time", format_utc(s.time)},
                             {"evidence", s.evidence}});
  }
  doc["span"] = {{"first", chain.span.first}, {"last", chain.span.second}};
  doc["duplicate_eids"] = chain.duplicate_eids;
  return doc.dump(2);
}

std::string chain_to_text(const AttackChain& chain, const EventStore& store) {
  // Depth per process, following the chain's lineage order.
  std::map<std::string, int> depth;
  for (const auto& node : chain.processes) {
    std::string key = to_upper_ascii(node.guid);
    auto pit = depth.find(to_upper_ascii(node.parent_guid));
    depth[key] = pit == depth.end() ? 0 : pit->second + 1;
  }

  struct Line {
    std::int64_t time;
    int order;
    std::string text;
  };
  std::vector<Line> lines;
  int order = 0;
  auto indent = [&](const std::string& guid) {
    auto it = depth.find(to_upper_ascii(guid));
    return std::string(static_cast<std::size_t>(it == depth.end() ? 0 : it->second) * 2,
                       ' ');
  };

  for (const auto& node : chain.processes) {
    if (!node.create_time) continue;
    lines.push_back({*node.create_time, order++,
                     indent(node.guid) + format_utc(*node.create_time) + " [process] " +
                         "PROC_CREATE pid " + std::to_string(node.pid) + " " + node.path});
  }
  for (std::size_t pos : chain.file_events) {
    const FileEvent& f = store.at(pos).file();
    lines.push_back({f.time, order++,
                     indent(f.process_guid) + format_utc(f.time) + " [file] " +
                         to_string(f.action) + " " + f.target_path});
  }
  for (std::size_t pos : chain.socket_events) {
    const SocketEvent& s = store.at(pos).socket();
    lines.push_back({s.time, order++,
                     indent(s.process_guid) + format_utc(s.time) + " [socket] " +
                         to_string(s.action) + " " + s.remote_address + ":" +
                         std::to_string(s.remote_port)});
  }
  std::stable_sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
    return std::tie(a.time, a.order) < std::tie(b.time, b.order);
  });

  std::ostringstream text;
  for (const auto& l : lines) text << l.text << '\n';
  if (!chain.duplicate_eids.empty()) {
    text << "note: duplicate event IDs kept (possible logging artifact):";
    for (const auto& eid : chain.duplicate_eids) text << ' ' << eid;
    text << '\n';
  }
  return text.str();
}

}  // namespace sentinel
