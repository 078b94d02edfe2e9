#include "sentinel/rule_engine.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sentinel {

using nlohmann::json;

std::string to_string(Severity s) {
  switch (s) {
    case Severity::Info: return "info";
    case Severity::Low: return "low";
    case Severity::Medium: return "medium";
    case Severity::High: return "high";
    case Severity::Critical: return "critical";
  }
  return "?";
}

namespace {

char fold(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

Severity severity_from(const std::string& s) {
  if (s == "info") return Severity::Info;
  if (s == "low") return Severity::Low;
  if (s == "medium") return Severity::Medium;
  if (s == "high") return Severity::High;
  if (s == "critical") return Severity::Critical;
  throw RuleFormatException("unknown severity \"" + s + "\"");
}

}  // namespace

bool match_pattern(const std::string& pattern, const std::string& text) {
  // Two-pointer wildcard match with backtracking to the last '%'.
  std::size_t p = 0, t = 0;
  std::size_t star = std::string::npos, star_t = 0;
  while (t < text.size()) {
    if (p < pattern.size() &&
        (pattern[p] == '_' || fold(pattern[p]) == fold(text[t]))) {
      ++p;
      ++t;
    } else if (p < pattern.size() && pattern[p] == '%') {
      star = p++;
      star_t = t;
    } else if (star != std::string::npos) {
      p = star + 1;
      t = ++star_t;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '%') ++p;
  return p == pattern.size();
}

Predicate Predicate::equals(std::string field, std::string value) {
  Predicate p;
  p.type = Type::FieldEquals;
  p.field = std::move(field);
  p.value = std::move(value);
  return p;
}

Predicate Predicate::in_set(std::string field, std::unordered_set<std::string> values) {
  Predicate p;
  p.type = Type::FieldInSet;
  p.field = std::move(field);
  p.values = std::move(values);
  return p;
}

Predicate Predicate::like(std::string field, std::string pattern) {
  Predicate p;
  p.type = Type::PatternMatch;
  p.field = std::move(field);
  p.value = std::move(pattern);
  return p;
}

Predicate Predicate::negate(Predicate child) {
  Predicate p;
  p.type = Type::Not;
  p.children.push_back(std::move(child));
  return p;
}

Predicate Predicate::all_of(std::vector<Predicate> children) {
  Predicate p;
  p.type = Type::And;
  p.children = std::move(children);
  return p;
}

Predicate Predicate::any_of(std::vector<Predicate> children) {
  Predicate p;
  p.type = Type::Or;
  p.children = std::move(children);
  return p;
}

bool Predicate::eval(const Event& e) const {
  switch (type) {
    case Type::FieldEquals: {
      auto v = get_field(e, field);
      return v && *v == value;
    }
    case Type::FieldInSet: {
      auto v = get_field(e, field);
      return v && values.count(*v) > 0;
    }
    case Type::PatternMatch: {
      auto v = get_field(e, field);
      return v && match_pattern(value, *v);
    }
    case Type::Not:
      return !children.front().eval(e);
    case Type::And:
      return std::all_of(children.begin(), children.end(),
                         [&](const Predicate& c) { return c.eval(e); });
    case Type::Or:
      return std::any_of(children.begin(), children.end(),
                         [&](const Predicate& c) { return c.eval(e); });
  }
  return false;
}

namespace {

void check_field(const std::string& field, EventKind kind) {
  const auto& fields = schema_fields(kind);
  if (std::find(fields.begin(), fields.end(), field) == fields.end()) {
    throw RuleFormatException("UnknownField(\"" + field + "\", kind " + to_string(kind) +
                              ")");
  }
}

std::string value_to_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  throw RuleFormatException("predicate values must be strings or integers, got " + v.dump());
}

Predicate parse_predicate(const json& node, EventKind kind) {
  if (!node.is_object() || node.size() != 1) {
    throw RuleFormatException("predicate node must be a single-key object, got " +
                              node.dump());
  }
  const auto& key = node.items().begin().key();
  const json& body = node.items().begin().value();

  if (key == "all" || key == "any") {
    if (!body.is_array() || body.empty()) {
      throw RuleFormatException("\"" + key + "\" needs a non-empty array");
    }
    std::vector<Predicate> children;
    for (const auto& child : body) children.push_back(parse_predicate(child, kind));
    return key == "all" ? Predicate::all_of(std::move(children))
                        : Predicate::any_of(std::move(children));
  }
  if (key == "not") {
    return Predicate::negate(parse_predicate(body, kind));
  }

  if (!body.is_object() || !body.contains("field")) {
    throw RuleFormatException("leaf \"" + key + "\" needs a \"field\"");
  }
  std::string field = body.at("field").get<std::string>();
  check_field(field, kind);
  if (key == "eq") {
    return Predicate::equals(field, value_to_string(body.at("value")));
  }
  if (key == "in") {
    std::unordered_set<std::string> values;
    for (const auto& v : body.at("values")) values.insert(value_to_string(v));
    return Predicate::in_set(field, std::move(values));
  }
  if (key == "like") {
    return Predicate::like(field, body.at("pattern").get<std::string>());
  }
  throw RuleFormatException("unknown predicate node \"" + key + "\"");
}

}  // namespace

DetectionRule compile_rule(const std::string& rule_json_text) {
  json doc = json::parse(rule_json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw RuleFormatException("rule document is not a JSON object");
  }
  DetectionRule rule;
  if (!doc.contains("rule_id") || !doc.at("rule_id").is_string()) {
    throw RuleFormatException("rule needs a string \"rule_id\"");
  }
  rule.rule_id = doc.at("rule_id").get<std::string>();
  rule.severity = severity_from(doc.value("severity", "medium"));
  rule.description = doc.value("description", "");

  auto parts_it = doc.find("parts");
  if (parts_it == doc.end() || !parts_it->is_array() || parts_it->empty()) {
    throw RuleFormatException("EmptyRule(\"" + rule.rule_id + "\")");
  }
  for (const auto& part : *parts_it) {
    if (!part.is_object() || !part.contains("kind") || !part.contains("where")) {
      throw RuleFormatException("each part needs \"kind\" and \"where\"");
    }
    std::string kind_name = part.at("kind").get<std::string>();
    EventKind kind;
    if (kind_name == "process") kind = EventKind::Process;
    else if (kind_name == "file") kind = EventKind::File;
    else if (kind_name == "socket") kind = EventKind::Socket;
    else throw RuleFormatException("unknown event kind \"" + kind_name + "\"");
    rule.parts.push_back({kind, parse_predicate(part.at("where"), kind)});
  }
  return rule;
}

std::vector<DetectionRule> load_rules_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());

  std::vector<DetectionRule> rules;
  std::unordered_set<std::string> seen_ids;
  for (const auto& file : files) {
    std::ifstream in(file, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    DetectionRule rule;
    try {
      rule = compile_rule(buf.str());
    } catch (const RuleFormatException& e) {
      throw RuleFormatException(file.string() + ": " + e.what());
    }
    if (!seen_ids.insert(rule.rule_id).second) {
      throw RuleFormatException("DuplicateRuleId(\"" + rule.rule_id + "\") in " +
                                file.string());
    }
    rules.push_back(std::move(rule));
  }
  return rules;
}

DetectionRule builtin_crimson_rat_rule() {
  const std::unordered_set<std::string> md5s = {
      "d946e3e94fec670f9e47aca186ecaabe", "e18c4172329c32d8394ba0658d5212c2",
      "2fde001f4c17c8613480091fa48b55a0", "c1f4c9f969f955dec2465317b526b600",
      "026e8e7acb2f2a156f8afff64fd54066", "fb64c22d37c502bde55b19688d40c803",
      "70b8040730c62e4a52a904251fa74029", "3efec6ffcbfe79f71f5410eb46f1c19e",
      "b03211f6feccd3a62273368b52f6079d"};
  const std::unordered_set<std::string> c2_ips = {
      "93.127.133.58", "104.129.27.14", "37.221.64.134", "78.40.143.189",
      "45.141.58.224", "45.141.59.167", "45.141.58.33",  "78.40.143.98",
      "84.54.51.12",   "176.65.143.215", "45.141.59.72", "192.64.118.76"};
  const std::unordered_set<std::string> c2_ports = {
      "1097", "17241", "19821", "21817", "23221", "27425",
      "8108", "16197", "19867", "28784", "30123"};
  const std::unordered_set<std::string> create_or_rename = {"FILE_CREATE", "FILE_RENAME"};

  auto office_or_rat = Predicate::any_of({
      Predicate::like("process_name", "%POWERPNT.EXE%"),
      Predicate::like("process_name", "%jnmxrvt hcsm.exe%"),
  });

  // Known dropper hashes written by the Office process.
  auto hash_branch = Predicate::all_of({
      Predicate::like("process_name", "%POWERPNT.EXE%"),
      Predicate::in_set("action", create_or_rename),
      Predicate::in_set("md5", md5s),
  });
  // WEISTE.jpg drops and staging inside the masquerade directory.
  auto staging_branch = Predicate::all_of({
      office_or_rat,
      Predicate::in_set("action", create_or_rename),
      Predicate::any_of({
          Predicate::like("target_path", "%WEISTE.jpg%"),
          Predicate::like("target_path", "%0ffice360-48%"),
      }),
  });
  // Any rename to the suspicious name, whoever performs it.
  auto rename_branch = Predicate::all_of({
      Predicate::equals("action", "FILE_RENAME"),
      Predicate::like("target_path", "%jnmxrvt hcsm.exe%"),
  });

  auto socket_part = Predicate::all_of({
      office_or_rat,
      Predicate::in_set("remote_address", c2_ips),
      Predicate::in_set("remote_port", c2_ports),
      Predicate::negate(Predicate::all_of({
          Predicate::equals("remote_address", "96.17.168.104"),
          Predicate::equals("remote_port", "443"),
      })),
  });

  DetectionRule rule;
  rule.rule_id = "crimson-rat-sindoor";
  rule.severity = Severity::Critical;
  rule.description =
      "Crimson RAT campaign artifacts: dropper hashes, WEISTE.jpg / "
      "0ffice360-48 staging, rename to jnmxrvt hcsm.exe, and C2 connects "
      "from the Office or RAT process";
  rule.parts.push_back(
      {EventKind::File,
       Predicate::any_of({hash_branch, staging_branch, rename_branch})});
  rule.parts.push_back({EventKind::Socket, socket_part});
  return rule;
}

namespace {

struct RawHit {
  std::int64_t time;
  std::size_t position;
  std::size_t part;
};

std::vector<Detection> hits_to_detections(const DetectionRule& rule, const EventStore& store,
                                          std::vector<RawHit> hits) {
  std::sort(hits.begin(), hits.end(), [](const RawHit& a, const RawHit& b) {
    return std::tie(a.time, a.position, a.part) < std::tie(b.time, b.position, b.part);
  });
  std::vector<Detection> out;
  out.reserve(hits.size());
  for (const auto& h : hits) {
    const Event& e = store.at(h.position);
    out.push_back({rule.rule_id, rule.severity, e, h.part, format_utc(e.time())});
  }
  return out;
}

}  // namespace

std::vector<Detection> eval_rule_serial(const DetectionRule& rule, const EventStore& store) {
  std::vector<RawHit> hits;
  for (std::size_t part = 0; part < rule.parts.size(); ++part) {
    const auto& positions = store.by_kind(rule.parts[part].kind);
    for (std::size_t pos : positions) {
      const Event& e = store.at(pos);
      if (rule.parts[part].predicate.eval(e)) {
        hits.push_back({e.time(), pos, part});
      }
    }
  }
  return hits_to_detections(rule, store, std::move(hits));
}

std::vector<Detection> eval_rule(const DetectionRule& rule, const EventStore& store) {
  std::vector<RawHit> hits;
  for (std::size_t part = 0; part < rule.parts.size(); ++part) {
    const auto& positions = store.by_kind(rule.parts[part].kind);
    const auto n = static_cast<std::int64_t>(positions.size());
    std::vector<char> matched(positions.size(), 0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (n > 2048)
#endif
    for (std::int64_t i = 0; i < n; ++i) {
      const std::size_t pos = positions[static_cast<std::size_t>(i)];
      if (rule.parts[part].predicate.eval(store.at(pos))) {
        matched[static_cast<std::size_t>(i)] = 1;
      }
    }
    for (std::size_t i = 0; i < positions.size(); ++i) {
      if (matched[i]) {
        hits.push_back({store.at(positions[i]).time(), positions[i], part});
      }
    }
  }
  return hits_to_detections(rule, store, std::move(hits));
}

std::string detection_to_json_line(const Detection& d) {
  json line = json::object();
  line["table_name"] = d.event.table_name;
  line["action"] = *get_field(d.event, "action");
  if (d.event.kind == EventKind::Socket) {
    const auto& s = d.event.socket();
    line["process_name"] = s.process_name;
    line["target_path"] = s.remote_address + ":" + std::to_string(s.remote_port);
    line["md5"] = nullptr;
  } else if (d.event.kind == EventKind::File) {
    line["process_name"] = d.event.file().process_name;
    line["target_path"] = d.event.file().target_path;
    line["md5"] = d.event.file().md5;
  } else {
    line["process_name"] = d.event.process().path;
    line["target_path"] = d.event.process().cmdline;
    line["md5"] = nullptr;
  }
  line["utc_time"] = d.utc_time;
  line["rule_id"] = d.rule_id;
  line["severity"] = to_string(d.severity);
  return line.dump();
}

}  // namespace sentinel
