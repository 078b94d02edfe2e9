#pragma once

#include <memory>
#include <string>
#include <unordered_set>
#include <vector>

#include "sentinel/event_model.hpp"
#include "sentinel/log_ingest.hpp"

namespace sentinel {

enum class Severity { Info, Low, Medium, High, Critical };
std::string to_string(Severity s);

/// Predicate tree over one event kind. Leaves compare a named column;
/// ports and pids compare through their decimal string form.
struct Predicate {
  enum class Type { FieldEquals, FieldInSet, PatternMatch, Not, And, Or };
  Type type;
  std::string field;                        // leaves
  std::string value;                        // FieldEquals / PatternMatch
  std::unordered_set<std::string> values;   // FieldInSet
  std::vector<Predicate> children;          // Not (1), And/Or (>=1)

  bool eval(const Event& e) const;

  static Predicate equals(std::string field, std::string value);
  static Predicate in_set(std::string field, std::unordered_set<std::string> values);
  static Predicate like(std::string field, std::string pattern);
  static Predicate negate(Predicate child);
  static Predicate all_of(std::vector<Predicate> children);
  static Predicate any_of(std::vector<Predicate> children);
};

struct RulePart {
  EventKind kind;
  Predicate predicate;
};

struct DetectionRule {
  std::string rule_id;
  Severity severity = Severity::Medium;
  std::vector<RulePart> parts;
  std::string description;
};

struct Detection {
  std::string rule_id;
  Severity severity = Severity::Medium;
  Event event;
  std::size_t matched_part = 0;
  std::string utc_time;  // ISO 8601 from the event time
};

/// Case-insensitive (ASCII fold) SQL LIKE: '%' any run, '_' one char,
/// everything else literal (backslash included).
bool match_pattern(const std::string& pattern, const std::string& text);

class RuleFormatException : public std::runtime_error {
 public:
  explicit RuleFormatException(const std::string& what) : std::runtime_error(what) {}
};

/// Compiles one rule document (docs/rule_format.md). Field names are
/// checked against the part's event-kind schema. Throws RuleFormatException
/// with UnknownField / EmptyRule detail.
DetectionRule compile_rule(const std::string& rule_json_text);

/// Loads every *.json rule in a directory. Throws on DuplicateRuleId or
/// any per-file compile error.
std::vector<DetectionRule> load_rules_dir(const std::string& dir);

/// The campaign rule, id "crimson-rat-sindoor", severity critical.
DetectionRule builtin_crimson_rat_rule();

/// Detections for every event satisfying any part, ordered by
/// (time, ingestion order, part index). Deterministic.
std::vector<Detection> eval_rule(const DetectionRule& rule, const EventStore& store);

/// Straight serial loop, kept as the reference for the parallel path.
std::vector<Detection> eval_rule_serial(const DetectionRule& rule, const EventStore& store);

/// Detection output line (table_name, action, process_name, target_path,
/// md5, utc_time, rule_id, severity). Socket detections carry
/// "ip:port" in target_path.
std::string detection_to_json_line(const Detection& d);

}  // namespace sentinel
