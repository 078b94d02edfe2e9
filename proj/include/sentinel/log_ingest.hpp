#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "sentinel/event_model.hpp"

namespace sentinel {

struct ParsedLine {
  std::string table_name;
  std::string host;
  RawFieldMap columns;
};

/// Blank lines and differential "removed" records.
struct SkippedLine {};

struct ParseError {
  enum class Code { MalformedLine, UnknownTable };
  Code code;
  std::string detail;

  std::string message() const;
};

/// One result-log record -> (table, host, raw columns).
std::variant<ParsedLine, SkippedLine, ParseError> parse_event_line(const std::string& line);

/// Immutable, indexed event collection from one ingestion session.
class EventStore {
 public:
  EventStore() = default;

  const std::vector<Event>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }
  const Event& at(std::size_t pos) const { return events_[pos]; }
  const std::string& host() const { return host_; }

  /// Positions of events bearing the GUID (case-insensitive), ingestion order.
  const std::vector<std::size_t>& by_guid(const std::string& process_guid) const;
  const std::vector<std::size_t>& by_kind(EventKind k) const;
  /// All positions sorted by (time, ingestion order).
  const std::vector<std::size_t>& by_time() const { return by_time_; }

  struct Stats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::map<EventKind, std::size_t> by_kind;
  };
  const Stats& stats() const { return stats_; }

  class Builder {
   public:
    void add(Event e);
    void note_reject() { ++stats_.rejected; }
    void set_host(const std::string& host) { host_ = host; }
    EventStore seal() &&;

   private:
    std::vector<Event> events_;
    Stats stats_;
    std::string host_;
  };

 private:
  std::vector<Event> events_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_guid_;
  std::map<EventKind, std::vector<std::size_t>> by_kind_;
  std::vector<std::size_t> by_time_;
  Stats stats_;
  std::string host_;
};

struct IngestReport {
  std::size_t accepted = 0;
  std::vector<std::pair<std::size_t, std::string>> rejected;  // (line number, error)
  std::size_t skipped = 0;  // differential "removed" records
  double duration_ms = 0.0;
};

struct IngestResult {
  EventStore store;
  IngestReport report;
};

/// Streams UTF-8 JSON Lines; per-line errors are reported, never fatal.
/// Throws std::runtime_error on stream I/O failure.
IngestResult ingest_log(std::istream& source);
IngestResult ingest_log_file(const std::string& path);

/// One result-log line that parse_event_line accepts back.
/// parse + validate of the output equals the input event.
std::string serialize(const Event& e);

}  // namespace sentinel
