#include "sentinel/log_ingest.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace sentinel {

using nlohmann::json;

std::string ParseError::message() const {
  switch (code) {
    case Code::MalformedLine: return "MalformedLine(" + detail + ")";
    case Code::UnknownTable: return "UnknownTable(" + detail + ")";
  }
  return "?";
}

std::variant<ParsedLine, SkippedLine, ParseError> parse_event_line(const std::string& line) {
  std::string_view sv = line;
  // CRLF input: strip the trailing CR left by getline.
  while (!sv.empty() && (sv.back() == '\r' || sv.back() == '\n')) sv.remove_suffix(1);
  if (sv.find_first_not_of(" \t") == std::string_view::npos) {
    return SkippedLine{};
  }

  json record = json::parse(sv, nullptr, false);
  if (record.is_discarded() || !record.is_object()) {
    return ParseError{ParseError::Code::MalformedLine, "not a JSON object"};
  }

  auto name_it = record.find("name");
  if (name_it == record.end() || !name_it->is_string()) {
    return ParseError{ParseError::Code::MalformedLine, "missing \"name\""};
  }
  std::string table = name_it->get<std::string>();
  if (!kind_for_table(table)) {
    return ParseError{ParseError::Code::UnknownTable, table};
  }

  // Differential retractions carry no new occurrence.
  if (auto it = record.find("action"); it != record.end() && it->is_string() &&
      it->get<std::string>() == "removed") {
    return SkippedLine{};
  }

  ParsedLine out;
  out.table_name = std::move(table);
  if (auto it = record.find("hostIdentifier"); it != record.end() && it->is_string()) {
    out.host = it->get<std::string>();
  }

  auto cols_it = record.find("columns");
  if (cols_it == record.end() || !cols_it->is_object()) {
    return ParseError{ParseError::Code::MalformedLine, "missing \"columns\" object"};
  }
  for (auto& [key, value] : cols_it->items()) {
    if (value.is_string()) {
      out.columns[key] = value.get<std::string>();
    } else if (value.is_number_integer()) {
      out.columns[key] = std::to_string(value.get<std::int64_t>());
    } else {
      return ParseError{ParseError::Code::MalformedLine,
                        "non-string column \"" + key + "\""};
    }
  }
  return out;
}

void EventStore::Builder::add(Event e) {
  if (host_.empty() && !e.host.empty()) {
    host_ = e.host;
  }
  ++stats_.accepted;
  ++stats_.by_kind[e.kind];
  events_.push_back(std::move(e));
}

EventStore EventStore::Builder::seal() && {
  EventStore store;
  store.events_ = std::move(events_);
  store.stats_ = stats_;
  store.host_ = std::move(host_);
  store.by_time_.resize(store.events_.size());
  for (std::size_t i = 0; i < store.events_.size(); ++i) {
    const Event& e = store.events_[i];
    store.by_guid_[to_upper_ascii(e.process_guid())].push_back(i);
    store.by_kind_[e.kind].push_back(i);
    store.by_time_[i] = i;
  }
  std::stable_sort(store.by_time_.begin(), store.by_time_.end(),
                   [&](std::size_t a, std::size_t b) {
                     return store.events_[a].time() < store.events_[b].time();
                   });
  return store;
}

const std::vector<std::size_t>& EventStore::by_guid(const std::string& process_guid) const {
  static const std::vector<std::size_t> empty;
  auto it = by_guid_.find(to_upper_ascii(process_guid));
  return it == by_guid_.end() ? empty : it->second;
}

const std::vector<std::size_t>& EventStore::by_kind(EventKind k) const {
  static const std::vector<std::size_t> empty;
  auto it = by_kind_.find(k);
  return it == by_kind_.end() ? empty : it->second;
}

IngestResult ingest_log(std::istream& source) {
  auto start = std::chrono::steady_clock::now();
  EventStore::Builder builder;
  IngestReport report;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) {
      continue;  // blank lines do not count toward the line total
    }
    auto parsed = parse_event_line(line);
    if (std::holds_alternative<SkippedLine>(parsed)) {
      ++report.skipped;
      continue;
    }
    if (auto* err = std::get_if<ParseError>(&parsed)) {
      builder.note_reject();
      report.rejected.emplace_back(line_no, err->message());
      continue;
    }
    auto& pl = std::get<ParsedLine>(parsed);
    auto validated = validate_event(pl.columns, pl.table_name, pl.host);
    if (auto* verr = std::get_if<ValidationError>(&validated)) {
      builder.note_reject();
      report.rejected.emplace_back(line_no, verr->message());
      continue;
    }
    builder.add(std::move(std::get<Event>(validated)));
    ++report.accepted;
  }
  if (source.bad()) {
    throw std::runtime_error("I/O failure while reading log");
  }

  IngestResult result{std::move(builder).seal(), std::move(report)};
  auto end = std::chrono::steady_clock::now();
  result.report.duration_ms =
      std::chrono::duration<double, std::milli>(end - start).count();
  return result;
}

IngestResult ingest_log_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open log file: " + path);
  }
  return ingest_log(in);
}

namespace {

json columns_json(const Event& e) {
  json cols = json::object();
  for (const auto& field : schema_fields(e.kind)) {
    cols[field] = *get_field(e, field);
  }
  // utc_time is derived output only; ignored on parse.
  cols["utc_time"] = format_utc(e.time());
  return cols;
}

}  // namespace

std::string serialize(const Event& e) {
  json record = {
      {"name", e.table_name},
      {"hostIdentifier", e.host},
      {"unixTime", e.time()},
      {"action", "added"},
      {"columns", columns_json(e)},
  };
  return record.dump();
}

}  // namespace sentinel
