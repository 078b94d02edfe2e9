#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace sentinel {

enum class EventKind { Process, File, Socket };

enum class ProcessAction { ProcCreate, ProcExit };
enum class FileAction { FileCreate, FileWrite, FileDelete, FileRename };
enum class SocketAction { SocketConnect, SocketAccept, SocketClose };
enum class AddressFamily { Inet, Inet6 };
enum class Protocol { Tcp, Udp };

std::string to_string(EventKind k);
std::string to_string(ProcessAction a);
std::string to_string(FileAction a);
std::string to_string(SocketAction a);
std::string to_string(AddressFamily f);
std::string to_string(Protocol p);

/// Table names as they appear in the result log.
std::string table_name_for(EventKind k);
std::optional<EventKind> kind_for_table(const std::string& table_name);

struct ProcessEvent {
  std::int64_t time = 0;
  ProcessAction action = ProcessAction::ProcCreate;
  std::int64_t pid = 0;
  std::int64_t parent_pid = 0;
  std::string path;
  std::string cmdline;
  std::string user;
  std::string process_guid;
  std::string parent_process_guid;
  std::string eid;

  bool operator==(const ProcessEvent&) const = default;
};

struct FileEvent {
  std::int64_t time = 0;
  FileAction action = FileAction::FileCreate;
  std::string eid;
  std::string target_path;
  std::string md5;     // 32 lowercase hex chars, or empty
  std::string sha256;  // 64 lowercase hex chars, or empty
  std::int64_t pid = 0;
  std::string process_guid;
  std::string process_name;

  bool operator==(const FileEvent&) const = default;
};

struct SocketEvent {
  std::int64_t time = 0;
  SocketAction action = SocketAction::SocketConnect;
  std::int64_t pid = 0;
  std::string process_guid;
  std::string process_name;
  AddressFamily family = AddressFamily::Inet;
  Protocol protocol = Protocol::Tcp;
  std::string local_address;
  int local_port = 0;
  std::string remote_address;
  int remote_port = 0;
  std::string eid;

  bool operator==(const SocketEvent&) const = default;
};

/// Envelope over the three table payloads.
struct Event {
  EventKind kind = EventKind::Process;
  std::variant<ProcessEvent, FileEvent, SocketEvent> payload;
  std::string host;
  std::string table_name;

  bool operator==(const Event&) const = default;

  const ProcessEvent& process() const { return std::get<ProcessEvent>(payload); }
  const FileEvent& file() const { return std::get<FileEvent>(payload); }
  const SocketEvent& socket() const { return std::get<SocketEvent>(payload); }

  std::int64_t time() const;
  const std::string& eid() const;
  const std::string& process_guid() const;
};

struct ValidationError {
  enum class Code { MissingField, BadEnum, BadFormat };
  Code code;
  std::string field;
  std::string value;  // offending value; empty for MissingField

  std::string message() const;
};

using RawFieldMap = std::map<std::string, std::string>;

/// Parses and validates one raw column map into a typed Event.
/// Total: every input yields either an Event or a classified error.
std::variant<Event, ValidationError> validate_event(const RawFieldMap& candidate,
                                                    const std::string& table_name,
                                                    const std::string& host = "");

// Field-level validators, shared with ioc_store and the rule compiler.
bool is_valid_guid(const std::string& s);
bool is_hex_string(const std::string& s, std::size_t length);
bool is_valid_ipv4(const std::string& s);
bool is_valid_ipv6(const std::string& s);

std::string to_lower_ascii(std::string s);
std::string to_upper_ascii(std::string s);

/// Epoch seconds -> "2025-07-14T14:33:44Z".
std::string format_utc(std::int64_t epoch_seconds);

/// Column names a rule predicate may reference, per event kind.
const std::vector<std::string>& schema_fields(EventKind k);

/// String view of one column of an event ("remote_port" -> "19821").
/// Returns nullopt for fields not present on the event's kind.
std::optional<std::string> get_field(const Event& e, const std::string& field);

}  // namespace sentinel
