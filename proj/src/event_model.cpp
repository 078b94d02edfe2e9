#include "sentinel/event_model.hpp"

#include <arpa/inet.h>

#include <cctype>
#include <charconv>
#include <ctime>

namespace sentinel {

namespace {

std::optional<std::int64_t> parse_i64(const std::string& s) {
  if (s.empty()) {
    return std::nullopt;
  }
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    return std::nullopt;
  }
  return v;
}

}  // namespace

std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::Process: return "process";
    case EventKind::File: return "file";
    case EventKind::Socket: return "socket";
  }
  return "?";
}

std::string to_string(ProcessAction a) {
  switch (a) {
    case ProcessAction::ProcCreate: return "PROC_CREATE";
    case ProcessAction::ProcExit: return "PROC_EXIT";
  }
  return "?";
}

std::string to_string(FileAction a) {
  switch (a) {
    case FileAction::FileCreate: return "FILE_CREATE";
    case FileAction::FileWrite: return "FILE_WRITE";
    case FileAction::FileDelete: return "FILE_DELETE";
    case FileAction::FileRename: return "FILE_RENAME";
  }
  return "?";
}

std::string to_string(SocketAction a) {
  switch (a) {
    case SocketAction::SocketConnect: return "SOCKET_CONNECT";
    case SocketAction::SocketAccept: return "SOCKET_ACCEPT";
    case SocketAction::SocketClose: return "SOCKET_CLOSE";
  }
  return "?";
}

std::string to_string(AddressFamily f) {
  return f == AddressFamily::Inet ? "AF_INET" : "AF_INET6";
}

std::string to_string(Protocol p) {
  return p == Protocol::Tcp ? "TCP" : "UDP";
}

std::string table_name_for(EventKind k) {
  switch (k) {
    case EventKind::Process: return "win_process_events";
    case EventKind::File: return "win_file_events";
    case EventKind::Socket: return "win_socket_events";
  }
  return "?";
}

std::optional<EventKind> kind_for_table(const std::string& table_name) {
  if (table_name == "win_process_events") return EventKind::Process;
  if (table_name == "win_file_events") return EventKind::File;
  if (table_name == "win_socket_events") return EventKind::Socket;
  return std::nullopt;
}

std::int64_t Event::time() const {
  return std::visit([](const auto& p) { return p.time; }, payload);
}

const std::string& Event::eid() const {
  return std::visit([](const auto& p) -> const std::string& { return p.eid; }, payload);
}

const std::string& Event::process_guid() const {
  return std::visit([](const auto& p) -> const std::string& { return p.process_guid; },
                    payload);
}

std::string ValidationError::message() const {
  switch (code) {
    case Code::MissingField: return "MissingField(" + field + ")";
    case Code::BadEnum: return "BadEnum(" + field + ", \"" + value + "\")";
    case Code::BadFormat: return "BadFormat(" + field + ", \"" + value + "\")";
  }
  return "?";
}

bool is_valid_guid(const std::string& s) {
  static const std::size_t groups[] = {8, 4, 4, 4, 12};
  std::size_t pos = 0;
  for (std::size_t g = 0; g < 5; ++g) {
    if (g > 0) {
      if (pos >= s.size() || s[pos] != '-') return false;
      ++pos;
    }
    for (std::size_t i = 0; i < groups[g]; ++i, ++pos) {
      if (pos >= s.size() || !std::isxdigit(static_cast<unsigned char>(s[pos]))) {
        return false;
      }
    }
  }
  return pos == s.size();
}

bool is_hex_string(const std::string& s, std::size_t length) {
  if (s.size() != length) return false;
  for (char c : s) {
    if (!std::isxdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

bool is_valid_ipv4(const std::string& s) {
  in_addr addr{};
  return inet_pton(AF_INET, s.c_str(), &addr) == 1;
}

bool is_valid_ipv6(const std::string& s) {
  in6_addr addr{};
  return inet_pton(AF_INET6, s.c_str(), &addr) == 1;
}

std::string to_lower_ascii(std::string s) {
  for (char& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return s;
}

std::string to_upper_ascii(std::string s) {
  for (char& c : s) {
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  }
  return s;
}

std::string format_utc(std::int64_t epoch_seconds) {
  std::time_t t = static_cast<std::time_t>(epoch_seconds);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace {

struct FieldReader {
  const RawFieldMap& fields;
  std::optional<ValidationError> error;

  std::optional<std::string> get(const std::string& name) {
    auto it = fields.find(name);
    if (it == fields.end()) {
      fail(ValidationError::Code::MissingField, name, "");
      return std::nullopt;
    }
    return it->second;
  }

  // Missing optional columns read as empty.
  std::string get_or_empty(const std::string& name) const {
    auto it = fields.find(name);
    return it == fields.end() ? std::string{} : it->second;
  }

  std::optional<std::int64_t> get_i64(const std::string& name, std::int64_t min_value,
                                      std::int64_t max_value) {
    auto raw = get(name);
    if (!raw) return std::nullopt;
    auto v = parse_i64(*raw);
    if (!v || *v < min_value || *v > max_value) {
      fail(ValidationError::Code::BadFormat, name, *raw);
      return std::nullopt;
    }
    return v;
  }

  void fail(ValidationError::Code code, const std::string& field, const std::string& value) {
    if (!error) {
      error = ValidationError{code, field, value};
    }
  }
};

constexpr std::int64_t kMaxI64 = INT64_MAX;

bool read_guid(FieldReader& r, const std::string& name, std::string& out) {
  auto v = r.get(name);
  if (!v) return false;
  if (!is_valid_guid(*v)) {
    r.fail(ValidationError::Code::BadFormat, name, *v);
    return false;
  }
  out = *v;
  return true;
}

// Empty is allowed; non-empty must be exact-length hex, stored lowercase.
bool read_hash(FieldReader& r, const std::string& name, std::size_t length,
               std::string& out) {
  std::string v = r.get_or_empty(name);
  if (v.empty()) {
    out.clear();
    return true;
  }
  std::string lower = to_lower_ascii(v);
  if (!is_hex_string(lower, length)) {
    r.fail(ValidationError::Code::BadFormat, name, v);
    return false;
  }
  out = lower;
  return true;
}

std::variant<Event, ValidationError> make_error(const FieldReader& r) {
  return *r.error;
}

std::variant<Event, ValidationError> validate_process(FieldReader& r, const std::string& host) {
  ProcessEvent e;
  if (auto t = r.get_i64("time", 1, kMaxI64)) e.time = *t; else return make_error(r);
  if (auto a = r.get("action")) {
    if (*a == "PROC_CREATE") e.action = ProcessAction::ProcCreate;
    else if (*a == "PROC_EXIT") e.action = ProcessAction::ProcExit;
    else { r.fail(ValidationError::Code::BadEnum, "action", *a); return make_error(r); }
  } else return make_error(r);
  if (auto v = r.get_i64("pid", 0, kMaxI64)) e.pid = *v; else return make_error(r);
  if (auto v = r.get_i64("parent_pid", 0, kMaxI64)) e.parent_pid = *v; else return make_error(r);
  if (auto v = r.get("path")) e.path = *v; else return make_error(r);
  e.cmdline = r.get_or_empty("cmdline");
  e.user = r.get_or_empty("user");
  if (!read_guid(r, "process_guid", e.process_guid)) return make_error(r);
  if (!read_guid(r, "parent_process_guid", e.parent_process_guid)) return make_error(r);
  e.eid = r.get_or_empty("eid");
  return Event{EventKind::Process, e, host, table_name_for(EventKind::Process)};
}

std::variant<Event, ValidationError> validate_file(FieldReader& r, const std::string& host) {
  FileEvent e;
  if (auto t = r.get_i64("time", 1, kMaxI64)) e.time = *t; else return make_error(r);
  if (auto a = r.get("action")) {
    if (*a == "FILE_CREATE") e.action = FileAction::FileCreate;
    else if (*a == "FILE_WRITE") e.action = FileAction::FileWrite;
    else if (*a == "FILE_DELETE") e.action = FileAction::FileDelete;
    else if (*a == "FILE_RENAME") e.action = FileAction::FileRename;
    else { r.fail(ValidationError::Code::BadEnum, "action", *a); return make_error(r); }
  } else return make_error(r);
  if (auto v = r.get("target_path")) e.target_path = *v; else return make_error(r);
  if (!read_hash(r, "md5", 32, e.md5)) return make_error(r);
  if (!read_hash(r, "sha256", 64, e.sha256)) return make_error(r);
  if (auto v = r.get_i64("pid", 0, kMaxI64)) e.pid = *v; else return make_error(r);
  if (!read_guid(r, "process_guid", e.process_guid)) return make_error(r);
  if (auto v = r.get("process_name")) e.process_name = *v; else return make_error(r);
  e.eid = r.get_or_empty("eid");
  return Event{EventKind::File, e, host, table_name_for(EventKind::File)};
}

std::variant<Event, ValidationError> validate_socket(FieldReader& r, const std::string& host) {
  SocketEvent e;
  if (auto t = r.get_i64("time", 1, kMaxI64)) e.time = *t; else return make_error(r);
  if (auto a = r.get("action")) {
    if (*a == "SOCKET_CONNECT") e.action = SocketAction::SocketConnect;
    else if (*a == "SOCKET_ACCEPT") e.action = SocketAction::SocketAccept;
    else if (*a == "SOCKET_CLOSE") e.action = SocketAction::SocketClose;
    else { r.fail(ValidationError::Code::BadEnum, "action", *a); return make_error(r); }
  } else return make_error(r);
  if (auto v = r.get_i64("pid", 0, kMaxI64)) e.pid = *v; else return make_error(r);
  if (!read_guid(r, "process_guid", e.process_guid)) return make_error(r);
  if (auto v = r.get("process_name")) e.process_name = *v; else return make_error(r);
  if (auto f = r.get("family")) {
    if (*f == "AF_INET" || *f == "2") e.family = AddressFamily::Inet;
    else if (*f == "AF_INET6" || *f == "23" || *f == "10") e.family = AddressFamily::Inet6;
    else { r.fail(ValidationError::Code::BadEnum, "family", *f); return make_error(r); }
  } else return make_error(r);
  if (auto p = r.get("protocol")) {
    if (*p == "TCP" || *p == "6") e.protocol = Protocol::Tcp;
    else if (*p == "UDP" || *p == "17") e.protocol = Protocol::Udp;
    else { r.fail(ValidationError::Code::BadEnum, "protocol", *p); return make_error(r); }
  } else return make_error(r);
  if (auto v = r.get_i64("local_port", 0, 65535)) e.local_port = static_cast<int>(*v);
  else return make_error(r);
  if (auto v = r.get_i64("remote_port", 0, 65535)) e.remote_port = static_cast<int>(*v);
  else return make_error(r);
  auto check_addr = [&](const std::string& name, std::string& out) {
    auto v = r.get(name);
    if (!v) return false;
    bool ok = e.family == AddressFamily::Inet ? is_valid_ipv4(*v) : is_valid_ipv6(*v);
    if (!ok) {
      r.fail(ValidationError::Code::BadFormat, name, *v);
      return false;
    }
    out = *v;
    return true;
  };
  if (!check_addr("local_address", e.local_address)) return make_error(r);
  if (!check_addr("remote_address", e.remote_address)) return make_error(r);
  e.eid = r.get_or_empty("eid");
  return Event{EventKind::Socket, e, host, table_name_for(EventKind::Socket)};
}

}  // namespace

std::variant<Event, ValidationError> validate_event(const RawFieldMap& candidate,
                                                    const std::string& table_name,
                                                    const std::string& host) {
  auto kind = kind_for_table(table_name);
  if (!kind) {
    return ValidationError{ValidationError::Code::BadEnum, "table_name", table_name};
  }
  FieldReader r{candidate, std::nullopt};
  switch (*kind) {
    case EventKind::Process: return validate_process(r, host);
    case EventKind::File: return validate_file(r, host);
    case EventKind::Socket: return validate_socket(r, host);
  }
  return ValidationError{ValidationError::Code::BadEnum, "table_name", table_name};
}

const std::vector<std::string>& schema_fields(EventKind k) {
  static const std::vector<std::string> process_fields = {
      "time", "action", "pid", "parent_pid", "path", "cmdline",
      "user", "process_guid", "parent_process_guid", "eid"};
  static const std::vector<std::string> file_fields = {
      "time", "action", "eid", "target_path", "md5",
      "sha256", "pid", "process_guid", "process_name"};
  static const std::vector<std::string> socket_fields = {
      "time", "action", "pid", "process_guid", "process_name", "family", "protocol",
      "local_address", "local_port", "remote_address", "remote_port", "eid"};
  switch (k) {
    case EventKind::Process: return process_fields;
    case EventKind::File: return file_fields;
    case EventKind::Socket: return socket_fields;
  }
  return process_fields;
}

std::optional<std::string> get_field(const Event& e, const std::string& field) {
  auto num = [](std::int64_t v) { return std::to_string(v); };
  if (e.kind == EventKind::Process) {
    const auto& p = e.process();
    if (field == "time") return num(p.time);
    if (field == "action") return to_string(p.action);
    if (field == "pid") return num(p.pid);
    if (field == "parent_pid") return num(p.parent_pid);
    if (field == "path") return p.path;
    if (field == "cmdline") return p.cmdline;
    if (field == "user") return p.user;
    if (field == "process_guid") return p.process_guid;
    if (field == "parent_process_guid") return p.parent_process_guid;
    if (field == "eid") return p.eid;
  } else if (e.kind == EventKind::File) {
    const auto& f = e.file();
    if (field == "time") return num(f.time);
    if (field == "action") return to_string(f.action);
    if (field == "eid") return f.eid;
    if (field == "target_path") return f.target_path;
    if (field == "md5") return f.md5;
    if (field == "sha256") return f.sha256;
    if (field == "pid") return num(f.pid);
    if (field == "process_guid") return f.process_guid;
    if (field == "process_name") return f.process_name;
  } else {
    const auto& s = e.socket();
    if (field == "time") return num(s.time);
    if (field == "action") return to_string(s.action);
    if (field == "pid") return num(s.pid);
    if (field == "process_guid") return s.process_guid;
    if (field == "process_name") return s.process_name;
    if (field == "family") return to_string(s.family);
    if (field == "protocol") return to_string(s.protocol);
    if (field == "local_address") return s.local_address;
    if (field == "local_port") return num(s.local_port);
    if (field == "remote_address") return s.remote_address;
    if (field == "remote_port") return num(s.remote_port);
    if (field == "eid") return s.eid;
  }
  return std::nullopt;
}

}  // namespace sentinel
