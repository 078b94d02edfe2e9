#pragma once

#include <set>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "sentinel/event_model.hpp"

namespace sentinel {

/// Threat-intel corpus: hashes, IPs, ports, domains, decoy filename
/// substrings, and an (ip, port) allowlist that suppresses socket hits.
struct IocSet {
  std::unordered_set<std::string> md5_hashes;     // lowercase
  std::unordered_set<std::string> sha256_hashes;  // lowercase
  std::unordered_set<std::string> ip_addresses;
  std::unordered_set<int> ports;
  std::unordered_set<std::string> domains;          // lowercase
  std::vector<std::string> decoy_filenames;         // lowercase substrings
  std::set<std::pair<std::string, int>> allowlist;  // (ip, port)
  std::string source_label;
};

struct IocHit {
  enum class Field { Md5, Sha256, RemoteAddress, RemotePort, Domain, Filename };
  Field field_matched;
  std::string value;
  std::string source_label;

  bool operator==(const IocHit&) const = default;
};

std::string to_string(IocHit::Field f);

struct IocError {
  std::string message;
};

class IocFormatException : public std::runtime_error {
 public:
  explicit IocFormatException(const std::string& what) : std::runtime_error(what) {}
};

/// Parses the JSON IOC config (docs/ioc_format.md). Duplicates are
/// deduplicated; hash casing normalized. Throws IocFormatException on
/// bad hashes, ports, or structure.
IocSet load_iocs(const std::string& config_text, const std::string& source_label = "custom");
IocSet load_iocs_file(const std::string& path);

/// The built-in campaign corpus.
const IocSet& builtin_iocs();
/// Same corpus as config text, for round-trip and docs.
std::string builtin_ioc_config_text();

/// Every IOC field of the event that matches. A socket event whose
/// (remote_address, remote_port) is allowlisted matches nothing.
std::vector<IocHit> match_event(const Event& e, const IocSet& iocs);

}  // namespace sentinel
