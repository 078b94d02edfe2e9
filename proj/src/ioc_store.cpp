#include "sentinel/ioc_store.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace sentinel {

using nlohmann::json;

std::string to_string(IocHit::Field f) {
  switch (f) {
    case IocHit::Field::Md5: return "md5";
    case IocHit::Field::Sha256: return "sha256";
    case IocHit::Field::RemoteAddress: return "remote_address";
    case IocHit::Field::RemotePort: return "remote_port";
    case IocHit::Field::Domain: return "domain";
    case IocHit::Field::Filename: return "filename";
  }
  return "?";
}

namespace {

void check_hash(const std::string& value, std::size_t length) {
  if (!is_hex_string(to_lower_ascii(value), length)) {
    throw IocFormatException("BadHashLength(\"" + value + "\", expected " +
                             std::to_string(length) + " hex chars)");
  }
}

int check_port(const json& value) {
  if (!value.is_number_integer()) {
    throw IocFormatException("BadPort(" + value.dump() + ")");
  }
  auto port = value.get<std::int64_t>();
  if (port < 0 || port > 65535) {
    throw IocFormatException("BadPort(" + std::to_string(port) + ")");
  }
  return static_cast<int>(port);
}

const json& expect_array(const json& doc, const char* key) {
  static const json empty = json::array();
  auto it = doc.find(key);
  if (it == doc.end()) return empty;
  if (!it->is_array()) {
    throw IocFormatException(std::string("BadIocFormat(\"") + key + "\" must be an array)");
  }
  return *it;
}

std::string expect_string(const json& value, const char* key) {
  if (!value.is_string()) {
    throw IocFormatException(std::string("BadIocFormat(non-string entry under \"") + key +
                             "\")");
  }
  return value.get<std::string>();
}

// Last path component, lowercase, for filename-substring matching.
std::string basename_lower(const std::string& path) {
  auto pos = path.find_last_of("\\/");
  return to_lower_ascii(pos == std::string::npos ? path : path.substr(pos + 1));
}

void match_filename(const std::string& path, const IocSet& iocs,
                    std::vector<IocHit>& hits) {
  std::string base = basename_lower(path);
  for (const auto& needle : iocs.decoy_filenames) {
    if (base.find(needle) != std::string::npos) {
      hits.push_back({IocHit::Field::Filename, needle, iocs.source_label});
    }
  }
}

}  // namespace

IocSet load_iocs(const std::string& config_text, const std::string& source_label) {
  json doc = json::parse(config_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw IocFormatException("BadIocFormat(config is not a JSON object)");
  }
  IocSet set;
  set.source_label = source_label;

  for (const auto& v : expect_array(doc, "md5")) {
    std::string h = expect_string(v, "md5");
    check_hash(h, 32);
    set.md5_hashes.insert(to_lower_ascii(h));
  }
  for (const auto& v : expect_array(doc, "sha256")) {
    std::string h = expect_string(v, "sha256");
    check_hash(h, 64);
    set.sha256_hashes.insert(to_lower_ascii(h));
  }
  for (const auto& v : expect_array(doc, "ips")) {
    std::string ip = expect_string(v, "ips");
    if (!is_valid_ipv4(ip) && !is_valid_ipv6(ip)) {
      throw IocFormatException("BadIocFormat(invalid IP \"" + ip + "\")");
    }
    set.ip_addresses.insert(ip);
  }
  for (const auto& v : expect_array(doc, "ports")) {
    set.ports.insert(check_port(v));
  }
  for (const auto& v : expect_array(doc, "domains")) {
    set.domains.insert(to_lower_ascii(expect_string(v, "domains")));
  }
  for (const auto& v : expect_array(doc, "filenames")) {
    std::string name = to_lower_ascii(expect_string(v, "filenames"));
    if (std::find(set.decoy_filenames.begin(), set.decoy_filenames.end(), name) ==
        set.decoy_filenames.end()) {
      set.decoy_filenames.push_back(name);
    }
  }
  for (const auto& v : expect_array(doc, "allowlist")) {
    if (!v.is_object() || !v.contains("ip") || !v.contains("port")) {
      throw IocFormatException("BadIocFormat(allowlist entries need {ip, port})");
    }
    set.allowlist.emplace(expect_string(v.at("ip"), "allowlist"), check_port(v.at("port")));
  }
  return set;
}

IocSet load_iocs_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IocFormatException("cannot open IOC file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_iocs(buf.str(), path);
}

std::string builtin_ioc_config_text() {
  return R"ioc({
  "md5": [
    "d946e3e94fec670f9e47aca186ecaabe",
    "e18c4172329c32d8394ba0658d5212c2",
    "2fde001f4c17c8613480091fa48b55a0",
    "c1f4c9f969f955dec2465317b526b600",
    "026e8e7acb2f2a156f8afff64fd54066",
    "fb64c22d37c502bde55b19688d40c803",
    "70b8040730c62e4a52a904251fa74029",
    "3efec6ffcbfe79f71f5410eb46f1c19e",
    "b03211f6feccd3a62273368b52f6079d"
  ],
  "sha256": [
    "8cbd47119356081e70fc023d3ac78af560651e7932636adeca7bec96b09e0e95"
  ],
  "ips": [
    "93.127.133.58",
    "104.129.27.14",
    "37.221.64.134",
    "78.40.143.189",
    "45.141.58.224",
    "45.141.59.167",
    "45.141.58.33",
    "78.40.143.98",
    "84.54.51.12",
    "176.65.143.215",
    "45.141.59.72",
    "192.64.118.76"
  ],
  "ports": [1097, 17241, 19821, 21817, 23221, 27425, 8108, 16197, 19867, 28784, 30123],
  "domains": [
    "jkpolice.gov.in.kashmirattack.exposed",
    "iaf.nic.in.ministryofdefenceindia.org",
    "email.gov.in.ministryofdefenceindia.org",
    "email.gov.in.departmentofdefenceindia.link",
    "email.gov.in.departmentofdefence.de",
    "email.gov.in.briefcases.email",
    "email.gov.in.modindia.link",
    "email.gov.in.defenceindia.ltd",
    "email.gov.in.indiadefencedepartment.link",
    "email.gov.in.departmentofspace.info",
    "email.gov.in.indiangov.download",
    "indianarmy.nic.in.departmentofdefence.de",
    "indianarmy.nic.in.ministryofdefenceindia.org",
    "email.gov.in.indiandefence.work",
    "email.gov.in.drdosurvey.info"
  ],
  "filenames": [
    "Report & Update Regarding Pahalgam Terror Attack",
    "Report Update Regarding Pahalgam Terror Attack",
    "Action Points & Response by Govt Regarding Pahalgam Terror Attack",
    "J&K Police Letter",
    "ROD on Review Meeting held on 10 Apr 2025 by Secy DRDO",
    "Record of Discussion - Technical Review Meeting Notice",
    "Meeting Notice - 13th JWG meeting (India - Nepal)",
    "Agenda Points for Joint Venture Meeting at IHQ MoD",
    "DO Letter, Integrated HQ of MoD",
    "Collegiate Meeting Notice & Action Points - MoD",
    "Letter to the Raksha Mantri Office",
    "pdf",
    "Alleged Case of Sexual Harassment by Senior Army Officer",
    "Agenda Points of Meeting of Dept of Defence",
    "Action Points of Meeting of Dept of Defence",
    "Agenda Points of Meeting of External Affairs Dept"
  ],
  "allowlist": [
    {"ip": "96.17.168.104", "port": 443}
  ]
})ioc";
}

const IocSet& builtin_iocs() {
  static const IocSet set = load_iocs(builtin_ioc_config_text(), "builtin");
  return set;
}

std::vector<IocHit> match_event(const Event& e, const IocSet& iocs) {
  std::vector<IocHit> hits;
  switch (e.kind) {
    case EventKind::Process: {
      match_filename(e.process().path, iocs, hits);
      break;
    }
    case EventKind::File: {
      const auto& f = e.file();
      if (!f.md5.empty() && iocs.md5_hashes.count(f.md5)) {
        hits.push_back({IocHit::Field::Md5, f.md5, iocs.source_label});
      }
      if (!f.sha256.empty() && iocs.sha256_hashes.count(f.sha256)) {
        hits.push_back({IocHit::Field::Sha256, f.sha256, iocs.source_label});
      }
      match_filename(f.target_path, iocs, hits);
      break;
    }
    case EventKind::Socket: {
      const auto& s = e.socket();
      if (iocs.allowlist.count({s.remote_address, s.remote_port})) {
        return {};  // suppression dominates every other match
      }
      if (iocs.ip_addresses.count(s.remote_address)) {
        hits.push_back({IocHit::Field::RemoteAddress, s.remote_address, iocs.source_label});
      }
      if (iocs.ports.count(s.remote_port)) {
        hits.push_back({IocHit::Field::RemotePort, std::to_string(s.remote_port),
                        iocs.source_label});
      }
      break;
    }
  }
  return hits;
}

}  // namespace sentinel
