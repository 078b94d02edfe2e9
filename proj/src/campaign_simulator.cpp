#include "sentinel/campaign_simulator.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "sentinel/log_ingest.hpp"

namespace sentinel {

using nlohmann::json;

namespace {

// Recorded campaign identity.
constexpr const char* kPowerpntPath =
    "C:\\Program Files\\Microsoft Office\\Root\\Office16\\POWERPNT.EXE";
constexpr const char* kSampleMd5 = "d946e3e94fec670f9e47aca186ecaabe";
constexpr const char* kC2Ip = "93.127.133.58";
constexpr int kC2Port = 19821;
constexpr const char* kPhishingIp = "37.221.64.134";
constexpr const char* kLocalAddress = "10.0.2.15";
constexpr std::int64_t kPowerpntPid = 10476;
constexpr std::int64_t kExplorerPid = 2140;
constexpr std::int64_t kRatPid = 2192;

constexpr const char* kEidPhishing1 = "753FB770-923A-42B2-9493-157103000000";
constexpr const char* kEidPhishing2 = "4DE4180B-FCFF-48E9-810E-2F3F03000000";
constexpr const char* kEidPhishing3 = "6130D1D4-DC08-41DB-9FB8-877303000000";

std::string file_eid(int n) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "5E1DF11E-0000-4000-8000-%012X", n);
  return buf;
}

std::string guid_from(std::uint64_t a, std::uint64_t b) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%08X-%04X-%04X-%04X-%012llX",
                static_cast<unsigned>(a & 0xFFFFFFFFu),
                static_cast<unsigned>((a >> 32) & 0xFFFF),
                static_cast<unsigned>((a >> 48) & 0xFFFF),
                static_cast<unsigned>(b & 0xFFFF),
                static_cast<unsigned long long>((b >> 16) & 0xFFFFFFFFFFFFull));
  return buf;
}

struct Paths {
  std::string user_root;
  std::string sample_ppam;
  std::string staging_dir;
  std::string rat_path;
  std::string temp_dir;
};

Paths paths_for(const std::string& user) {
  Paths p;
  p.user_root = "C:\\Users\\" + user + "\\";
  p.sample_ppam = p.user_root + "sample\\" + kSampleSha256 + ".ppam";
  p.staging_dir = p.user_root + "0ffice360-48\\";
  p.rat_path = p.staging_dir + "jnmxrvt hcsm.exe";
  p.temp_dir = p.user_root + "AppData\\Local\\Temp\\";
  return p;
}

Event proc_event(const ScenarioSpec& spec, std::int64_t time, ProcessAction action,
                 std::int64_t pid, std::int64_t ppid, std::string path, std::string cmdline,
                 std::string guid, std::string parent_guid, std::string eid) {
  ProcessEvent e;
  e.time = time;
  e.action = action;
  e.pid = pid;
  e.parent_pid = ppid;
  e.path = std::move(path);
  e.cmdline = std::move(cmdline);
  e.user = spec.host + "\\" + spec.user;
  e.process_guid = std::move(guid);
  e.parent_process_guid = std::move(parent_guid);
  e.eid = std::move(eid);
  return Event{EventKind::Process, e, spec.host, table_name_for(EventKind::Process)};
}

Event file_event(const ScenarioSpec& spec, std::int64_t time, FileAction action,
                 std::string target, std::string md5, std::string sha256, std::int64_t pid,
                 std::string guid, std::string process_name, std::string eid) {
  FileEvent e;
  e.time = time;
  e.action = action;
  e.eid = std::move(eid);
  e.target_path = std::move(target);
  e.md5 = std::move(md5);
  e.sha256 = std::move(sha256);
  e.pid = pid;
  e.process_guid = std::move(guid);
  e.process_name = std::move(process_name);
  return Event{EventKind::File, e, spec.host, table_name_for(EventKind::File)};
}

Event socket_event(const ScenarioSpec& spec, std::int64_t time, std::int64_t pid,
                   std::string guid, std::string process_name, std::string remote, int rport,
                   int lport, std::string eid, Protocol proto = Protocol::Tcp) {
  SocketEvent e;
  e.time = time;
  e.action = SocketAction::SocketConnect;
  e.pid = pid;
  e.process_guid = std::move(guid);
  e.process_name = std::move(process_name);
  e.family = AddressFamily::Inet;
  e.protocol = proto;
  e.local_address = kLocalAddress;
  e.local_port = lport;
  e.remote_address = std::move(remote);
  e.remote_port = rport;
  e.eid = std::move(eid);
  return Event{EventKind::Socket, e, spec.host, table_name_for(EventKind::Socket)};
}

void validate_spec(const ScenarioSpec& spec) {
  if (spec.base_time <= 0) {
    throw InvalidSpecException("base_time must be positive");
  }
  if (spec.rename && !spec.drop) {
    throw InvalidSpecException("rename stage requires drop");
  }
  if (spec.exec && !spec.rename) {
    throw InvalidSpecException("exec stage requires rename");
  }
  if (spec.c2 && !spec.exec) {
    throw InvalidSpecException("c2 stage requires exec");
  }
}

std::vector<Event> campaign_events(const ScenarioSpec& spec) {
  const bool any_stage =
      spec.drop || spec.rename || spec.exec || spec.c2 || spec.phishing_connects;
  if (!any_stage) {
    return {};
  }
  const Paths p = paths_for(spec.user);
  const std::int64_t t0 = spec.base_time;
  std::vector<Event> out;
  int feid = 1;

  // Decoy open: Office loads the add-in and stages macro resources.
  out.push_back(proc_event(spec, t0, ProcessAction::ProcCreate, kPowerpntPid, kExplorerPid,
                           kPowerpntPath,
                           "\"" + std::string(kPowerpntPath) + "\" \"" + p.sample_ppam +
                               "\" /ou",
                           kPowerpntGuid, kExplorerGuid, kEidPowerpntCreate));
  out.push_back(file_event(spec, t0 + 1, FileAction::FileCreate, p.sample_ppam, kSampleMd5,
                           kSampleSha256, kPowerpntPid, kPowerpntGuid, kPowerpntPath,
                           file_eid(feid++)));
  out.push_back(file_event(spec, t0 + 4, FileAction::FileCreate,
                           p.staging_dir + "vbaProject.bin", "", "", kPowerpntPid,
                           kPowerpntGuid, kPowerpntPath, file_eid(feid++)));
  out.push_back(file_event(spec, t0 + 4, FileAction::FileWrite,
                           p.staging_dir + "vbaProject.bin", "", "", kPowerpntPid,
                           kPowerpntGuid, kPowerpntPath, file_eid(feid++)));
  for (int i = 1; i <= 5; ++i) {
    std::string ole = p.staging_dir + "oleObject" + std::to_string(i) + ".bin";
    out.push_back(file_event(spec, t0 + 4, FileAction::FileCreate, ole, "", "", kPowerpntPid,
                             kPowerpntGuid, kPowerpntPath, file_eid(feid++)));
    out.push_back(file_event(spec, t0 + 4, FileAction::FileWrite, ole, "", "", kPowerpntPid,
                             kPowerpntGuid, kPowerpntPath, file_eid(feid++)));
  }

  if (spec.drop) {
    out.push_back(file_event(spec, t0 + 5, FileAction::FileCreate,
                             p.staging_dir + "WEISTE.jpg", "", "", kPowerpntPid,
                             kPowerpntGuid, kPowerpntPath, file_eid(feid++)));
  }
  if (spec.rename) {
    out.push_back(file_event(spec, t0 + 5, FileAction::FileRename, p.rat_path, "", "",
                             kPowerpntPid, kPowerpntGuid, kPowerpntPath, file_eid(feid++)));
  }
  if (spec.exec) {
    out.push_back(proc_event(spec, t0 + 5, ProcessAction::ProcCreate, kRatPid, kPowerpntPid,
                             p.rat_path, "\"" + p.rat_path + "\"", kRatGuid, kPowerpntGuid,
                             kEidRatCreate));
  }

  out.push_back(file_event(spec, t0 + 6, FileAction::FileWrite, p.sample_ppam, kSampleMd5,
                           kSampleSha256, kPowerpntPid, kPowerpntGuid, kPowerpntPath,
                           file_eid(feid++)));
  // Transient staging in Temp; negative controls, match no rule branch.
  out.push_back(file_event(spec, t0 + 6, FileAction::FileCreate, p.temp_dir + "wct4A2F.tmp",
                           "", "", kPowerpntPid, kPowerpntGuid, kPowerpntPath,
                           file_eid(feid++)));
  out.push_back(file_event(spec, t0 + 7, FileAction::FileCreate, p.temp_dir + "wct4B11.tmp",
                           "", "", kPowerpntPid, kPowerpntGuid, kPowerpntPath,
                           file_eid(feid++)));

  if (spec.c2) {
    out.push_back(socket_event(spec, t0 + 51, kRatPid, kRatGuid, p.rat_path, kC2Ip, kC2Port,
                               55625, kEidC2Connect));
  }
  if (spec.phishing_connects) {
    out.push_back(socket_event(spec, t0 + 56, kPowerpntPid, kPowerpntGuid, kPowerpntPath,
                               kPhishingIp, 443, 55626, kEidPhishing1));
    out.push_back(socket_event(spec, t0 + 94, kPowerpntPid, kPowerpntGuid, kPowerpntPath,
                               kPhishingIp, 443, 55643, kEidPhishing2));
    out.push_back(socket_event(spec, t0 + 109, kPowerpntPid, kPowerpntGuid, kPowerpntPath,
                               kPhishingIp, 443, 55647, kEidPhishing3));
  }
  if (spec.c2) {
    out.push_back(socket_event(spec, t0 + 114, kRatPid, kRatGuid, p.rat_path, kC2Ip, kC2Port,
                               55648, kEidC2Connect));
  }
  return out;
}

std::vector<Event> noise_events_for(const ScenarioSpec& spec) {
  std::vector<Event> out;
  if (spec.noise_events == 0) {
    return out;
  }
  std::mt19937_64 rng(spec.jitter_seed);
  const Paths p = paths_for(spec.user);
  const std::string explorer_path = "C:\\Windows\\explorer.exe";
  const std::string chrome_path =
      "C:\\Program Files\\Google\\Chrome\\Application\\chrome.exe";
  const char* benign_ips[] = {"96.17.168.104", "142.250.183.110", "23.56.112.9"};

  for (std::size_t i = 0; i < spec.noise_events; ++i) {
    const std::int64_t t = spec.base_time + static_cast<std::int64_t>(rng() % 201);
    switch (rng() % 3) {
      case 0: {
        std::string guid = guid_from(rng(), rng());
        std::int64_t pid = 1000 + static_cast<std::int64_t>(rng() % 30000);
        const char* name = (rng() % 2) ? "notepad.exe" : "svchost.exe";
        std::string path = (std::string(name) == "svchost.exe")
                               ? "C:\\Windows\\System32\\svchost.exe"
                               : "C:\\Windows\\System32\\notepad.exe";
        out.push_back(proc_event(spec, t, ProcessAction::ProcCreate, pid, kExplorerPid, path,
                                 path, guid, kExplorerGuid, guid_from(rng(), rng())));
        break;
      }
      case 1: {
        std::string target =
            p.user_root + "Documents\\notes" + std::to_string(rng() % 10000) + ".txt";
        out.push_back(file_event(spec, t, FileAction::FileWrite, target, "", "",
                                 kExplorerPid, kExplorerGuid, explorer_path,
                                 guid_from(rng(), rng())));
        break;
      }
      default: {
        const char* ip = benign_ips[rng() % 3];
        bool dns = (rng() % 4) == 0;
        out.push_back(socket_event(spec, t, 4200 + static_cast<std::int64_t>(rng() % 100),
                                   guid_from(rng(), rng()), chrome_path,
                                   dns ? "8.8.8.8" : ip, dns ? 53 : 443,
                                   49152 + static_cast<int>(rng() % 16000),
                                   guid_from(rng(), rng()),
                                   dns ? Protocol::Udp : Protocol::Tcp));
        break;
      }
    }
  }
  return out;
}

}  // namespace

std::string to_string(C2CommandName c) {
  switch (c) {
    case C2CommandName::Procl: return "procl";
    case C2CommandName::Getavs: return "getavs";
    case C2CommandName::Endpo: return "endpo";
    case C2CommandName::Cscreen: return "cscreen";
    case C2CommandName::Dowf: return "dowf";
    case C2CommandName::File: return "file";
    case C2CommandName::Info: return "info";
  }
  return "?";
}

const std::vector<C2Command>& c2_command_vocabulary() {
  static const std::vector<C2Command> vocab = {
      {C2CommandName::Procl, "Get a list of all processes"},
      {C2CommandName::Getavs, "Get a list of all processes"},
      {C2CommandName::Endpo, "Kill process based on PID"},
      {C2CommandName::Cscreen, "Get screenshot"},
      {C2CommandName::Dowf, "Download a file from C2"},
      {C2CommandName::File, "Exfiltrate a file to C2"},
      {C2CommandName::Info, "Get machine info (computer name, username, IP, OS, etc.)"},
  };
  return vocab;
}

std::vector<Event> scenario_events(const ScenarioSpec& spec) {
  validate_spec(spec);
  std::vector<Event> out = campaign_events(spec);
  std::vector<Event> noise = noise_events_for(spec);
  out.insert(out.end(), noise.begin(), noise.end());
  // Stable by time: ties keep construction order, campaign before noise.
  std::stable_sort(out.begin(), out.end(),
                   [](const Event& a, const Event& b) { return a.time() < b.time(); });
  return out;
}

std::string generate_scenario(const ScenarioSpec& spec) {
  std::string text;
  for (const Event& e : scenario_events(spec)) {
    text += serialize(e);
    text += '\n';
  }
  return text;
}

std::vector<Event> reference_events() {
  return scenario_events(ScenarioSpec{});
}

std::string generate_reference_log() {
  return generate_scenario(ScenarioSpec{});
}

C2Transcript generate_c2_transcript(const ScenarioSpec& spec) {
  validate_spec(spec);
  if (!spec.c2) {
    throw InvalidSpecException("c2 stage is disabled");
  }
  std::mt19937_64 rng(spec.jitter_seed);
  const std::int64_t window_start = spec.base_time + 51;
  const std::int64_t window_end = spec.base_time + 114;
  const auto& vocab = c2_command_vocabulary();
  auto command = [&](C2CommandName name) {
    for (const auto& c : vocab) {
      if (c.name == name) return c;
    }
    return vocab.front();
  };

  C2Transcript transcript;
  std::int64_t t = window_start;
  // Sessions open with machine enumeration.
  transcript.session.push_back({t, command(C2CommandName::Info), C2Direction::ToImplant});
  transcript.session.push_back({t + 1, command(C2CommandName::Info), C2Direction::FromImplant});
  t += 2;

  const std::size_t extra = 3 + rng() % 4;
  for (std::size_t i = 0; i < extra && t + 1 <= window_end; ++i) {
    const auto& cmd = vocab[rng() % (vocab.size() - 1)];  // anything but a second info
    transcript.session.push_back({t, cmd, C2Direction::ToImplant});
    transcript.session.push_back({t + 1, cmd, C2Direction::FromImplant});
    t += 2 + static_cast<std::int64_t>(rng() % 9);
  }
  return transcript;
}

ScenarioSpec load_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InvalidSpecException("cannot open scenario file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  json doc = json::parse(buf.str(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw InvalidSpecException("scenario file is not a JSON object: " + path);
  }
  ScenarioSpec spec;
  spec.host = doc.value("host", spec.host);
  spec.user = doc.value("user", spec.user);
  spec.base_time = doc.value("base_time", spec.base_time);
  if (auto it = doc.find("stages"); it != doc.end() && it->is_object()) {
    spec.drop = it->value("drop", spec.drop);
    spec.rename = it->value("rename", spec.rename);
    spec.exec = it->value("exec", spec.exec);
    spec.c2 = it->value("c2", spec.c2);
    spec.phishing_connects = it->value("phishing_connects", spec.phishing_connects);
  }
  spec.jitter_seed = doc.value("jitter_seed", spec.jitter_seed);
  spec.noise_events = doc.value("noise_events", spec.noise_events);
  validate_spec(spec);
  return spec;
}

}  // namespace sentinel
