#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "sentinel/event_model.hpp"

namespace sentinel {

/// Stage toggles and noise for scenario generation. Defaults reproduce
/// the recorded campaign exactly.
struct ScenarioSpec {
  std::string host = "DESKTOP-3DD3GTB";
  std::string user = "Itachi";
  std::int64_t base_time = 1752503624;  // first PROC_CREATE
  bool drop = true;                     // WEISTE.jpg written
  bool rename = true;                   // WEISTE.jpg -> jnmxrvt hcsm.exe
  bool exec = true;                     // RAT process created
  bool c2 = true;                       // connects to 93.127.133.58:19821
  bool phishing_connects = true;        // POWERPNT connects to :443
  std::uint64_t jitter_seed = 0;
  std::size_t noise_events = 0;
};

struct InvalidSpecException : std::runtime_error {
  explicit InvalidSpecException(const std::string& what) : std::runtime_error(what) {}
};

enum class C2CommandName { Procl, Getavs, Endpo, Cscreen, Dowf, File, Info };
std::string to_string(C2CommandName c);

struct C2Command {
  C2CommandName name;
  std::string description;
};

const std::vector<C2Command>& c2_command_vocabulary();

enum class C2Direction { ToImplant, FromImplant };

struct C2Transcript {
  struct Entry {
    std::int64_t time;
    C2Command command;
    C2Direction direction;
  };
  std::vector<Entry> session;
};

// Stable identifiers from the recorded campaign, for correlation and
// downstream tooling. File-event eids are synthetic fixtures.
inline constexpr const char* kExplorerGuid = "68C109FE-5156-11F0-B8DF-0800270D762D";
inline constexpr const char* kPowerpntGuid = "68C10DB4-5156-11F0-B8DF-0800270D762D";
inline constexpr const char* kRatGuid = "68C10DCA-5156-11F0-B8DF-0800270D762D";
inline constexpr const char* kSampleSha256 =
    "8cbd47119356081e70fc023d3ac78af560651e7932636adeca7bec96b09e0e95";
inline constexpr const char* kEidPowerpntCreate = "486C38E4-40C8-44EA-9D7D-1A2E00000000";
inline constexpr const char* kEidRatCreate = "3839A309-60F2-4D27-A3EE-8A6200000000";
inline constexpr const char* kEidC2Connect = "65D9BA08-9728-46A1-BCBA-CE0003000000";

/// The recorded campaign telemetry as typed events, ingestion order.
std::vector<Event> reference_events();

/// Same, rendered as the result-log text. Byte-identical across calls.
std::string generate_reference_log();

/// Scenario events per the toggles, with deterministic benign noise
/// interleaved. All toggles off yields a noise-only (benign) log.
/// Throws InvalidSpecException on contradictory toggles.
std::vector<Event> scenario_events(const ScenarioSpec& spec);
std::string generate_scenario(const ScenarioSpec& spec);

/// Ordered command session within the scenario's C2 window, starting
/// with machine enumeration. Requires spec.c2.
C2Transcript generate_c2_transcript(const ScenarioSpec& spec);

/// Parses a scenario JSON file (docs/scenario_format.md).
ScenarioSpec load_scenario_file(const std::string& path);

}  // namespace sentinel
