#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sentinel/campaign_simulator.hpp"
#include "sentinel/report.hpp"

namespace {

int emit(const sentinel::RunReport& report, const std::string& format,
         const std::optional<std::string>& out_path) {
  std::string rendered = format == "json" ? report.to_json() : report.to_text();
  if (out_path) {
    std::ofstream out(*out_path, std::ios::binary);
    if (!out) {
      std::cerr << "cannot open output file: " << *out_path << '\n';
      return 2;
    }
    out << rendered;
    if (format == "json") out << '\n';
  } else {
    std::cout << rendered;
    if (format == "json") std::cout << '\n';
  }
  return report.exit_code;
}

int write_text(const std::string& text, const std::optional<std::string>& out_path) {
  if (out_path) {
    std::ofstream out(*out_path, std::ios::binary);
    if (!out) {
      std::cerr << "cannot open output file: " << *out_path << '\n';
      return 2;
    }
    out << text;
  } else {
    std::cout << text;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sentinel: endpoint telemetry correlation and detection engine"};
  app.require_subcommand(1);
  app.fallthrough();  // global --format/--out usable after the subcommand

  std::string format = "text";
  std::optional<std::string> out_path;
  app.add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"json", "text"}));
  app.add_option("--out", out_path, "Write output to a file instead of stdout");

  std::string log_path, seed_hash, scenario_path;
  std::optional<std::string> rules_dir, iocs_path;
  bool show_stats = false;
  std::uint64_t seed = 0;
  std::size_t noise = 0;
  bool with_transcript = false;

  auto* ingest = app.add_subcommand("ingest", "Parse a result log and report counts");
  ingest->add_option("--log", log_path, "Result log (JSON Lines)")->required();
  ingest->add_flag("--stats", show_stats, "Per-table event counts");

  auto* detect = app.add_subcommand("detect", "Evaluate detection rules and IOC matching");
  detect->add_option("--log", log_path, "Result log (JSON Lines)")->required();
  detect->add_option("--rules", rules_dir, "Directory of rule files (*.json)");
  detect->add_option("--iocs", iocs_path, "IOC config overriding the built-in corpus");

  auto* trace = app.add_subcommand("trace", "Forward-track an attack chain from a seed hash");
  trace->add_option("--log", log_path, "Result log (JSON Lines)")->required();
  trace->add_option("--seed", seed_hash, "Seed MD5 or SHA-256 hash")->required();

  auto* heuristics = app.add_subcommand("heuristics", "Run behavioral heuristics");
  heuristics->add_option("--log", log_path, "Result log (JSON Lines)")->required();

  auto* simulate = app.add_subcommand("simulate", "Generate reference or scenario telemetry");
  simulate->add_option("--scenario", scenario_path, "Scenario spec file");
  simulate->add_option("--seed", seed, "Jitter seed for noise generation");
  simulate->add_option("--noise", noise, "Benign noise event count");
  simulate->add_flag("--c2-transcript", with_transcript,
                     "Print the C2 command transcript instead of telemetry");

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest->parsed()) {
      return emit(sentinel::run_ingest(log_path, show_stats), format, out_path);
    }
    if (detect->parsed()) {
      return emit(sentinel::run_detect({log_path, rules_dir, iocs_path}), format, out_path);
    }
    if (trace->parsed()) {
      return emit(sentinel::run_trace(log_path, seed_hash), format, out_path);
    }
    if (heuristics->parsed()) {
      return emit(sentinel::run_heuristics_scan(log_path), format, out_path);
    }
    if (simulate->parsed()) {
      sentinel::ScenarioSpec spec;
      if (!scenario_path.empty()) {
        spec = sentinel::load_scenario_file(scenario_path);
      }
      if (simulate->count("--seed") > 0) spec.jitter_seed = seed;
      if (simulate->count("--noise") > 0) spec.noise_events = noise;
      if (with_transcript) {
        auto transcript = sentinel::generate_c2_transcript(spec);
        std::string text;
        for (const auto& entry : transcript.session) {
          text += sentinel::format_utc(entry.time);
          text += entry.direction == sentinel::C2Direction::ToImplant ? " -> " : " <- ";
          text += sentinel::to_string(entry.command.name);
          text += "  # " + entry.command.description + "\n";
        }
        return write_text(text, out_path);
      }
      return write_text(sentinel::generate_scenario(spec), out_path);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
