// Compares the OpenMP rule-evaluation path against the serial reference
// on a large simulated log, checking the outputs agree.

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <sstream>

#include "sentinel/campaign_simulator.hpp"
#include "sentinel/log_ingest.hpp"
#include "sentinel/rule_engine.hpp"

using Clock = std::chrono::steady_clock;

int main(int argc, char** argv) {
  std::size_t noise = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 500000;
  int repeats = argc > 2 ? std::atoi(argv[2]) : 3;

  sentinel::ScenarioSpec spec;
  spec.noise_events = noise;
  spec.jitter_seed = 42;
  std::istringstream log(sentinel::generate_scenario(spec));
  auto store = sentinel::ingest_log(log).store;
  auto rule = sentinel::builtin_crimson_rat_rule();
  std::cout << "events: " << store.size() << ", repeats: " << repeats << '\n';

  double serial_ms = 0.0, parallel_ms = 0.0;
  std::size_t serial_hits = 0, parallel_hits = 0;
  for (int i = 0; i < repeats; ++i) {
    auto t0 = Clock::now();
    auto serial = sentinel::eval_rule_serial(rule, store);
    auto t1 = Clock::now();
    auto parallel = sentinel::eval_rule(rule, store);
    auto t2 = Clock::now();
    serial_ms += std::chrono::duration<double, std::milli>(t1 - t0).count();
    parallel_ms += std::chrono::duration<double, std::milli>(t2 - t1).count();
    serial_hits = serial.size();
    parallel_hits = parallel.size();
    for (std::size_t k = 0; k < serial.size(); ++k) {
      if (!(serial[k].event == parallel[k].event) ||
          serial[k].matched_part != parallel[k].matched_part) {
        std::cerr << "MISMATCH at detection " << k << '\n';
        return 1;
      }
    }
  }
  std::cout << "serial:   " << serial_ms / repeats << " ms, " << serial_hits
            << " detections\n";
  std::cout << "parallel: " << parallel_ms / repeats << " ms, " << parallel_hits
            << " detections\n";
  std::cout << "speedup:  " << serial_ms / parallel_ms << "x\n";
  return 0;
}
