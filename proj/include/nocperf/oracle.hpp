#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "nocperf/perf.hpp"

namespace nocperf {

/// Reference simulator. Walks every step of the schedule, expands every MAC
/// into explicit word sets and counts transfers with plain set operations.
/// Shares the schedule with the analytical model and nothing else.

struct OracleLimits {
  Count max_dim = 16;
  Count max_pes = 64;
};

struct SimStep {
  Count compute = 0;
  std::array<Count, 3> words{};  // moved while this step computes
  Count busy_pes = 0;
};

struct SimResult {
  Count macs = 0;
  Count total_cycles = 0;
  Count fill_cycles = 0;
  Count drain_cycles = 0;
  std::array<Count, 3> fill_words{};
  std::array<Count, 3> drain_words{};
  std::array<Count, 3> total_words{};  // input and weight distributed, output collected
  std::vector<SimStep> steps;
  std::vector<Count> pe_macs;
  Count utilized_pes = 0;
  Count global_high_water = 0;  // words
  Count pe_high_water = 0;      // words
  Count buffer_global_bytes = 0;
  Count buffer_pe_bytes = 0;
  bool each_mac_once = false;
};

/// Throws Error when the layer or array exceeds `limits`.
SimResult simulate(const LayerShape& layer, const Dataflow& dataflow, const HardwareConfig& hw,
                   const OracleLimits& limits = {});

struct CompareReport {
  bool pass = true;
  Phase phase = Phase::First;  // where the first divergence sits
  std::string detail;
};

CompareReport compare(const LayerAnalysis& analysis, const SimResult& sim);

/// A random valid layer of any kind with every extent <= max_dim, and an
/// array of 1..max_pes PEs with random bandwidth and multicast setting.
struct OracleCase {
  LayerShape layer;
  HardwareConfig hw;
};
OracleCase random_case(std::uint64_t seed, Count max_dim, Count max_pes);

}  // namespace nocperf
