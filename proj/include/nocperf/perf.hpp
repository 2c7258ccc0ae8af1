#pragma once

#include <optional>
#include <utility>

#include "nocperf/reuse.hpp"

namespace nocperf {

/// Thrown when a mapping needs more buffer than the hardware provides.
class BufferOverflow : public Error {
 public:
  using Error::Error;
};

enum class Bound { Compute, Communication };
std::string_view to_string(Bound b);

struct LayerAnalysis {
  Count macs = 0;
  Count steps = 0;
  double roofline_throughput = 0;  // MACs per cycle
  double throughput = 0;           // MACs per cycle at the configured bandwidth
  Count compute_delay_total = 0;
  Count comm_delay_total = 0;      // fill + steady communication + drain
  Count fill_cycles = 0;
  Count steady_cycles = 0;
  Count steady_bytes = 0;          // traffic overlapped with compute
  Count drain_cycles = 0;
  Count total_cycles = 0;
  std::optional<Count> peak_bandwidth;  // bytes per cycle; empty when unbounded
  double avg_bandwidth = 0;             // bytes per cycle
  Count utilized_pes = 0;
  Count buffer_global_bytes = 0;
  Count buffer_pe_bytes = 0;
  Bound bound = Bound::Compute;
  TrafficProfile profile;
};

Count comm_delay(Count words, const HardwareConfig& hw);
Count tile_delay(Count compute_cycles, Count comm_cycles);

/// Timing of a precomputed profile at hw.noc_bandwidth. Never throws.
LayerAnalysis evaluate(const TrafficProfile& profile, const HardwareConfig& hw);

LayerAnalysis analyze_layer(const LayerShape& layer, const Dataflow& dataflow, const HardwareConfig& hw);

std::optional<Count> peak_bandwidth(const TrafficProfile& profile, const HardwareConfig& hw);
std::optional<Count> peak_bandwidth(const LayerShape& layer, const Dataflow& dataflow,
                                    const HardwareConfig& hw);
double avg_bandwidth(const LayerShape& layer, const Dataflow& dataflow, const HardwareConfig& hw);

/// (global bytes, per-PE bytes), double buffered.
std::pair<Count, Count> buffer_requirement(const BoundMapping& bound, const HardwareConfig& hw);

}  // namespace nocperf
