#pragma once

#include <array>
#include <vector>

#include "nocperf/dataflow.hpp"
#include "nocperf/hardware.hpp"
#include "nocperf/tensor.hpp"

namespace nocperf {

enum class ReuseClass { Temporal, Spatial, SpatioTemporal, None };
std::string_view to_string(ReuseClass r);

struct Parallelism {
  Count cluster_count = 1;
  Count cluster_size = 1;
  Count utilized_pes = 1;
  Count per_pe_work_per_step = 1;  // MACs of the busiest PE in the first step
};

Parallelism parallelism(const BoundMapping& bound, const HardwareConfig& hw);

enum class Phase { First, Steady, Last };
std::string_view to_string(Phase p);

/// Words crossing the NoC in one tile step.
///
/// First: distribution of the first tile. Steady: the traffic overlapped with
/// one step's compute, i.e. distribution of the next tile plus collection of
/// the previous tile's outputs. Last: collection of the final tile.
struct TileTraffic {
  Phase phase = Phase::Steady;
  Count occurrences = 1;
  Count compute = 0;                  // cycles of the step (busiest PE)
  std::array<Count, 3> words{};       // indexed by TensorKind
  Count total() const { return words[0] + words[1] + words[2]; }
  friend bool operator==(const TileTraffic&, const TileTraffic&) = default;
};

/// Everything the timing model needs from one (layer, dataflow, array) triple.
/// Independent of NoC bandwidth and element width.
struct TrafficProfile {
  Count macs = 0;
  Count steps = 0;
  Parallelism parallelism;
  TileTraffic fill;
  TileTraffic drain;
  std::vector<TileTraffic> steady;  // one entry per distinct step class
  std::array<Count, 3> total_words{};
  Count global_tile_words = 0;  // most words staged for the array in one step
  Count pe_tile_words = 0;      // most words held by one PE in one step
  std::array<ReuseClass, 3> reuse{ReuseClass::None, ReuseClass::None, ReuseClass::None};
};

TrafficProfile traffic_profile(const BoundMapping& bound, const HardwareConfig& hw);

/// Traffic of the requested phase. Steady returns one entry per step class
/// with its number of occurrences.
std::vector<TileTraffic> tile_traffic(const BoundMapping& bound, const HardwareConfig& hw, Phase phase);

ReuseClass reuse_class(const BoundMapping& bound, TensorKind tensor,
                       const HardwareConfig& hw = HardwareConfig{});

}  // namespace nocperf
