#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nocperf/perf.hpp"

namespace nocperf {

enum class Aggregation { PerLayer, PerClass };

struct SweepConfig {
  std::vector<NetworkModel> models;
  std::vector<Dataflow> dataflows;
  std::vector<Count> bandwidths{4, 8, 16, 32, 64, 128, 256};
  HardwareConfig hw;
  Aggregation aggregation = Aggregation::PerLayer;
  unsigned threads = 1;

  /// Throws ValidationError on empty lists or unsorted bandwidths.
  void validate() const;
};

struct SweepRow {
  std::string model;
  std::string layer;  // "*" on class aggregate rows
  std::size_t layer_index = 0;
  LayerClass layer_class = LayerClass::Early;
  std::string dataflow;
  Count bandwidth = 0;

  bool feasible = true;
  std::string error;  // why the cell is infeasible

  double throughput = 0;
  double roofline = 0;
  double avg_bandwidth = 0;
  std::optional<Count> peak_bandwidth;  // empty when unbounded
  Count utilized_pes = 0;
  Count total_cycles = 0;
  Bound bound = Bound::Compute;

  // Sums kept so rows can be aggregated exactly.
  Count macs = 0;
  Count steady_cycles = 0;
  Count compute_cycles = 0;
  Count steady_bytes = 0;
};

/// One row per (model, layer, dataflow, bandwidth), ordered by model, layer
/// index, dataflow name and bandwidth. Cells that fail to bind or overflow a
/// buffer are kept as infeasible rows. With PerClass aggregation the class
/// rows are returned instead.
std::vector<SweepRow> run_sweep(const SweepConfig& cfg);

/// Class rows: throughput is total MACs over total overlapped cycles of the
/// class's feasible layers, peak bandwidth the largest layer peak.
std::vector<SweepRow> aggregate_by_class(const std::vector<SweepRow>& rows);

std::string emit_csv(const std::vector<SweepRow>& rows);

struct Chart {
  std::string svg;
  bool empty = false;  // no feasible row for the class
};

/// Throughput and average-bandwidth panels for one class of one model, one
/// curve per dataflow, with dotted markers at each peak bandwidth.
Chart emit_chart(const std::vector<SweepRow>& rows, LayerClass layer_class, const std::string& model);

}  // namespace nocperf
