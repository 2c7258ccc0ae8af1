#include "nocperf/perf.hpp"

#include <algorithm>

namespace nocperf {

namespace {

Count ceil_div(Count a, Count b) { return (a + b - 1) / b; }

}  // namespace

std::string_view to_string(Bound b) { return b == Bound::Compute ? "compute" : "communication"; }

Count comm_delay(Count words, const HardwareConfig& hw) {
  return ceil_div(words * hw.element_bytes, hw.noc_bandwidth);
}

Count tile_delay(Count compute_cycles, Count comm_cycles) { return std::max(compute_cycles, comm_cycles); }

std::optional<Count> peak_bandwidth(const TrafficProfile& profile, const HardwareConfig& hw) {
  Count peak = 1;
  for (const auto& c : profile.steady) {
    const Count bytes = c.total() * hw.element_bytes;
    if (bytes == 0) continue;
    if (c.compute == 0) return std::nullopt;
    peak = std::max(peak, ceil_div(bytes, c.compute));
  }
  return peak;
}

LayerAnalysis evaluate(const TrafficProfile& profile, const HardwareConfig& hw) {
  LayerAnalysis a;
  a.macs = profile.macs;
  a.steps = profile.steps;
  a.utilized_pes = profile.parallelism.utilized_pes;
  a.fill_cycles = comm_delay(profile.fill.total(), hw);
  a.drain_cycles = comm_delay(profile.drain.total(), hw);
  a.comm_delay_total = a.fill_cycles + a.drain_cycles;
  Count& steady_bytes = a.steady_bytes;
  for (const auto& c : profile.steady) {
    const Count comm = comm_delay(c.total(), hw);
    a.compute_delay_total += c.occurrences * c.compute;
    a.comm_delay_total += c.occurrences * comm;
    a.steady_cycles += c.occurrences * tile_delay(c.compute, comm);
    steady_bytes += c.occurrences * c.total() * hw.element_bytes;
    if (comm > c.compute) a.bound = Bound::Communication;
  }
  a.total_cycles = a.fill_cycles + a.steady_cycles + a.drain_cycles;
  // Fill and drain happen once per layer and vanish at unbounded bandwidth,
  // so both rates are taken over the overlapped steps only.
  if (a.steady_cycles > 0) {
    a.throughput = static_cast<double>(a.macs) / static_cast<double>(a.steady_cycles);
    a.avg_bandwidth = static_cast<double>(steady_bytes) / static_cast<double>(a.steady_cycles);
  }
  if (a.compute_delay_total > 0)
    a.roofline_throughput = static_cast<double>(a.macs) / static_cast<double>(a.compute_delay_total);
  a.peak_bandwidth = peak_bandwidth(profile, hw);
  a.buffer_global_bytes = 2 * profile.global_tile_words * hw.element_bytes;
  a.buffer_pe_bytes = 2 * profile.pe_tile_words * hw.element_bytes;
  a.profile = profile;
  return a;
}

LayerAnalysis analyze_layer(const LayerShape& layer, const Dataflow& dataflow, const HardwareConfig& hw) {
  const auto bound = bind(dataflow, layer);
  auto a = evaluate(traffic_profile(bound, hw), hw);
  if (a.buffer_global_bytes > hw.global_buffer_bytes)
    throw BufferOverflow("global buffer: '" + dataflow.name + "' on layer '" + layer.name + "' needs " +
                         std::to_string(a.buffer_global_bytes) + " bytes, " +
                         std::to_string(hw.global_buffer_bytes) + " available");
  if (a.buffer_pe_bytes > hw.pe_buffer_bytes)
    throw BufferOverflow("PE buffer: '" + dataflow.name + "' on layer '" + layer.name + "' needs " +
                         std::to_string(a.buffer_pe_bytes) + " bytes, " +
                         std::to_string(hw.pe_buffer_bytes) + " available");
  return a;
}

std::optional<Count> peak_bandwidth(const LayerShape& layer, const Dataflow& dataflow,
                                    const HardwareConfig& hw) {
  return peak_bandwidth(traffic_profile(bind(dataflow, layer), hw), hw);
}

double avg_bandwidth(const LayerShape& layer, const Dataflow& dataflow, const HardwareConfig& hw) {
  return analyze_layer(layer, dataflow, hw).avg_bandwidth;
}

std::pair<Count, Count> buffer_requirement(const BoundMapping& bound, const HardwareConfig& hw) {
  const auto p = traffic_profile(bound, hw);
  return {2 * p.global_tile_words * hw.element_bytes, 2 * p.pe_tile_words * hw.element_bytes};
}

}  // namespace nocperf
