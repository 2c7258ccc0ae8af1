#pragma once

#include "nocperf/model.hpp"

namespace nocperf {

/// Accelerator parameters. Defaults: 256 PEs, 256 KiB global buffer,
/// multicast NoC, 1-byte elements, 1 GHz.
struct HardwareConfig {
  Count num_pes = 256;
  Count noc_bandwidth = 256;  // bytes per cycle
  bool multicast = true;
  Count global_buffer_bytes = 256 * 1024;
  Count pe_buffer_bytes = 1024;
  Count element_bytes = 1;
  double clock_ghz = 1.0;

  /// Throws ValidationError when a field is out of range.
  void validate() const;
};

}  // namespace nocperf
