#include "nocperf/hardware.hpp"

namespace nocperf {

void HardwareConfig::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw ValidationError(std::string("hardware: ") + what + " must be >= 1");
  };
  need(num_pes >= 1, "num_pes");
  need(noc_bandwidth >= 1, "noc_bandwidth");
  need(global_buffer_bytes >= 1, "global_buffer_bytes");
  need(pe_buffer_bytes >= 1, "pe_buffer_bytes");
  need(element_bytes >= 1, "element_bytes");
  if (!(clock_ghz > 0)) throw ValidationError("hardware: clock_ghz must be positive");
}

}  // namespace nocperf
