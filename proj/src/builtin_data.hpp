#pragma once

#include <string_view>

namespace nocperf::detail {

// Generated at build time from data/.
extern const std::string_view kResnet50Workload;
extern const std::string_view kMobilenetV2Workload;
extern const std::string_view kBuiltinDataflows[5];

}  // namespace nocperf::detail
