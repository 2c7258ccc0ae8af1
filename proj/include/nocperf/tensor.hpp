#pragma once

#include <string_view>

namespace nocperf {

/// Operand tensors. Input and Weight are distributed to the array, Output is
/// collected from it.
enum class TensorKind { Input, Weight, Output };

inline constexpr TensorKind kTensorKinds[] = {TensorKind::Input, TensorKind::Weight, TensorKind::Output};

inline std::string_view to_string(TensorKind t) {
  switch (t) {
    case TensorKind::Input: return "input";
    case TensorKind::Weight: return "weight";
    case TensorKind::Output: return "output";
  }
  return "?";
}

}  // namespace nocperf
