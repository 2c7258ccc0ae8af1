#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nocperf {

using Count = std::int64_t;

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Well-formed input that violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Loop dimensions of a convolution. N is parsed but must stay 1.
enum class Dim { N, K, C, Y, X, R, S };

inline constexpr Dim kLoopDims[] = {Dim::K, Dim::C, Dim::Y, Dim::X, Dim::R, Dim::S};

std::string_view to_string(Dim d);
std::optional<Dim> parse_dim(std::string_view s);

enum class LayerKind { Conv2D, DepthwiseConv, PointwiseConv, FullyConnected, ResidualAdd };

std::string_view to_string(LayerKind k);        // workload keyword, e.g. "DWCONV"
std::optional<LayerKind> parse_layer_kind(std::string_view s);

enum class LayerClass { Early, PointWise, FullyConnected, Residual, Late };

inline constexpr LayerClass kLayerClasses[] = {LayerClass::Early, LayerClass::PointWise,
                                               LayerClass::FullyConnected, LayerClass::Residual,
                                               LayerClass::Late};

std::string_view to_string(LayerClass c);

/// One layer. Y and X are input extents with padding already applied.
struct LayerShape {
  std::string name;
  LayerKind kind = LayerKind::Conv2D;
  Count K = 1;
  Count C = 1;
  Count Y = 1;
  Count X = 1;
  Count R = 1;
  Count S = 1;
  Count strideY = 1;
  Count strideX = 1;

  Count extent(Dim d) const;
  Count out_y() const { return (Y - R) / strideY + 1; }
  Count out_x() const { return (X - S) / strideX + 1; }

  friend bool operator==(const LayerShape&, const LayerShape&) = default;
};

/// Throws ValidationError naming the layer when an invariant fails.
void validate(const LayerShape& layer);

struct NetworkModel {
  std::string name;
  std::vector<LayerShape> layers;

  const LayerShape* find(std::string_view layer_name) const;
  friend bool operator==(const NetworkModel&, const NetworkModel&) = default;
};

NetworkModel parse_model(std::string_view text, std::string name = "model");
std::string render_model(const NetworkModel& model);

std::pair<Count, Count> output_dims(const LayerShape& layer);
Count macs(const LayerShape& layer);
LayerClass classify_layer(const LayerShape& layer, std::size_t index, const NetworkModel& network);

/// ResNet50 and MobileNetV2 at 224x224, in that order.
const std::vector<NetworkModel>& builtin_models();
const NetworkModel* find_builtin_model(std::string_view name);

}  // namespace nocperf
