#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "nocperf/model.hpp"

namespace nocperf {

/// Mapping size or offset. A sum of terms, each an integer coefficient times
/// one of: 1, a layer extent `|D|`, `strideY` or `strideX`.
/// Examples: `3`, `|R|`, `7+|S|`, `8*strideX`, `7*strideX+|S|`.
class SizeExpr {
 public:
  enum class Ref { One, Extent, StrideY, StrideX };
  struct Term {
    Count coeff = 1;
    Ref ref = Ref::One;
    Dim dim = Dim::N;  // meaningful for Ref::Extent
    friend bool operator==(const Term&, const Term&) = default;
  };

  SizeExpr() = default;
  static SizeExpr literal(Count n);
  static SizeExpr dim_ref(Dim d);
  static SizeExpr dim_ref_plus(Dim d, Count constant);
  static SizeExpr stride(Dim d, Count coeff = 1);  // d is Y or X

  /// Throws ParseError (line 0) on bad syntax.
  static SizeExpr parse(std::string_view text);

  bool is_literal() const;
  Count resolve(const LayerShape& layer) const;
  std::string render() const;
  const std::vector<Term>& terms() const { return terms_; }

  friend bool operator==(const SizeExpr&, const SizeExpr&) = default;

 private:
  std::vector<Term> terms_;
};

enum class MapKind { Temporal, Spatial };
enum class Retention { None, Stationary, StationaryPlusHalo };

std::string_view to_string(MapKind k);
std::string_view to_string(Retention r);

struct Directive {
  Dim dim = Dim::K;
  MapKind kind = MapKind::Temporal;
  SizeExpr size;
  SizeExpr offset;
  friend bool operator==(const Directive&, const Directive&) = default;
};

struct ClusterLevel {
  std::vector<Directive> directives;  // outermost first
  friend bool operator==(const ClusterLevel&, const ClusterLevel&) = default;
};

struct Dataflow {
  std::string name;
  std::vector<ClusterLevel> levels;  // outer level first
  Retention retention = Retention::Stationary;
  friend bool operator==(const Dataflow&, const Dataflow&) = default;
};

/// Structural checks that do not need a layer. Throws ValidationError.
void validate(const Dataflow& df);

Dataflow parse_dataflow(std::string_view text);
std::string render_dataflow(const Dataflow& df);

/// NLR, WS, ShiDiannao-OS, Eyeriss-RS, NVDLA-WS.
const std::vector<Dataflow>& builtin_dataflows();
const Dataflow* find_builtin_dataflow(std::string_view name);

/// Per-dim tile size of the dataflow against a layer, for K, C, Y, X, R, S.
/// The outermost directive on a dim decides; a one-per-PE spatial split in
/// the inner cluster level counts as the whole cluster's span.
std::vector<Count> tile_sizes(const Dataflow& df, const LayerShape& layer);

class BindError : public Error {
 public:
  using Error::Error;
};

/// A directive with literal size and offset, tagged with its cluster level.
struct BoundDirective {
  Dim dim = Dim::K;
  MapKind kind = MapKind::Temporal;
  Count size = 1;
  Count offset = 1;
  int level = 0;
  friend bool operator==(const BoundDirective&, const BoundDirective&) = default;
};

/// A dataflow resolved against one layer.
///
/// Directives are flattened in loop order (level 0 first). For depthwise and
/// residual layers the output channel is the input channel: temporal K
/// directives are dropped and spatial K directives act on C.
struct BoundMapping {
  Dataflow dataflow;  // literal sizes, after channel aliasing
  LayerShape layer;
  std::vector<BoundDirective> directives;
  std::vector<Count> steps;                 // per directive, first tile of every parent
  std::vector<Count> spatial_units;         // per level, product of spatial steps
  int levels = 1;
};

/// Iteration-space extent of a loop dim. Y and X are output extents.
Count work_extent(const LayerShape& layer, Dim d);

BoundMapping bind(const Dataflow& df, const LayerShape& layer);

}  // namespace nocperf
