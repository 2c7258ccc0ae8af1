#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "nocperf/dataflow.hpp"

namespace nocperf {

/// Half-open index range.
struct Range {
  Count lo = 0;
  Count hi = 0;
  Count size() const { return hi > lo ? hi - lo : 0; }
  bool empty() const { return hi <= lo; }
  friend bool operator==(const Range&, const Range&) = default;
};

/// Loop extents a mapping iterates over. Y and X are counted in output
/// positions; the input footprint is derived through stride and filter.
struct WorkGeometry {
  explicit WorkGeometry(const LayerShape& layer);

  std::array<Count, 7> extent{};  // indexed by Dim
  Count strideY = 1;
  Count strideX = 1;
  Count filterY = 1;  // full R
  Count filterX = 1;  // full S

  static bool sliding(Dim d) { return d == Dim::Y || d == Dim::X; }
  Count stride(Dim d) const { return d == Dim::Y ? strideY : strideX; }
  Count filter(Dim d) const { return d == Dim::Y ? filterY : filterX; }
};

/// What one directive instance hands down to the next directive on the same
/// dim: owned indices (outputs for Y/X) and, for Y/X, the input-row/column
/// where the current window starts.
struct DimCursor {
  Range owned;
  Count window_start = 0;
};

DimCursor root_cursor(const WorkGeometry& g, Dim d);

/// Number of positions `d` takes inside `parent`.
Count directive_steps(const BoundDirective& d, const DimCursor& parent, const WorkGeometry& g);

/// Cursor at position `index` of `d` inside `parent`; nullopt if it owns nothing.
std::optional<DimCursor> apply_directive(const BoundDirective& d, const DimCursor& parent,
                                         Count index, const WorkGeometry& g);

/// Work done by one PE during one step. Y and X ranges hold output positions.
struct WorkTile {
  std::array<Range, 7> range{};  // indexed by Dim; N unused
  const Range& operator[](Dim d) const { return range[static_cast<int>(d)]; }
  Range& operator[](Dim d) { return range[static_cast<int>(d)]; }
  Count macs() const;
  friend bool operator==(const WorkTile&, const WorkTile&) = default;
};

/// The odometer of a bound mapping on a concrete PE array.
///
/// Digits follow loop order. Each temporal directive is one digit. Each level
/// with spatial directives contributes one fold digit, placed at its first
/// spatial directive, that pages the level's flattened spatial units through
/// the PEs available to that level. A digit's radix may depend on the values
/// of outer digits (edge tiles), never on inner ones.
class Schedule {
 public:
  struct Digit {
    bool fold = false;
    int directive = -1;  // temporal: directive index; fold: first spatial directive
    int level = 0;
  };

  Schedule(const BoundMapping& mapping, Count num_pes);

  const BoundMapping& mapping() const { return mapping_; }
  const WorkGeometry& geometry() const { return geometry_; }
  Count cluster_size() const { return cluster_size_; }
  Count cluster_count() const { return cluster_count_; }
  Count used_pes() const { return cluster_size_ * cluster_count_; }

  const std::vector<Digit>& digits() const { return digits_; }
  Count digit_extent(std::size_t digit, std::span<const Count> values) const;

  std::vector<Count> first() const;
  std::vector<Count> last() const;
  bool next(std::vector<Count>& values) const;
  bool prev(std::vector<Count>& values) const;

  /// Work of every PE in the step. nullopt entries are idle PEs.
  std::vector<std::optional<WorkTile>> tiles(std::span<const Count> values) const;

 private:
  std::vector<Count> level_radices(int level, std::span<const Count> values) const;
  std::vector<Count> nominal_steps(std::span<const Count> values, std::size_t upto_digit) const;

  BoundMapping mapping_;
  WorkGeometry geometry_;
  Count num_pes_;
  Count cluster_size_ = 1;
  Count cluster_count_ = 1;
  std::vector<Digit> digits_;
  std::vector<int> digit_of_directive_;     // temporal directive -> digit, else -1
  std::vector<int> fold_digit_of_level_;    // -1 when the level has no spatial directive
  std::vector<std::vector<int>> spatial_of_level_;
};

}  // namespace nocperf
