#pragma once

#include <array>
#include <span>
#include <vector>

#include <boost/container/small_vector.hpp>

#include "nocperf/schedule.hpp"

namespace nocperf {

/// Finite set of integers held as sorted, disjoint, non-adjacent ranges.
class IntervalSet {
 public:
  IntervalSet() = default;
  explicit IntervalSet(Range r) {
    if (!r.empty()) ranges_.push_back(r);
  }
  static IntervalSet point(Count v) { return IntervalSet(Range{v, v + 1}); }

  /// { base * step + offset : base in bases, offset in offsets }
  static IntervalSet strided_sum(Range bases, Count step, Range offsets);

  bool empty() const { return ranges_.empty(); }
  Count size() const;
  bool contains(Count v) const;
  std::span<const Range> ranges() const { return {ranges_.data(), ranges_.size()}; }

  IntervalSet intersect(const IntervalSet& other) const;
  IntervalSet unite(const IntervalSet& other) const;
  IntervalSet subtract(const IntervalSet& other) const;

  friend bool operator==(const IntervalSet& a, const IntervalSet& b) {
    return std::equal(a.ranges_.begin(), a.ranges_.end(), b.ranges_.begin(), b.ranges_.end());
  }
  friend bool operator<(const IntervalSet& a, const IntervalSet& b);

 private:
  void push(Range r);  // append, r.lo >= last.lo
  boost::container::small_vector<Range, 2> ranges_;
};

/// Cartesian product of four coordinate sets. Every tensor footprint is a box.
struct Box {
  static constexpr int kRank = 4;
  std::array<IntervalSet, kRank> axis;

  bool empty() const;
  Count volume() const;
  Box intersect(const Box& other) const;

  friend bool operator==(const Box&, const Box&) = default;
  friend bool operator<(const Box& a, const Box& b) { return a.axis < b.axis; }
};

/// Exact number of points covered by the union of `boxes`.
Count union_volume(std::span<const Box* const> boxes);
Count union_volume(const std::vector<Box>& boxes);

}  // namespace nocperf
