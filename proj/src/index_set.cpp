#include "nocperf/index_set.hpp"

#include <algorithm>
#include <map>

namespace nocperf {

void IntervalSet::push(Range r) {
  if (r.empty()) return;
  if (!ranges_.empty() && r.lo <= ranges_.back().hi) {
    ranges_.back().hi = std::max(ranges_.back().hi, r.hi);
    return;
  }
  ranges_.push_back(r);
}

IntervalSet IntervalSet::strided_sum(Range bases, Count step, Range offsets) {
  IntervalSet out;
  if (bases.empty() || offsets.empty()) return out;
  if (step <= offsets.size()) {
    out.push({bases.lo * step + offsets.lo, (bases.hi - 1) * step + offsets.hi});
    return out;
  }
  for (Count b = bases.lo; b < bases.hi; ++b) out.push({b * step + offsets.lo, b * step + offsets.hi});
  return out;
}

Count IntervalSet::size() const {
  Count n = 0;
  for (const auto& r : ranges_) n += r.size();
  return n;
}

bool IntervalSet::contains(Count v) const {
  auto it = std::upper_bound(ranges_.begin(), ranges_.end(), v,
                             [](Count x, const Range& r) { return x < r.hi; });
  return it != ranges_.end() && it->lo <= v;
}

IntervalSet IntervalSet::intersect(const IntervalSet& other) const {
  IntervalSet out;
  auto a = ranges_.begin(), b = other.ranges_.begin();
  while (a != ranges_.end() && b != other.ranges_.end()) {
    Range r{std::max(a->lo, b->lo), std::min(a->hi, b->hi)};
    out.push(r);
    if (a->hi < b->hi) ++a;
    else ++b;
  }
  return out;
}

IntervalSet IntervalSet::unite(const IntervalSet& other) const {
  IntervalSet out;
  auto a = ranges_.begin(), b = other.ranges_.begin();
  while (a != ranges_.end() || b != other.ranges_.end()) {
    if (b == other.ranges_.end() || (a != ranges_.end() && a->lo <= b->lo)) out.push(*a++);
    else out.push(*b++);
  }
  return out;
}

IntervalSet IntervalSet::subtract(const IntervalSet& other) const {
  IntervalSet out;
  auto b = other.ranges_.begin();
  for (Range r : ranges_) {
    while (b != other.ranges_.end() && b->hi <= r.lo) ++b;
    auto c = b;
    Count lo = r.lo;
    while (c != other.ranges_.end() && c->lo < r.hi) {
      out.push({lo, std::min(c->lo, r.hi)});
      lo = std::max(lo, c->hi);
      ++c;
    }
    out.push({lo, r.hi});
  }
  return out;
}

bool operator<(const IntervalSet& a, const IntervalSet& b) {
  return std::lexicographical_compare(
      a.ranges_.begin(), a.ranges_.end(), b.ranges_.begin(), b.ranges_.end(),
      [](const Range& x, const Range& y) { return x.lo != y.lo ? x.lo < y.lo : x.hi < y.hi; });
}

bool Box::empty() const {
  return std::any_of(axis.begin(), axis.end(), [](const IntervalSet& s) { return s.empty(); });
}

Count Box::volume() const {
  Count v = 1;
  for (const auto& s : axis) v *= s.size();
  return v;
}

Box Box::intersect(const Box& other) const {
  Box out;
  for (int i = 0; i < kRank; ++i) out.axis[i] = axis[i].intersect(other.axis[i]);
  return out;
}

namespace {

Count tail_volume(const Box& b, int dim) {
  Count v = 1;
  for (int i = dim; i < Box::kRank; ++i) v *= b.axis[i].size();
  return v;
}

// Sweep `dim`, grouping elementary segments by the set of boxes covering
// them, and recurse on the remaining axes once per distinct cover.
Count klee(std::vector<const Box*>& boxes, int dim) {
  if (boxes.empty()) return 0;
  if (boxes.size() == 1) return tail_volume(*boxes.front(), dim);
  if (dim == Box::kRank - 1) {
    IntervalSet u;
    for (const Box* b : boxes) u = u.unite(b->axis[dim]);
    return u.size();
  }

  struct Event {
    Count at;
    int box;
    bool open;
  };
  std::vector<Event> events;
  for (int i = 0; i < static_cast<int>(boxes.size()); ++i)
    for (const Range& r : boxes[i]->axis[dim].ranges()) {
      events.push_back({r.lo, i, true});
      events.push_back({r.hi, i, false});
    }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.at < b.at; });

  std::vector<char> active(boxes.size(), 0);
  int active_count = 0;
  std::map<std::vector<int>, Count> memo;
  Count total = 0;
  std::size_t e = 0;
  while (e < events.size()) {
    const Count at = events[e].at;
    while (e < events.size() && events[e].at == at) {
      const Event& ev = events[e++];
      active[ev.box] = ev.open;
      active_count += ev.open ? 1 : -1;
    }
    if (e == events.size() || active_count == 0) continue;
    const Count width = events[e].at - at;
    std::vector<int> cover;
    cover.reserve(static_cast<std::size_t>(active_count));
    for (int i = 0; i < static_cast<int>(boxes.size()); ++i)
      if (active[i]) cover.push_back(i);
    auto it = memo.find(cover);
    if (it == memo.end()) {
      std::vector<const Box*> sub;
      sub.reserve(cover.size());
      for (int i : cover) sub.push_back(boxes[i]);
      it = memo.emplace(std::move(cover), klee(sub, dim + 1)).first;
    }
    total += width * it->second;
  }
  return total;
}

}  // namespace

Count union_volume(std::span<const Box* const> boxes) {
  std::vector<const Box*> live;
  live.reserve(boxes.size());
  for (const Box* b : boxes)
    if (!b->empty()) live.push_back(b);
  std::sort(live.begin(), live.end(), [](const Box* a, const Box* b) { return *a < *b; });
  live.erase(std::unique(live.begin(), live.end(), [](const Box* a, const Box* b) { return *a == *b; }),
             live.end());
  return klee(live, 0);
}

Count union_volume(const std::vector<Box>& boxes) {
  std::vector<const Box*> ptrs;
  ptrs.reserve(boxes.size());
  for (const auto& b : boxes) ptrs.push_back(&b);
  return union_volume(ptrs);
}

}  // namespace nocperf
