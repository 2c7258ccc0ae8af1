#include "nocperf/schedule.hpp"

#include <algorithm>

namespace nocperf {

namespace {

constexpr int idx(Dim d) { return static_cast<int>(d); }

Count ceil_div(Count a, Count b) { return (a + b - 1) / b; }

}  // namespace

WorkGeometry::WorkGeometry(const LayerShape& layer)
    : strideY(layer.strideY), strideX(layer.strideX), filterY(layer.R), filterX(layer.S) {
  extent.fill(1);
  const bool aliased =
      layer.kind == LayerKind::DepthwiseConv || layer.kind == LayerKind::ResidualAdd;
  extent[idx(Dim::K)] = aliased ? 1 : layer.K;
  extent[idx(Dim::C)] = layer.C;
  extent[idx(Dim::Y)] = layer.out_y();
  extent[idx(Dim::X)] = layer.out_x();
  extent[idx(Dim::R)] = layer.R;
  extent[idx(Dim::S)] = layer.S;
}

DimCursor root_cursor(const WorkGeometry& g, Dim d) { return {{0, g.extent[idx(d)]}, 0}; }

Count directive_steps(const BoundDirective& d, const DimCursor& parent, const WorkGeometry& g) {
  if (parent.owned.empty()) return 0;
  if (!WorkGeometry::sliding(d.dim)) return ceil_div(parent.owned.size(), d.offset);
  // Windows start every `offset` input positions from the parent window; the
  // last one must own the parent's last output.
  const Count st = g.stride(d.dim);
  return (parent.owned.size() - 1) * st / d.offset + 1;
}

std::optional<DimCursor> apply_directive(const BoundDirective& d, const DimCursor& parent,
                                         Count index, const WorkGeometry& g) {
  if (!WorkGeometry::sliding(d.dim)) {
    const Count lo = parent.owned.lo + index * d.offset;
    if (lo >= parent.owned.hi) return std::nullopt;
    return DimCursor{{lo, std::min(lo + d.offset, parent.owned.hi)}, 0};
  }
  // A window owns the outputs whose first input position falls in its first
  // `offset` positions and whose full filter footprint fits inside it.
  const Count st = g.stride(d.dim);
  const Count start = parent.window_start + index * d.offset;
  const Count first = start / st;
  const Count band = std::min(d.offset / st, (d.size - g.filter(d.dim)) / st + 1);
  Range owned{std::max(first, parent.owned.lo), std::min(first + band, parent.owned.hi)};
  if (owned.empty()) return std::nullopt;
  return DimCursor{owned, start};
}

Count WorkTile::macs() const {
  Count n = 1;
  for (Dim d : kLoopDims) n *= (*this)[d].size();
  return n;
}

// ---------------------------------------------------------------------------

Schedule::Schedule(const BoundMapping& mapping, Count num_pes)
    : mapping_(mapping), geometry_(mapping.layer), num_pes_(num_pes) {
  const auto& dirs = mapping.directives;
  const int levels = mapping.levels;
  spatial_of_level_.assign(levels, {});
  fold_digit_of_level_.assign(levels, -1);
  digit_of_directive_.assign(dirs.size(), -1);
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    const auto& d = dirs[i];
    if (d.kind == MapKind::Temporal) {
      digit_of_directive_[i] = static_cast<int>(digits_.size());
      digits_.push_back({false, static_cast<int>(i), d.level});
    } else {
      if (spatial_of_level_[d.level].empty()) {
        fold_digit_of_level_[d.level] = static_cast<int>(digits_.size());
        digits_.push_back({true, static_cast<int>(i), d.level});
      }
      spatial_of_level_[d.level].push_back(static_cast<int>(i));
    }
  }

  const Count inner_units = mapping.spatial_units[levels - 1];
  cluster_size_ = std::max<Count>(1, std::min(inner_units, num_pes));
  cluster_count_ = 1;
  if (levels == 2)
    cluster_count_ = std::max<Count>(1, std::min(num_pes / cluster_size_, mapping.spatial_units[0]));
}

std::vector<Count> Schedule::nominal_steps(std::span<const Count> values,
                                           std::size_t upto_digit) const {
  const auto& dirs = mapping_.directives;
  std::array<DimCursor, 7> cursor{};
  for (int d = 0; d < 7; ++d) cursor[d] = root_cursor(geometry_, static_cast<Dim>(d));
  std::vector<Count> steps(dirs.size(), 1);
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    auto& c = cursor[idx(dirs[i].dim)];
    steps[i] = std::max<Count>(1, directive_steps(dirs[i], c, geometry_));
    Count v = 0;
    int digit = digit_of_directive_[i];
    if (digit >= 0 && static_cast<std::size_t>(digit) < upto_digit) v = values[digit];
    if (auto next = apply_directive(dirs[i], c, v, geometry_)) c = *next;
  }
  return steps;
}

std::vector<Count> Schedule::level_radices(int level, std::span<const Count> values) const {
  const int fold = fold_digit_of_level_[level];
  auto steps = nominal_steps(values, fold < 0 ? 0 : static_cast<std::size_t>(fold));
  std::vector<Count> radices;
  for (int i : spatial_of_level_[level]) radices.push_back(steps[i]);
  return radices;
}

Count Schedule::digit_extent(std::size_t digit, std::span<const Count> values) const {
  const Digit& dg = digits_[digit];
  if (!dg.fold) return nominal_steps(values, digit)[dg.directive];
  Count units = 1;
  for (Count r : level_radices(dg.level, values)) units *= r;
  const bool inner = dg.level == mapping_.levels - 1;
  return ceil_div(units, inner ? cluster_size_ : cluster_count_);
}

std::vector<Count> Schedule::first() const { return std::vector<Count>(digits_.size(), 0); }

std::vector<Count> Schedule::last() const {
  std::vector<Count> v(digits_.size(), 0);
  for (std::size_t d = 0; d < v.size(); ++d) v[d] = digit_extent(d, v) - 1;
  return v;
}

bool Schedule::next(std::vector<Count>& values) const {
  for (std::size_t d = values.size(); d-- > 0;) {
    if (values[d] + 1 < digit_extent(d, values)) {
      ++values[d];
      std::fill(values.begin() + static_cast<std::ptrdiff_t>(d) + 1, values.end(), 0);
      return true;
    }
  }
  return false;
}

bool Schedule::prev(std::vector<Count>& values) const {
  for (std::size_t d = values.size(); d-- > 0;) {
    if (values[d] > 0) {
      --values[d];
      for (std::size_t e = d + 1; e < values.size(); ++e) values[e] = digit_extent(e, values) - 1;
      return true;
    }
  }
  return false;
}

std::vector<std::optional<WorkTile>> Schedule::tiles(std::span<const Count> values) const {
  const auto& dirs = mapping_.directives;
  const int levels = mapping_.levels;
  std::vector<std::vector<Count>> radices(levels);
  std::vector<Count> level_units(levels, 1);
  for (int l = 0; l < levels; ++l) {
    radices[l] = level_radices(l, values);
    for (Count r : radices[l]) level_units[l] *= r;
  }

  std::vector<std::optional<WorkTile>> out(static_cast<std::size_t>(used_pes()));
  std::vector<Count> coord(dirs.size(), 0);
  for (Count pe = 0; pe < used_pes(); ++pe) {
    const Count cluster = pe / cluster_size_;
    const Count unit = pe % cluster_size_;
    bool idle = false;
    for (int l = 0; l < levels && !idle; ++l) {
      const auto& spatial = spatial_of_level_[l];
      if (spatial.empty()) continue;
      const bool inner = l == levels - 1;
      const Count local = inner ? unit : cluster;
      const Count count = inner ? cluster_size_ : cluster_count_;
      Count g = values[fold_digit_of_level_[l]] * count + local;
      if (g >= level_units[l]) {
        idle = true;
        break;
      }
      // Row-major over the level's spatial directives, last one fastest.
      for (std::size_t k = spatial.size(); k-- > 0;) {
        coord[spatial[k]] = g % radices[l][k];
        g /= radices[l][k];
      }
    }
    if (idle) continue;

    std::array<DimCursor, 7> cursor{};
    for (int d = 0; d < 7; ++d) cursor[d] = root_cursor(geometry_, static_cast<Dim>(d));
    for (std::size_t i = 0; i < dirs.size() && !idle; ++i) {
      const Count v = dirs[i].kind == MapKind::Temporal ? values[digit_of_directive_[i]] : coord[i];
      auto& c = cursor[idx(dirs[i].dim)];
      auto next = apply_directive(dirs[i], c, v, geometry_);
      if (!next) idle = true;
      else c = *next;
    }
    if (idle) continue;
    WorkTile t;
    for (int d = 0; d < 7; ++d) t.range[d] = cursor[d].owned;
    out[static_cast<std::size_t>(pe)] = t;
  }
  return out;
}

}  // namespace nocperf
