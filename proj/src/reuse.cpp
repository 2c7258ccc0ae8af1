#include "nocperf/reuse.hpp"

#include <algorithm>
#include <map>
#include <memory>

#include "nocperf/index_set.hpp"
#include "nocperf/schedule.hpp"

namespace nocperf {

std::string_view to_string(ReuseClass r) {
  switch (r) {
    case ReuseClass::Temporal: return "temporal";
    case ReuseClass::Spatial: return "spatial";
    case ReuseClass::SpatioTemporal: return "spatio-temporal";
    case ReuseClass::None: return "none";
  }
  return "?";
}

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::First: return "First";
    case Phase::Steady: return "Steady";
    case Phase::Last: return "Last";
  }
  return "?";
}

namespace {

constexpr int kIn = 0, kW = 1, kOut = 2;

// Footprint of every PE in one step. Idle PEs hold empty boxes.
struct StepData {
  std::vector<std::array<Box, 3>> pe;
  std::vector<Count> volume[3];  // per PE
  Count compute = 0;
  Count union_words[3] = {0, 0, 0};
  Count sum_words[3] = {0, 0, 0};
  Count max_pe_words = 0;
};

class FootprintBuilder {
 public:
  explicit FootprintBuilder(const LayerShape& l)
      : l_(l),
        aliased_(l.kind == LayerKind::DepthwiseConv || l.kind == LayerKind::ResidualAdd),
        operands_(l.kind == LayerKind::ResidualAdd ? 2 : 1) {}

  std::array<Box, 3> boxes(const WorkTile& t) const {
    std::array<Box, 3> b;
    b[kIn].axis = {IntervalSet(Range{0, operands_}), IntervalSet(t[Dim::C]),
                   IntervalSet::strided_sum(t[Dim::Y], l_.strideY, t[Dim::R]),
                   IntervalSet::strided_sum(t[Dim::X], l_.strideX, t[Dim::S])};
    if (l_.kind != LayerKind::ResidualAdd)
      b[kW].axis = {IntervalSet(t[Dim::K]), IntervalSet(t[Dim::C]), IntervalSet(t[Dim::R]),
                    IntervalSet(t[Dim::S])};
    b[kOut].axis = {IntervalSet(aliased_ ? t[Dim::C] : t[Dim::K]), IntervalSet(t[Dim::Y]),
                    IntervalSet(t[Dim::X]), IntervalSet::point(0)};
    for (auto& box : b)
      if (box.empty()) box = Box{};
    return b;
  }

 private:
  const LayerShape& l_;
  bool aliased_;
  Count operands_;
};

Count union_of(const StepData& s, int tensor, const std::vector<char>* only = nullptr) {
  std::vector<const Box*> boxes;
  boxes.reserve(s.pe.size());
  for (std::size_t p = 0; p < s.pe.size(); ++p)
    if (!only || (*only)[p]) boxes.push_back(&s.pe[p][tensor]);
  return union_volume(boxes);
}

// Volume of `b` that lies inside the union of `a`'s boxes.
Count covered(const Box& b, const StepData& a, int tensor) {
  std::vector<Box> parts;
  for (const auto& pe : a.pe) {
    const Box& other = pe[tensor];
    Box cut;
    bool empty = false;
    for (int i = 0; i < Box::kRank && !empty; ++i) {
      cut.axis[i] = b.axis[i].intersect(other.axis[i]);
      empty = cut.axis[i].empty();
    }
    if (empty) continue;
    if (cut == b) return b.volume();  // one box already holds all of b
    parts.push_back(std::move(cut));
  }
  return union_volume(parts);
}

struct TransferCounts {
  Count words[3] = {0, 0, 0};
  bool resident[3] = {false, false, false};  // some PE kept a non-empty tile
  bool halo_saves[3] = {false, false, false};  // halo beat plain residency
};

class Engine {
 public:
  Engine(const BoundMapping& bound, const HardwareConfig& hw)
      : bound_(bound),
        hw_(hw),
        sched_(bound, hw.num_pes),
        builder_(bound.layer),
        retention_(bound.dataflow.retention),
        idle_(make_idle()) {
    // Fold digits of a level with several spatial directives page a
    // row-major grid, so their values are not translates of each other.
    const auto& digits = sched_.digits();
    exhaustive_.assign(digits.size(), false);
    for (std::size_t d = 0; d < digits.size(); ++d) {
      if (!digits[d].fold) continue;
      int spatial = 0;
      for (const auto& dir : bound.directives)
        spatial += dir.kind == MapKind::Spatial && dir.level == digits[d].level;
      exhaustive_[d] = spatial > 1;
    }
  }

  TrafficProfile run() {
    profile_.macs = macs(bound_.layer);
    profile_.parallelism.cluster_count = sched_.cluster_count();
    profile_.parallelism.cluster_size = sched_.cluster_size();
    profile_.parallelism.utilized_pes = sched_.used_pes();
    profile_.fill.phase = Phase::First;
    profile_.drain.phase = Phase::Last;

    std::vector<Count> v(sched_.digits().size(), 0);
    walk(v, 0, 1);

    for (const auto& [key, occ] : classes_) {
      TileTraffic t;
      t.phase = Phase::Steady;
      t.occurrences = occ;
      t.compute = key.first;
      t.words = key.second;
      profile_.steady.push_back(t);
    }
    for (int i = 0; i < 3; ++i) profile_.total_words[i] += profile_.fill.words[i] + profile_.drain.words[i];
    profile_.parallelism.per_pe_work_per_step = step(sched_.first()).compute;

    for (int t = 0; t < 3; ++t) {
      ReuseClass r = ReuseClass::None;
      if (spatial_[t] && t != kOut) r = ReuseClass::Spatial;
      else if (spatiotemporal_[t]) r = ReuseClass::SpatioTemporal;
      else if (temporal_[t] && retention_ != Retention::None) r = ReuseClass::Temporal;
      profile_.reuse[t] = r;
    }
    return profile_;
  }

 private:
  std::shared_ptr<const StepData> make_idle() const {
    auto s = std::make_shared<StepData>();
    s->pe.assign(static_cast<std::size_t>(sched_.used_pes()), {});
    for (auto& v : s->volume) v.assign(s->pe.size(), 0);
    return s;
  }

  const StepData& step(const std::vector<Count>& v) {
    auto it = cache_.find(v);
    if (it != cache_.end()) return *it->second;
    auto s = std::make_shared<StepData>();
    auto tiles = sched_.tiles(v);
    s->pe.resize(tiles.size());
    for (auto& vol : s->volume) vol.assign(tiles.size(), 0);
    for (std::size_t p = 0; p < tiles.size(); ++p) {
      if (!tiles[p]) continue;
      s->pe[p] = builder_.boxes(*tiles[p]);
      s->compute = std::max(s->compute, tiles[p]->macs());
      Count held = 0;
      for (int t = 0; t < 3; ++t) {
        s->volume[t][p] = s->pe[p][t].volume();
        s->sum_words[t] += s->volume[t][p];
        held += s->volume[t][p];
      }
      s->max_pe_words = std::max(s->max_pe_words, held);
    }
    for (int t = 0; t < 3; ++t) s->union_words[t] = union_of(*s, t);
    return *cache_.emplace(v, std::move(s)).first->second;
  }

  Count distribute(const StepData& a, const StepData& b, int t, TransferCounts& out) const {
    const std::size_t n = b.pe.size();
    std::vector<char> changed(n, 0);
    Count changed_sum = 0;
    for (std::size_t p = 0; p < n; ++p) {
      const bool same = a.pe[p][t] == b.pe[p][t];
      if (same && b.volume[t][p] > 0) out.resident[t] = true;
      if (!same) {
        changed[p] = 1;
        changed_sum += b.volume[t][p];
      }
    }
    switch (retention_) {
      case Retention::None: return hw_.multicast ? b.union_words[t] : b.sum_words[t];
      case Retention::Stationary: return hw_.multicast ? union_of(b, t, &changed) : changed_sum;
      case Retention::StationaryPlusHalo: break;
    }
    Count halo = 0;
    if (hw_.multicast) {
      std::vector<const Box*> both;
      for (std::size_t p = 0; p < n; ++p) {
        both.push_back(&a.pe[p][t]);
        both.push_back(&b.pe[p][t]);
      }
      halo = union_volume(both) - a.union_words[t];
    } else {
      for (std::size_t p = 0; p < n; ++p)
        if (b.volume[t][p] > 0) halo += b.volume[t][p] - covered(b.pe[p][t], a, t);
    }
    const Count resident_only = hw_.multicast ? union_of(b, t, &changed) : changed_sum;
    if (halo < resident_only) out.halo_saves[t] = true;
    return halo;
  }

  Count collect(const StepData& a, const StepData& b, TransferCounts& out) const {
    Count sum = 0;
    for (std::size_t p = 0; p < a.pe.size(); ++p) {
      const bool same = a.pe[p][kOut] == b.pe[p][kOut];
      if (same && a.volume[kOut][p] > 0) out.resident[kOut] = true;
      if (retention_ != Retention::None && same) continue;
      sum += a.volume[kOut][p];
    }
    return sum;
  }

  TransferCounts transfer(const StepData& a, const StepData& b, bool dist, bool coll) {
    TransferCounts c;
    if (dist) {
      c.words[kIn] = distribute(a, b, kIn, c);
      c.words[kW] = distribute(a, b, kW, c);
    }
    if (coll) c.words[kOut] = collect(a, b, c);
    for (int t = 0; t < 3; ++t) {
      temporal_[t] = temporal_[t] || c.resident[t];
      spatiotemporal_[t] = spatiotemporal_[t] || c.halo_saves[t];
    }
    return c;
  }

  // Visits one representative per class of digit values, weighted by the
  // number of steps it stands for. Interior values of a digit behave alike;
  // the first, second-to-last and last values are visited explicitly.
  void walk(std::vector<Count>& v, std::size_t d, Count weight) {
    if (d == v.size()) {
      leaf(v, weight);
      return;
    }
    const Count n = sched_.digit_extent(d, v);
    auto visit = [&](Count value, Count count) {
      v[d] = value;
      walk(v, d + 1, weight * count);
    };
    if (exhaustive_[d] || n <= 4) {
      for (Count value = 0; value < n; ++value) visit(value, 1);
    } else {
      visit(0, 1);
      visit(1, n - 3);
      visit(n - 2, 1);
      visit(n - 1, 1);
    }
    v[d] = 0;
  }

  // Maps a step onto the representative of its class. The first value of a
  // digit behaves like an interior one unless every inner digit is also at
  // its first value (then the previous step crosses this digit); likewise
  // the second-to-last value unless every inner digit is at its last value.
  std::vector<Count> canonical(const std::vector<Count>& v) const {
    const std::size_t k = v.size();
    std::vector<Count> extent(k);
    for (std::size_t d = 0; d < k; ++d) extent[d] = sched_.digit_extent(d, v);
    std::vector<Count> c = v;
    bool inner_first = true, inner_last = true;
    for (std::size_t d = k; d-- > 0;) {
      const Count n = extent[d];
      if (!exhaustive_[d] && n >= 4) {
        if (v[d] == 0 && !inner_first) c[d] = 1;
        if (v[d] == n - 2 && !inner_last) c[d] = 1;
      }
      inner_first = inner_first && v[d] == 0;
      inner_last = inner_last && v[d] == n - 1;
    }
    return c;
  }

  struct LeafResult {
    Count compute = 0;
    std::array<Count, 3> words{};
  };

  void leaf(const std::vector<Count>& v, Count weight) {
    auto key = canonical(v);
    auto it = leaves_.find(key);
    if (it == leaves_.end()) it = leaves_.emplace(key, evaluate_leaf(key)).first;
    const LeafResult& r = it->second;
    profile_.steps += weight;
    for (int t = 0; t < 3; ++t) profile_.total_words[t] += weight * r.words[t];
    classes_[{r.compute, r.words}] += weight;
  }

  LeafResult evaluate_leaf(const std::vector<Count>& v) {
    const StepData& cur = step(v);
    profile_.global_tile_words =
        std::max(profile_.global_tile_words, cur.union_words[0] + cur.union_words[1] + cur.union_words[2]);
    profile_.pe_tile_words = std::max(profile_.pe_tile_words, cur.max_pe_words);
    for (int t = 0; t < 3; ++t)
      if (cur.sum_words[t] > cur.union_words[t]) spatial_[t] = true;

    auto prev_v = v, next_v = v;
    const bool has_prev = sched_.prev(prev_v);
    const bool has_next = sched_.next(next_v);
    LeafResult r;
    r.compute = cur.compute;
    if (has_next) {
      const StepData& nxt = step(next_v);
      auto c = transfer(cur, nxt, true, false);
      r.words[kIn] = c.words[kIn];
      r.words[kW] = c.words[kW];
    } else {
      auto c = transfer(cur, *idle_, false, true);
      profile_.drain.words[kOut] = c.words[kOut];
      profile_.drain.occurrences = 1;
    }
    if (has_prev) {
      const StepData& prv = step(prev_v);
      r.words[kOut] = transfer(prv, cur, false, true).words[kOut];
    } else {
      auto c = transfer(*idle_, cur, true, false);
      profile_.fill.words = {c.words[kIn], c.words[kW], 0};
      profile_.fill.occurrences = 1;
    }
    return r;
  }

  const BoundMapping& bound_;
  const HardwareConfig& hw_;
  Schedule sched_;
  FootprintBuilder builder_;
  Retention retention_;
  std::shared_ptr<const StepData> idle_;
  std::vector<bool> exhaustive_;
  std::map<std::vector<Count>, std::shared_ptr<const StepData>> cache_;
  std::map<std::vector<Count>, LeafResult> leaves_;
  std::map<std::pair<Count, std::array<Count, 3>>, Count> classes_;
  TrafficProfile profile_;
  bool spatial_[3] = {false, false, false};
  bool temporal_[3] = {false, false, false};
  bool spatiotemporal_[3] = {false, false, false};
};

}  // namespace

Parallelism parallelism(const BoundMapping& bound, const HardwareConfig& hw) {
  hw.validate();
  Schedule sched(bound, hw.num_pes);
  Parallelism p;
  p.cluster_count = sched.cluster_count();
  p.cluster_size = sched.cluster_size();
  p.utilized_pes = sched.used_pes();
  p.per_pe_work_per_step = 0;
  for (const auto& t : sched.tiles(sched.first()))
    if (t) p.per_pe_work_per_step = std::max(p.per_pe_work_per_step, t->macs());
  return p;
}

TrafficProfile traffic_profile(const BoundMapping& bound, const HardwareConfig& hw) {
  hw.validate();
  return Engine(bound, hw).run();
}

std::vector<TileTraffic> tile_traffic(const BoundMapping& bound, const HardwareConfig& hw, Phase phase) {
  auto p = traffic_profile(bound, hw);
  switch (phase) {
    case Phase::First: return {p.fill};
    case Phase::Last: return {p.drain};
    case Phase::Steady: break;
  }
  return p.steady;
}

ReuseClass reuse_class(const BoundMapping& bound, TensorKind tensor, const HardwareConfig& hw) {
  return traffic_profile(bound, hw).reuse[static_cast<int>(tensor)];
}

}  // namespace nocperf
