#include "nocperf/oracle.hpp"

#include <algorithm>
#include <iterator>
#include <map>
#include <random>
#include <sstream>

#include "nocperf/schedule.hpp"

namespace nocperf {

namespace {

using WordSet = std::vector<Count>;  // sorted, unique

struct PeState {
  bool busy = false;
  std::array<WordSet, 3> words;  // by TensorKind
  Count macs = 0;
};

using StepState = std::vector<PeState>;

WordSet set_union(const WordSet& a, const WordSet& b) {
  WordSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

WordSet set_difference(const WordSet& a, const WordSet& b) {
  WordSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

void normalize(WordSet& s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
}

Count size(const WordSet& s) { return static_cast<Count>(s.size()); }

class Expander {
 public:
  explicit Expander(const LayerShape& l) : l_(l), g_(l) {
    aliased_ = l.kind == LayerKind::DepthwiseConv || l.kind == LayerKind::ResidualAdd;
    operands_ = l.kind == LayerKind::ResidualAdd ? 2 : 1;
    for (Dim d : kLoopDims) mac_space_ *= extent(d);
    done_.assign(static_cast<std::size_t>(mac_space_), 0);
  }

  Count extent(Dim d) const { return g_.extent[static_cast<int>(d)]; }

  // Expands one PE's tile into explicit word ids and marks its MACs done.
  PeState expand(const WorkTile& t) {
    PeState pe;
    pe.busy = true;
    const Count C = l_.C, Y = l_.Y, X = l_.X, R = l_.R, S = l_.S;
    const Count Yo = extent(Dim::Y), Xo = extent(Dim::X);
    for (Count k = t[Dim::K].lo; k < t[Dim::K].hi; ++k)
      for (Count c = t[Dim::C].lo; c < t[Dim::C].hi; ++c)
        for (Count yo = t[Dim::Y].lo; yo < t[Dim::Y].hi; ++yo)
          for (Count xo = t[Dim::X].lo; xo < t[Dim::X].hi; ++xo)
            for (Count r = t[Dim::R].lo; r < t[Dim::R].hi; ++r)
              for (Count s = t[Dim::S].lo; s < t[Dim::S].hi; ++s) {
                ++pe.macs;
                Count id = ((((k * C + c) * Yo + yo) * Xo + xo) * R + r) * S + s;
                ++done_[static_cast<std::size_t>(id)];
                const Count y = yo * l_.strideY + r, x = xo * l_.strideX + s;
                for (Count op = 0; op < operands_; ++op)
                  pe.words[0].push_back(((op * C + c) * Y + y) * X + x);
                if (l_.kind != LayerKind::ResidualAdd) pe.words[1].push_back(((k * C + c) * R + r) * S + s);
                pe.words[2].push_back(((aliased_ ? c : k) * Yo + yo) * Xo + xo);
              }
    for (auto& w : pe.words) normalize(w);
    return pe;
  }

  bool each_once() const {
    return std::all_of(done_.begin(), done_.end(), [](unsigned char n) { return n == 1; });
  }

 private:
  const LayerShape& l_;
  WorkGeometry g_;
  bool aliased_ = false;
  Count operands_ = 1;
  Count mac_space_ = 1;
  std::vector<unsigned char> done_;
};

WordSet array_union(const StepState& st, int tensor) {
  WordSet u;
  for (const auto& pe : st)
    if (pe.busy) u = set_union(u, pe.words[tensor]);
  return u;
}

// Words of `tensor` sent to move the array from state `a` to state `b`.
Count distribution(const StepState& a, const StepState& b, int tensor, Retention retention,
                   bool multicast) {
  const std::size_t n = b.size();
  if (retention == Retention::StationaryPlusHalo) {
    const WordSet before = array_union(a, tensor);
    if (multicast) return size(set_difference(array_union(b, tensor), before));
    Count sum = 0;
    for (std::size_t p = 0; p < n; ++p) sum += size(set_difference(b[p].words[tensor], before));
    return sum;
  }
  WordSet u;
  Count sum = 0;
  for (std::size_t p = 0; p < n; ++p) {
    const auto& want = b[p].words[tensor];
    if (retention == Retention::Stationary && a[p].words[tensor] == want) continue;
    sum += size(want);
    u = set_union(u, want);
  }
  return multicast ? size(u) : sum;
}

// Outputs of state `a` returned to the global buffer on the move to `b`.
Count collection(const StepState& a, const StepState& b, Retention retention) {
  Count sum = 0;
  for (std::size_t p = 0; p < a.size(); ++p) {
    if (retention != Retention::None && a[p].words[2] == b[p].words[2]) continue;
    sum += size(a[p].words[2]);
  }
  return sum;
}

Count ceil_div(Count a, Count b) { return (a + b - 1) / b; }

}  // namespace

SimResult simulate(const LayerShape& layer, const Dataflow& dataflow, const HardwareConfig& hw,
                   const OracleLimits& limits) {
  hw.validate();
  for (Dim d : kLoopDims)
    if (layer.extent(d) > limits.max_dim)
      throw Error("oracle: dim " + std::string(to_string(d)) + " of layer '" + layer.name +
                  "' exceeds the cap of " + std::to_string(limits.max_dim));
  if (hw.num_pes > limits.max_pes)
    throw Error("oracle: " + std::to_string(hw.num_pes) + " PEs exceed the cap of " +
                std::to_string(limits.max_pes));

  const BoundMapping bound = bind(dataflow, layer);
  const Retention retention = bound.dataflow.retention;
  const Schedule sched(bound, hw.num_pes);
  Expander expander(layer);
  const auto n = static_cast<std::size_t>(sched.used_pes());

  SimResult res;
  res.macs = macs(layer);
  res.pe_macs.assign(n, 0);

  auto comm = [&](Count words) { return ceil_div(words * hw.element_bytes, hw.noc_bandwidth); };
  auto distribute = [&](const StepState& a, const StepState& b) {
    return std::array<Count, 3>{distribution(a, b, 0, retention, hw.multicast),
                                distribution(a, b, 1, retention, hw.multicast), 0};
  };

  const StepState idle(n);
  std::vector<StepState> states;
  auto v = sched.first();
  do {
    StepState st(n);
    auto tiles = sched.tiles(v);
    for (std::size_t p = 0; p < n; ++p)
      if (tiles[p]) st[p] = expander.expand(*tiles[p]);
    states.push_back(std::move(st));
  } while (sched.next(v));

  res.fill_words = distribute(idle, states.front());
  for (std::size_t t = 0; t < states.size(); ++t) {
    const StepState& cur = states[t];
    SimStep step;
    Count staged = 0;
    for (int tensor = 0; tensor < 3; ++tensor) staged += size(array_union(cur, tensor));
    res.global_high_water = std::max(res.global_high_water, staged);
    for (std::size_t p = 0; p < n; ++p) {
      if (!cur[p].busy) continue;
      ++step.busy_pes;
      step.compute = std::max(step.compute, cur[p].macs);
      res.pe_macs[p] += cur[p].macs;
      Count held = 0;
      for (const auto& w : cur[p].words) held += size(w);
      res.pe_high_water = std::max(res.pe_high_water, held);
    }
    if (t + 1 < states.size()) step.words = distribute(cur, states[t + 1]);
    if (t > 0) step.words[2] = collection(states[t - 1], cur, retention);
    res.utilized_pes = std::max(res.utilized_pes, step.busy_pes);
    res.steps.push_back(step);
  }
  res.drain_words[2] = collection(states.back(), idle, Retention::None);

  res.fill_cycles = comm(res.fill_words[0] + res.fill_words[1]);
  res.drain_cycles = comm(res.drain_words[2]);
  res.total_cycles = res.fill_cycles + res.drain_cycles;
  for (const auto& s : res.steps)
    res.total_cycles += std::max(s.compute, comm(s.words[0] + s.words[1] + s.words[2]));
  for (int i = 0; i < 3; ++i) {
    res.total_words[i] = res.fill_words[i] + res.drain_words[i];
    for (const auto& s : res.steps) res.total_words[i] += s.words[i];
  }
  res.buffer_global_bytes = 2 * res.global_high_water * hw.element_bytes;
  res.buffer_pe_bytes = 2 * res.pe_high_water * hw.element_bytes;
  res.each_mac_once = expander.each_once();
  return res;
}

namespace {

std::string describe(const TileTraffic& t) {
  std::ostringstream os;
  os << "compute " << t.compute << ", words " << t.words[0] << '/' << t.words[1] << '/' << t.words[2];
  return os.str();
}

}  // namespace

CompareReport compare(const LayerAnalysis& a, const SimResult& sim) {
  CompareReport rep;
  auto fail = [&](Phase phase, std::string detail) {
    if (!rep.pass) return;
    rep.pass = false;
    rep.phase = phase;
    rep.detail = std::move(detail);
  };

  const auto& prof = a.profile;
  if (prof.fill.words != sim.fill_words || a.fill_cycles != sim.fill_cycles)
    fail(Phase::First, "first tile: analytical " + describe(prof.fill) + ", " +
                           std::to_string(a.fill_cycles) + " cycles; simulated " +
                           std::to_string(sim.fill_words[0]) + '/' + std::to_string(sim.fill_words[1]) +
                           ", " + std::to_string(sim.fill_cycles) + " cycles");

  // Steady steps as a histogram of (compute, words).
  std::map<std::pair<Count, std::array<Count, 3>>, Count> want, got;
  for (const auto& s : sim.steps) ++got[{s.compute, s.words}];
  for (const auto& c : prof.steady) want[{c.compute, c.words}] += c.occurrences;
  if (want != got) {
    std::ostringstream os;
    for (const auto& s : sim.steps) {
      if (want.count({s.compute, s.words})) continue;
      os << "simulated step with compute " << s.compute << ", words " << s.words[0] << '/'
         << s.words[1] << '/' << s.words[2] << " has no analytical class";
      break;
    }
    if (os.str().empty()) os << "step class occurrence counts differ";
    fail(Phase::Steady, os.str());
  }
  if (a.steps != static_cast<Count>(sim.steps.size()))
    fail(Phase::Steady, "step count " + std::to_string(a.steps) + " vs " + std::to_string(sim.steps.size()));

  if (prof.drain.words != sim.drain_words || a.drain_cycles != sim.drain_cycles)
    fail(Phase::Last, "last collection: analytical " + describe(prof.drain) + ", simulated " +
                          std::to_string(sim.drain_words[2]) + " words");

  if (a.total_cycles != sim.total_cycles)
    fail(Phase::Steady, "total cycles " + std::to_string(a.total_cycles) + " vs " +
                            std::to_string(sim.total_cycles));
  if (prof.total_words != sim.total_words) fail(Phase::Steady, "per-tensor traffic totals differ");
  if (a.utilized_pes != sim.utilized_pes)
    fail(Phase::First, "utilized PEs " + std::to_string(a.utilized_pes) + " vs " +
                           std::to_string(sim.utilized_pes));
  if (a.buffer_global_bytes != sim.buffer_global_bytes || a.buffer_pe_bytes != sim.buffer_pe_bytes)
    fail(Phase::Steady, "buffer high-water differs");
  if (a.macs != sim.macs || !sim.each_mac_once) fail(Phase::Steady, "MAC coverage differs");
  return rep;
}

OracleCase random_case(std::uint64_t seed, Count max_dim, Count max_pes) {
  std::mt19937_64 rng(seed);
  auto pick = [&](Count lo, Count hi) { return std::uniform_int_distribution<Count>(lo, hi)(rng); };
  OracleCase c;
  LayerShape& l = c.layer;
  l.name = "case" + std::to_string(seed);
  l.kind = static_cast<LayerKind>(pick(0, 4));
  l.C = pick(1, max_dim);
  l.K = pick(1, max_dim);
  l.Y = pick(1, max_dim);
  l.X = pick(1, max_dim);
  l.R = pick(1, l.Y);
  l.S = pick(1, l.X);
  l.strideY = pick(1, 2);
  l.strideX = pick(1, 2);
  switch (l.kind) {
    case LayerKind::DepthwiseConv: l.K = l.C; break;
    case LayerKind::PointwiseConv: l.R = l.S = 1; break;
    case LayerKind::FullyConnected:
      l.R = l.Y;
      l.S = l.X;
      break;
    case LayerKind::ResidualAdd:
      l.K = l.C;
      l.R = l.S = 1;
      l.strideY = l.strideX = 1;
      break;
    case LayerKind::Conv2D: break;
  }
  validate(l);
  c.hw.num_pes = pick(1, max_pes);
  c.hw.noc_bandwidth = pick(1, 32);
  c.hw.multicast = pick(0, 3) != 0;
  c.hw.element_bytes = pick(1, 2);
  return c;
}

}  // namespace nocperf
