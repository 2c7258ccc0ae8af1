#include <doctest.h>

#include <random>

#include "nocperf/oracle.hpp"

using namespace nocperf;

namespace {

const Dataflow& df(std::string_view name) { return *find_builtin_dataflow(name); }

const LayerShape& resnet(std::string_view layer) { return *find_builtin_model("resnet50")->find(layer); }

HardwareConfig array(Count pes, Count bw = 256, Count elem = 1) {
  HardwareConfig hw;
  hw.num_pes = pes;
  hw.noc_bandwidth = bw;
  hw.element_bytes = elem;
  return hw;
}

const LayerShape kToy{.name = "toy", .K = 1, .C = 2, .Y = 3, .X = 3};

Count sim_steady_cycles(const SimResult& sim) { return sim.total_cycles - sim.fill_cycles - sim.drain_cycles; }

}  // namespace

TEST_CASE("communication delay") {
  CHECK(comm_delay(32, array(1, 12)) == 3);
  CHECK(comm_delay(0, array(1, 12)) == 0);
  CHECK(comm_delay(256, array(1, 256)) == 1);
  CHECK(comm_delay(32, array(1, 12, 2)) == 6);
}

TEST_CASE("tile delay overlaps compute and communication") {
  CHECK(tile_delay(49, 25) == 49);
  CHECK(tile_delay(10, 10) == 10);
  CHECK(tile_delay(0, 7) == 7);
}

TEST_CASE("NLR CONV1 steady step is compute-bound at 12 B/cycle") {
  const auto hw = array(256, 12);
  const auto steady = tile_traffic(bind(df("NLR"), resnet("conv1")), hw, Phase::Steady);
  const auto bulk = std::max_element(steady.begin(), steady.end(), [](const auto& a, const auto& b) {
    return a.occurrences < b.occurrences;
  });
  CHECK(comm_delay(bulk->total(), hw) == 25);
  CHECK(tile_delay(bulk->compute, comm_delay(bulk->total(), hw)) == 49);
}

TEST_CASE("roofline of NLR on CONV1") {
  const auto a = analyze_layer(resnet("conv1"), df("NLR"), array(256));
  CHECK(a.roofline_throughput == 3.0);
  CHECK(a.utilized_pes == 3);
}

TEST_CASE("NVDLA reaches the array bound on the last stage") {
  const auto& resnet50 = *find_builtin_model("resnet50");
  for (std::size_t i = 0; i < resnet50.layers.size(); ++i) {
    const auto& l = resnet50.layers[i];
    if (classify_layer(l, i, resnet50) != LayerClass::Late) continue;
    CAPTURE(l.name);
    CHECK(analyze_layer(l, df("NVDLA-WS"), array(256)).roofline_throughput == 256.0);
  }
}

TEST_CASE("peak bandwidth of a synthetic class") {
  TrafficProfile p;
  p.macs = 8;
  p.steps = 1;
  p.steady.push_back({.phase = Phase::Steady, .occurrences = 1, .compute = 8, .words = {16, 16, 0}});
  const auto hw = array(1, 4);
  CHECK(peak_bandwidth(p, hw) == 4);
  CHECK(comm_delay(32, hw) <= 8);
  p.steady.push_back({.phase = Phase::Steady, .occurrences = 1, .compute = 0, .words = {1, 0, 0}});
  CHECK(!peak_bandwidth(p, hw).has_value());
}

TEST_CASE("average bandwidth of a single class") {
  TrafficProfile p;
  p.macs = 4;
  p.steps = 1;
  p.steady.push_back({.phase = Phase::Steady, .occurrences = 1, .compute = 4, .words = {6, 6, 0}});
  CHECK(evaluate(p, array(1, 12)).avg_bandwidth == 3.0);
}

TEST_CASE("toy layer matches the simulator") {
  for (Count bw = 1; bw <= 16; ++bw) {
    const auto hw = array(2, bw);
    const auto a = analyze_layer(kToy, df("NLR"), hw);
    const auto sim = simulate(kToy, df("NLR"), hw);
    CAPTURE(bw);
    CHECK(a.total_cycles == sim.total_cycles);
    CHECK(a.fill_cycles == sim.fill_cycles);
    CHECK(a.buffer_global_bytes == sim.buffer_global_bytes);
    Count bytes = 0;
    for (const auto& s : sim.steps) bytes += (s.words[0] + s.words[1] + s.words[2]) * hw.element_bytes;
    CHECK(a.avg_bandwidth == doctest::Approx(double(bytes) / double(sim_steady_cycles(sim))));
    CHECK(compare(a, sim).pass);
  }
  CHECK(analyze_layer(kToy, df("NLR"), array(2, 4)).total_cycles == 18);
}

TEST_CASE("peak bandwidth is where the simulator saturates") {
  std::mt19937_64 rng(3);
  std::vector<std::pair<LayerShape, HardwareConfig>> cases{{kToy, array(2)}};
  for (int i = 0; i < 12; ++i) {
    auto c = random_case(rng(), 6, 8);
    c.hw.element_bytes = 1;
    cases.emplace_back(c.layer, c.hw);
  }
  for (const auto& [layer, base] : cases) {
    for (const auto& d : builtin_dataflows()) {
      const auto peak = peak_bandwidth(layer, d, base);
      REQUIRE(peak.has_value());
      Count compute = 0;
      for (const auto& s : simulate(layer, d, base).steps) compute += s.compute;
      Count saturated = 0;
      for (Count bw = 1; bw <= 64 && !saturated; ++bw) {
        auto hw = base;
        hw.noc_bandwidth = bw;
        if (sim_steady_cycles(simulate(layer, d, hw)) == compute) saturated = bw;
      }
      CAPTURE(d.name);
      CAPTURE(layer.K);
      CHECK(saturated == *peak);
    }
  }
}

TEST_CASE("throughput is monotone and saturates at the peak") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    const auto c = random_case(rng(), 24, 64);
    for (const auto& d : builtin_dataflows()) {
      auto hw = c.hw;
      const auto profile = traffic_profile(bind(d, c.layer), hw);
      const auto peak = peak_bandwidth(profile, hw);
      double prev = 0;
      for (Count bw = 1; bw <= 256; ++bw) {
        hw.noc_bandwidth = bw;
        const auto a = evaluate(profile, hw);
        CHECK(a.throughput >= prev);
        prev = a.throughput;
        if (peak && bw >= *peak) {
          CHECK(a.throughput == a.roofline_throughput);
          CHECK(a.bound == Bound::Compute);
        }
      }
    }
  }
}

TEST_CASE("average bandwidth is flat beyond the peak") {
  const auto& layer = resnet("res2a_branch2b");
  for (const auto& d : builtin_dataflows()) {
    const auto profile = traffic_profile(bind(d, layer), array(256));
    const auto peak = peak_bandwidth(profile, array(256));
    REQUIRE(peak.has_value());
    double prev = 0;
    for (Count bw : {1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024}) {
      const double avg = evaluate(profile, array(256, bw)).avg_bandwidth;
      CHECK(avg >= prev);
      if (bw >= *peak) CHECK(avg == evaluate(profile, array(256, *peak)).avg_bandwidth);
      prev = avg;
    }
  }
}

TEST_CASE("element width scales bytes only") {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 30; ++i) {
    auto c = random_case(rng(), 12, 32);
    c.hw.element_bytes = 1;
    c.hw.noc_bandwidth = 1 << 20;
    auto wide = c.hw;
    wide.element_bytes = 2;
    for (const auto& d : builtin_dataflows()) {
      const auto profile = traffic_profile(bind(d, c.layer), c.hw);
      const auto a = evaluate(profile, c.hw);
      const auto b = evaluate(profile, wide);
      CHECK(b.steady_bytes == 2 * a.steady_bytes);
      CHECK(b.buffer_global_bytes == 2 * a.buffer_global_bytes);
      CHECK(b.buffer_pe_bytes == 2 * a.buffer_pe_bytes);
      CHECK(b.utilized_pes == a.utilized_pes);
      CHECK(b.compute_delay_total == a.compute_delay_total);
    }
  }
}

TEST_CASE("roofline never exceeds the busy PEs") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 40; ++i) {
    const auto c = random_case(rng(), 16, 64);
    for (const auto& d : builtin_dataflows()) {
      const auto a = evaluate(traffic_profile(bind(d, c.layer), c.hw), c.hw);
      CHECK(a.roofline_throughput <= double(a.utilized_pes) + 1e-9);
      CHECK(a.utilized_pes <= c.hw.num_pes);
    }
  }
}

TEST_CASE("per-PE buffers") {
  // No residency: one window of inputs and weights plus one partial, doubled.
  CHECK(analyze_layer(resnet("conv1"), df("NLR"), array(256)).buffer_pe_bytes == 2 * (49 + 49 + 1));
  // WS holds its filter window across the output walk.
  const LayerShape l{.name = "l", .K = 4, .C = 4, .Y = 10, .X = 10, .R = 3, .S = 3};
  CHECK(analyze_layer(l, df("WS"), array(16)).buffer_pe_bytes >= 2 * 9);
}

TEST_CASE("buffer overflow names the buffer") {
  const auto message = [](const HardwareConfig& hw) -> std::string {
    try {
      analyze_layer(resnet("conv1"), df("NLR"), hw);
    } catch (const BufferOverflow& e) {
      return e.what();
    }
    return "";
  };
  auto hw = array(256);
  hw.pe_buffer_bytes = 16;
  CHECK(message(hw).find("PE buffer") != std::string::npos);
  hw = array(256);
  hw.global_buffer_bytes = 64;
  CHECK(message(hw).find("global buffer") != std::string::npos);
}

TEST_CASE("FC layers are bandwidth-hungry under NLR") {
  const auto fc = analyze_layer(resnet("fc1000"), df("NLR"), array(256, 4));
  CHECK(fc.bound == Bound::Communication);
  // A conv layer with as many MACs as the FC layer.
  const LayerShape same{.name = "c", .K = 125, .C = 256, .Y = 5, .X = 5, .R = 2, .S = 2};
  REQUIRE(macs(same) == macs(resnet("fc1000")));
  CHECK(*fc.peak_bandwidth >= *peak_bandwidth(same, df("NLR"), array(256)));
}
