#include <doctest.h>

#include <numeric>
#include <random>

#include "nocperf/oracle.hpp"

using namespace nocperf;

namespace {

const Dataflow& df(std::string_view name) { return *find_builtin_dataflow(name); }

HardwareConfig array(Count pes, Count bw = 4) {
  HardwareConfig hw;
  hw.num_pes = pes;
  hw.noc_bandwidth = bw;
  return hw;
}

}  // namespace

TEST_CASE("a single MAC") {
  LayerShape l{.name = "one"};
  for (const auto& d : builtin_dataflows()) {
    auto sim = simulate(l, d, array(8));
    CHECK(sim.macs == 1);
    CHECK(std::accumulate(sim.pe_macs.begin(), sim.pe_macs.end(), Count{0}) == 1);
    CHECK(sim.utilized_pes == 1);
    CHECK(sim.each_mac_once);
  }
}

TEST_CASE("NLR toy layer on two PEs") {
  LayerShape l{.name = "toy", .K = 1, .C = 2, .Y = 3, .X = 3};
  auto sim = simulate(l, df("NLR"), array(2, 4));
  CHECK(sim.pe_macs == std::vector<Count>{9, 9});
  REQUIRE(sim.steps.size() == 9);
  // Every step sends two inputs and two weights; each PE returns one partial.
  CHECK(sim.fill_words == std::array<Count, 3>{2, 2, 0});
  CHECK(sim.steps[0].words == std::array<Count, 3>{2, 2, 0});
  CHECK(sim.steps[4].words == std::array<Count, 3>{2, 2, 2});
  CHECK(sim.steps[8].words == std::array<Count, 3>{0, 0, 2});
  CHECK(sim.drain_words[2] == 2);
  // fill 1 + step0 max(1,1) + 7 x max(1,2) + step8 max(1,1) + drain 1
  CHECK(sim.total_cycles == 18);
  CHECK(sim.buffer_pe_bytes == 2 * 3);
}

TEST_CASE("depthwise MAC count") {
  LayerShape l{.name = "dw", .kind = LayerKind::DepthwiseConv, .K = 2, .C = 2, .Y = 3, .X = 3, .R = 2, .S = 2};
  for (const auto& d : builtin_dataflows()) {
    auto sim = simulate(l, d, array(4));
    CHECK(std::accumulate(sim.pe_macs.begin(), sim.pe_macs.end(), Count{0}) == 32);
    CHECK(sim.each_mac_once);
  }
}

TEST_CASE("overlapping windows multicast once") {
  // Eight output columns across eight PEs, 3-wide windows at offset 1.
  LayerShape l{.name = "row", .K = 1, .C = 1, .Y = 1, .X = 10, .R = 1, .S = 3};
  auto on = simulate(l, df("WS"), array(8));
  CHECK(on.utilized_pes == 8);
  CHECK(on.fill_words[0] == 10);
  auto hw = array(8);
  hw.multicast = false;
  auto off = simulate(l, df("WS"), hw);
  CHECK(off.fill_words[0] == 24);
}

TEST_CASE("residual layers move two operands and no weights") {
  LayerShape l{.name = "add", .kind = LayerKind::ResidualAdd, .K = 2, .C = 2, .Y = 2, .X = 2};
  auto sim = simulate(l, df("NLR"), array(2));
  CHECK(sim.total_words[0] == 16);
  CHECK(sim.total_words[1] == 0);
  CHECK(sim.total_words[2] == 8);
}

TEST_CASE("limits") {
  LayerShape big{.name = "big", .K = 17};
  CHECK_THROWS_AS(simulate(big, df("NLR"), array(4)), Error);
  CHECK_THROWS_AS(simulate(LayerShape{.name = "x"}, df("NLR"), array(65)), Error);
}

TEST_CASE("work conservation and determinism") {
  std::mt19937 rng(3);
  auto pick = [&](Count lo, Count hi) { return std::uniform_int_distribution<Count>(lo, hi)(rng); };
  for (int i = 0; i < 40; ++i) {
    LayerShape l{.name = "r", .K = pick(1, 5), .C = pick(1, 5), .Y = pick(1, 6), .X = pick(1, 6)};
    l.R = pick(1, l.Y);
    l.S = pick(1, l.X);
    l.strideY = pick(1, 2);
    l.strideX = pick(1, 2);
    for (const auto& d : builtin_dataflows()) {
      auto hw = array(pick(1, 8), pick(1, 16));
      auto a = simulate(l, d, hw);
      CHECK(a.each_mac_once);
      CHECK(std::accumulate(a.pe_macs.begin(), a.pe_macs.end(), Count{0}) == macs(l));
      auto b = simulate(l, d, hw);
      CHECK(a.total_cycles == b.total_cycles);
      CHECK(a.total_words == b.total_words);
      CHECK(a.pe_macs == b.pe_macs);
    }
  }
}
