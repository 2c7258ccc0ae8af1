#include <doctest.h>

#include <random>
#include <set>

#include "nocperf/model.hpp"

using namespace nocperf;

namespace {

// Literal loop nest count over valid window origins.
Count enumerate_macs(const LayerShape& l) {
  Count n = 0;
  const Count kk = l.kind == LayerKind::DepthwiseConv || l.kind == LayerKind::ResidualAdd ? 1 : l.K;
  for (Count k = 0; k < kk; ++k)
    for (Count c = 0; c < l.C; ++c)
      for (Count y = 0; y + l.R <= l.Y; y += l.strideY)
        for (Count x = 0; x + l.S <= l.X; x += l.strideX)
          for (Count r = 0; r < l.R; ++r)
            for (Count s = 0; s < l.S; ++s) ++n;
  return n;
}

}  // namespace

TEST_CASE("workload lines map onto layer shapes") {
  auto m = parse_model("conv1 CONV2D 64 3 230 230 7 7 2 2\nfc FC 1000 2048 1 1 1 1 1 1\n");
  REQUIRE(m.layers.size() == 2);
  const auto& c = m.layers[0];
  CHECK(c.kind == LayerKind::Conv2D);
  CHECK(c.K == 64);
  CHECK(c.C == 3);
  CHECK(c.Y == 230);
  CHECK(c.R == 7);
  CHECK(c.strideY == 2);
  CHECK(c.strideX == 2);
  CHECK(m.layers[1].kind == LayerKind::FullyConnected);
  CHECK(m.layers[1].Y == m.layers[1].R);
}

TEST_CASE("invalid layers are rejected with a reason") {
  try {
    parse_model("bad CONV2D 64 3 5 5 7 7 1 1\n");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("R exceeds Y") != std::string::npos);
    CHECK(std::string(e.what()).find("bad") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_model("a CONV2D 1 1 3 3 1 1 1 1\na CONV2D 1 1 3 3 1 1 1 1\n"), Error);
  CHECK_THROWS_AS(parse_model("p PWCONV 4 4 3 3 3 3 1 1\n"), Error);
  CHECK_THROWS_AS(parse_model("d DWCONV 4 8 3 3 3 3 1 1\n"), Error);
  CHECK_THROWS_AS(parse_model("f FC 4 8 3 3 1 1 1 1\n"), Error);
  try {
    parse_model("# header\n\nok CONV2D 1 1 3 3 1 1 1 1\nx CONV2D 1 1 3\n");
    FAIL("expected an error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
}

TEST_CASE("output dims") {
  LayerShape l{.name = "c", .K = 1, .C = 1, .Y = 230, .X = 230, .R = 7, .S = 7, .strideY = 2, .strideX = 2};
  CHECK(output_dims(l) == std::pair<Count, Count>{112, 112});
  l = LayerShape{.name = "c", .Y = 5, .X = 5, .R = 5, .S = 5};
  CHECK(output_dims(l).first == 1);
  l = LayerShape{.name = "c", .Y = 8, .X = 8};
  CHECK(output_dims(l).first == 8);
}

TEST_CASE("mac counts") {
  LayerShape pw{.name = "p", .kind = LayerKind::PointwiseConv, .K = 32, .C = 16, .Y = 8, .X = 8};
  CHECK(macs(pw) == 32 * 16 * 8 * 8);
  pw.Y = pw.X = 16;
  CHECK(macs(pw) == 131072);
  LayerShape fc{.name = "f", .kind = LayerKind::FullyConnected, .K = 10, .C = 4};
  CHECK(macs(fc) == 40);
  LayerShape add{.name = "a", .kind = LayerKind::ResidualAdd, .K = 4, .C = 4, .Y = 2, .X = 2};
  CHECK(macs(add) == 16);
  LayerShape dw{.name = "d", .kind = LayerKind::DepthwiseConv, .K = 2, .C = 2, .Y = 3, .X = 3, .R = 2, .S = 2};
  CHECK(macs(dw) == 32);
}

TEST_CASE("mac formula agrees with loop enumeration") {
  std::mt19937 rng(7);
  auto pick = [&](Count lo, Count hi) { return std::uniform_int_distribution<Count>(lo, hi)(rng); };
  for (int i = 0; i < 300; ++i) {
    LayerShape l{.name = "l"};
    l.kind = static_cast<LayerKind>(pick(0, 2));
    l.C = pick(1, 6);
    l.K = l.kind == LayerKind::DepthwiseConv ? l.C : pick(1, 6);
    l.Y = pick(1, 6);
    l.X = pick(1, 6);
    l.R = l.kind == LayerKind::PointwiseConv ? 1 : pick(1, l.Y);
    l.S = l.kind == LayerKind::PointwiseConv ? 1 : pick(1, l.X);
    l.strideY = pick(1, 3);
    l.strideX = pick(1, 3);
    validate(l);
    CHECK(macs(l) == enumerate_macs(l));
  }
}

TEST_CASE("builtin networks") {
  const auto& models = builtin_models();
  REQUIRE(models.size() == 2);
  const auto& resnet = *find_builtin_model("resnet50");
  const auto& mobilenet = *find_builtin_model("mobilenetv2");
  CHECK(resnet.layers.front().C == 3);
  CHECK(classify_layer(resnet.layers.front(), 0, resnet) == LayerClass::Early);

  Count total = 0;
  for (const auto& l : resnet.layers) total += macs(l);
  CHECK(total == doctest::Approx(4.1e9).epsilon(0.05));
  total = 0;
  for (const auto& l : mobilenet.layers) total += macs(l);
  CHECK(total == doctest::Approx(0.3e9).epsilon(0.05));

  std::set<LayerKind> kinds;
  std::set<LayerClass> classes;
  for (std::size_t i = 0; i < resnet.layers.size(); ++i) {
    kinds.insert(resnet.layers[i].kind);
    classes.insert(classify_layer(resnet.layers[i], i, resnet));
  }
  CHECK(kinds == std::set<LayerKind>{LayerKind::Conv2D, LayerKind::FullyConnected,
                                     LayerKind::PointwiseConv, LayerKind::ResidualAdd});
  CHECK(classes.size() == 5);

  bool late_conv5 = false;
  for (std::size_t i = 0; i < resnet.layers.size(); ++i) {
    const auto& l = resnet.layers[i];
    if (l.name.rfind("res5", 0) == 0 && l.kind == LayerKind::Conv2D) {
      CHECK(classify_layer(l, i, resnet) == LayerClass::Late);
      CHECK(std::max(l.C, l.K) >= 512);
      late_conv5 = true;
    }
  }
  CHECK(late_conv5);

  kinds.clear();
  classes.clear();
  for (std::size_t i = 0; i < mobilenet.layers.size(); ++i) {
    kinds.insert(mobilenet.layers[i].kind);
    classes.insert(classify_layer(mobilenet.layers[i], i, mobilenet));
  }
  CHECK(kinds == std::set<LayerKind>{LayerKind::Conv2D, LayerKind::DepthwiseConv,
                                     LayerKind::PointwiseConv});
  CHECK(classes.count(LayerClass::Early) == 1);
  CHECK(classes.count(LayerClass::PointWise) == 1);
  CHECK(classes.count(LayerClass::Late) == 1);
}

TEST_CASE("workload text round-trips") {
  for (const auto& m : builtin_models()) CHECK(parse_model(render_model(m), m.name) == m);
}
