#include <doctest.h>

#include <sstream>

#include "chart_check.hpp"
#include "nocperf/sweep.hpp"

using namespace nocperf;

namespace {

const char* kSmallModel = R"(# one layer per class
first   CONV2D  16  3 34 34 3 3 2 2
pw      PWCONV  32 16 16 16 1 1 1 1
add     ADD     32 32 16 16 1 1 1 1
last    CONV2D 512 512 6  6 3 3 1 1
fc      FC      10 32  4  4 4 4 1 1
)";

SweepConfig small_config() {
  SweepConfig cfg;
  cfg.models.push_back(parse_model(kSmallModel, "small"));
  cfg.dataflows = builtin_dataflows();
  return cfg;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("CSV header and row count") {
  const auto cfg = small_config();
  const auto rows = run_sweep(cfg);
  CHECK(rows.size() == 5 * 5 * 7);
  const auto csv = lines(emit_csv(rows));
  REQUIRE(csv.size() == rows.size() + 1);
  CHECK(csv[0] ==
        "model,layer,class,dataflow,bw_Bpc,throughput_macs_pc,roofline_macs_pc,avg_bw_Bpc,peak_bw_Bpc,"
        "utilized_pes,total_cycles,bound");
}

TEST_CASE("row order is model, layer, dataflow name, bandwidth") {
  const auto rows = run_sweep(small_config());
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& a = rows[i - 1];
    const auto& b = rows[i];
    CHECK(std::tie(a.layer_index, a.dataflow, a.bandwidth) < std::tie(b.layer_index, b.dataflow, b.bandwidth));
  }
}

TEST_CASE("CSV is identical across runs and thread counts") {
  auto cfg = small_config();
  const auto one = emit_csv(run_sweep(cfg));
  CHECK(emit_csv(run_sweep(cfg)) == one);
  cfg.threads = 4;
  CHECK(emit_csv(run_sweep(cfg)) == one);
  cfg.aggregation = Aggregation::PerClass;
  const auto classes = emit_csv(run_sweep(cfg));
  cfg.threads = 1;
  CHECK(emit_csv(run_sweep(cfg)) == classes);
}

TEST_CASE("throughput never drops as bandwidth grows") {
  SweepConfig cfg = small_config();
  cfg.bandwidths = {4, 256};
  const auto rows = run_sweep(cfg);
  REQUIRE(rows.size() % 2 == 0);
  for (std::size_t i = 0; i < rows.size(); i += 2) {
    REQUIRE(rows[i].bandwidth == 4);
    CHECK(rows[i + 1].throughput >= rows[i].throughput);
  }
}

TEST_CASE("class rows lie between their layers") {
  const auto rows = run_sweep(small_config());
  const auto classes = aggregate_by_class(rows);
  CHECK(classes.size() == 5 * 5 * 7);
  for (const auto& c : classes) {
    double lo = 1e300, hi = 0;
    for (const auto& r : rows)
      if (r.feasible && r.layer_class == c.layer_class && r.dataflow == c.dataflow && r.bandwidth == c.bandwidth) {
        lo = std::min(lo, r.throughput);
        hi = std::max(hi, r.throughput);
      }
    if (!c.feasible) continue;
    CHECK(c.throughput >= lo - 1e-9);
    CHECK(c.throughput <= hi + 1e-9);
    CHECK(c.layer == "*");
  }
}

TEST_CASE("infeasible cells stay in the table") {
  auto cfg = small_config();
  cfg.hw.pe_buffer_bytes = 8;
  const auto rows = run_sweep(cfg);
  CHECK(rows.size() == 5 * 5 * 7);
  std::size_t infeasible = 0;
  for (const auto& r : rows) infeasible += !r.feasible;
  CHECK(infeasible > 0);
  const auto csv = emit_csv(rows);
  CHECK(csv.find(",,,,,,infeasible\n") != std::string::npos);
}

TEST_CASE("NLR on the ResNet50 FC layer is communication-bound at low bandwidth") {
  SweepConfig cfg;
  NetworkModel fc_only{"resnet50", {*find_builtin_model("resnet50")->find("fc1000")}};
  cfg.models.push_back(fc_only);
  cfg.dataflows = {*find_builtin_dataflow("NLR")};
  cfg.bandwidths = {4, 8, 16};
  for (const auto& r : run_sweep(cfg)) CHECK(r.bound == Bound::Communication);
}

TEST_CASE("chart structure") {
  const auto rows = run_sweep(small_config());
  const auto classes = aggregate_by_class(rows);
  for (LayerClass lc : kLayerClasses) {
    CAPTURE(to_string(lc));
    const auto chart = emit_chart(rows, lc, "small");
    REQUIRE(!chart.empty);
    const auto curves = chart_check::read(chart.svg);
    CHECK(curves.throughput.size() == 5);
    CHECK(curves.average.size() == 5);
    CHECK(curves.dotted);
    for (const auto& [flow, pts] : curves.throughput) {
      CAPTURE(flow);
      CHECK(chart_check::step_shaped(pts));
      const auto& peaks = curves.peaks.at(flow);
      REQUIRE(peaks.size() == 2);
      CHECK(chart_check::flat_beyond(curves.average.at(flow), peaks[1].second));
      for (const auto& c : classes)
        if (c.layer_class == lc && c.dataflow == flow && c.feasible)
          CHECK(peaks[0].first == (c.peak_bandwidth ? std::to_string(*c.peak_bandwidth) : "inf"));
    }
  }
  // Class rows chart the same as layer rows.
  CHECK(emit_chart(classes, LayerClass::Late, "small").svg == emit_chart(rows, LayerClass::Late, "small").svg);
}

TEST_CASE("empty class is flagged") {
  const auto rows = run_sweep(small_config());
  CHECK(emit_chart(rows, LayerClass::Late, "other").empty);
}

TEST_CASE("config validation") {
  auto cfg = small_config();
  cfg.bandwidths = {8, 4};
  CHECK_THROWS_AS(run_sweep(cfg), ValidationError);
  cfg = small_config();
  cfg.dataflows.clear();
  CHECK_THROWS_AS(run_sweep(cfg), ValidationError);
}
