#include "nocperf/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <thread>
#include <tuple>

namespace nocperf {

void SweepConfig::validate() const {
  if (models.empty()) throw ValidationError("sweep: no model");
  if (dataflows.empty()) throw ValidationError("sweep: no dataflow");
  if (bandwidths.empty()) throw ValidationError("sweep: no bandwidth");
  for (std::size_t i = 0; i < bandwidths.size(); ++i) {
    if (bandwidths[i] < 1) throw ValidationError("sweep: bandwidths must be >= 1");
    if (i > 0 && bandwidths[i] <= bandwidths[i - 1])
      throw ValidationError("sweep: bandwidths must be strictly increasing");
  }
  hw.validate();
}

namespace {

struct Cell {
  const NetworkModel* model = nullptr;
  std::size_t model_index = 0;
  std::size_t layer_index = 0;
  const Dataflow* dataflow = nullptr;
  std::vector<SweepRow> rows;
};

void run_cell(Cell& cell, const SweepConfig& cfg) {
  const LayerShape& layer = cell.model->layers[cell.layer_index];
  SweepRow base;
  base.model = cell.model->name;
  base.layer = layer.name;
  base.layer_index = cell.layer_index;
  base.layer_class = classify_layer(layer, cell.layer_index, *cell.model);
  base.dataflow = cell.dataflow->name;
  base.macs = macs(layer);

  std::optional<TrafficProfile> profile;
  try {
    // Buffer limits do not depend on bandwidth; check them once.
    HardwareConfig hw = cfg.hw;
    hw.noc_bandwidth = cfg.bandwidths.front();
    profile = analyze_layer(layer, *cell.dataflow, hw).profile;
  } catch (const Error& e) {
    base.feasible = false;
    base.error = e.what();
  }
  for (Count bw : cfg.bandwidths) {
    SweepRow row = base;
    row.bandwidth = bw;
    if (profile) {
      HardwareConfig hw = cfg.hw;
      hw.noc_bandwidth = bw;
      const auto a = evaluate(*profile, hw);
      row.throughput = a.throughput;
      row.roofline = a.roofline_throughput;
      row.avg_bandwidth = a.avg_bandwidth;
      row.peak_bandwidth = a.peak_bandwidth;
      row.utilized_pes = a.utilized_pes;
      row.total_cycles = a.total_cycles;
      row.bound = a.bound;
      row.steady_cycles = a.steady_cycles;
      row.compute_cycles = a.compute_delay_total;
      row.steady_bytes = a.steady_bytes;
    }
    cell.rows.push_back(std::move(row));
  }
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  std::vector<const Dataflow*> flows;
  for (const auto& df : cfg.dataflows) flows.push_back(&df);
  std::stable_sort(flows.begin(), flows.end(),
                   [](const Dataflow* a, const Dataflow* b) { return a->name < b->name; });

  std::vector<Cell> cells;
  for (std::size_t m = 0; m < cfg.models.size(); ++m)
    for (std::size_t l = 0; l < cfg.models[m].layers.size(); ++l)
      for (const Dataflow* df : flows) cells.push_back({&cfg.models[m], m, l, df, {}});

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) run_cell(cells[i], cfg);
  };
  const unsigned threads = std::max(1u, cfg.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<SweepRow> rows;
  rows.reserve(cells.size() * cfg.bandwidths.size());
  for (auto& c : cells)
    for (auto& r : c.rows) rows.push_back(std::move(r));
  if (cfg.aggregation == Aggregation::PerClass) return aggregate_by_class(rows);
  return rows;
}

std::vector<SweepRow> aggregate_by_class(const std::vector<SweepRow>& rows) {
  // Keys keep models in first-seen order, then class, dataflow, bandwidth.
  std::vector<std::string> model_order;
  using Key = std::tuple<std::size_t, int, std::string, Count>;
  std::map<Key, SweepRow> groups;
  for (const auto& r : rows) {
    auto it = std::find(model_order.begin(), model_order.end(), r.model);
    const auto m = static_cast<std::size_t>(it - model_order.begin());
    if (it == model_order.end()) model_order.push_back(r.model);
    Key key{m, static_cast<int>(r.layer_class), r.dataflow, r.bandwidth};
    auto [g, fresh] = groups.try_emplace(key);
    SweepRow& agg = g->second;
    if (fresh) {
      agg.model = r.model;
      agg.layer = "*";
      agg.layer_class = r.layer_class;
      agg.dataflow = r.dataflow;
      agg.bandwidth = r.bandwidth;
      agg.feasible = false;
      agg.peak_bandwidth = 0;
    }
    if (!r.feasible) continue;
    if (!agg.feasible) {
      agg.feasible = true;
      agg.error.clear();
    }
    agg.macs += r.macs;
    agg.steady_cycles += r.steady_cycles;
    agg.compute_cycles += r.compute_cycles;
    agg.steady_bytes += r.steady_bytes;
    agg.total_cycles += r.total_cycles;
    agg.utilized_pes = std::max(agg.utilized_pes, r.utilized_pes);
    if (r.bound == Bound::Communication) agg.bound = Bound::Communication;
    if (!r.peak_bandwidth || !agg.peak_bandwidth) agg.peak_bandwidth.reset();
    else agg.peak_bandwidth = std::max(*agg.peak_bandwidth, *r.peak_bandwidth);
  }
  std::vector<SweepRow> out;
  for (auto& [key, agg] : groups) {
    if (!agg.feasible) {
      agg.error = "no feasible layer in class";
    } else {
      if (agg.steady_cycles > 0) {
        agg.throughput = static_cast<double>(agg.macs) / static_cast<double>(agg.steady_cycles);
        agg.avg_bandwidth = static_cast<double>(agg.steady_bytes) / static_cast<double>(agg.steady_cycles);
      }
      if (agg.compute_cycles > 0)
        agg.roofline = static_cast<double>(agg.macs) / static_cast<double>(agg.compute_cycles);
    }
    out.push_back(std::move(agg));
  }
  return out;
}

namespace {

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string emit_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "model,layer,class,dataflow,bw_Bpc,throughput_macs_pc,roofline_macs_pc,avg_bw_Bpc,peak_bw_Bpc,"
        "utilized_pes,total_cycles,bound\n";
  for (const auto& r : rows) {
    os << r.model << ',' << r.layer << ',' << to_string(r.layer_class) << ',' << r.dataflow << ','
       << r.bandwidth << ',';
    if (!r.feasible) {
      os << ",,,,,,infeasible\n";
      continue;
    }
    os << fmt(r.throughput) << ',' << fmt(r.roofline) << ',' << fmt(r.avg_bandwidth) << ','
       << (r.peak_bandwidth ? std::to_string(*r.peak_bandwidth) : std::string("inf")) << ','
       << r.utilized_pes << ',' << r.total_cycles << ',' << to_string(r.bound) << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// SVG charts

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                    "#8c564b", "#e377c2", "#17becf"};

struct Panel {
  double left, top, width, height;
  double x_min, x_max;  // log2 bandwidth
  double y_max;

  double x(double bw) const {
    const double lx = std::log2(bw);
    const double span = x_max > x_min ? x_max - x_min : 1;
    return left + width * (std::clamp(lx, x_min, x_max) - x_min) / span;
  }
  double y(double v) const { return top + height * (1 - (y_max > 0 ? v / y_max : 0)); }
};

double nice_ceiling(double v) {
  if (v <= 0) return 1;
  const double p = std::pow(10, std::floor(std::log10(v)));
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0})
    if (m * p >= v) return m * p;
  return 10 * p;
}

void axes(std::ostringstream& os, const Panel& p, const std::vector<Count>& bws, const std::string& label) {
  os << "<rect x=\"" << fmt(p.left, 1) << "\" y=\"" << fmt(p.top, 1) << "\" width=\"" << fmt(p.width, 1)
     << "\" height=\"" << fmt(p.height, 1) << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (Count bw : bws) {
    const double x = p.x(static_cast<double>(bw));
    os << "<line x1=\"" << fmt(x, 1) << "\" y1=\"" << fmt(p.top + p.height, 1) << "\" x2=\"" << fmt(x, 1)
       << "\" y2=\"" << fmt(p.top + p.height + 4, 1) << "\" stroke=\"#444\"/>"
       << "<text x=\"" << fmt(x, 1) << "\" y=\"" << fmt(p.top + p.height + 16, 1)
       << "\" font-size=\"10\" text-anchor=\"middle\">" << bw << "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    const double v = p.y_max * i / 4;
    os << "<text x=\"" << fmt(p.left - 6, 1) << "\" y=\"" << fmt(p.y(v) + 3, 1)
       << "\" font-size=\"10\" text-anchor=\"end\">" << fmt(v, v < 10 ? 1 : 0) << "</text>\n";
  }
  os << "<text x=\"" << fmt(p.left - 44, 1) << "\" y=\"" << fmt(p.top + p.height / 2, 1)
     << "\" font-size=\"11\" text-anchor=\"middle\" transform=\"rotate(-90 " << fmt(p.left - 44, 1) << ' '
     << fmt(p.top + p.height / 2, 1) << ")\">" << label << "</text>\n";
}

}  // namespace

Chart emit_chart(const std::vector<SweepRow>& rows, LayerClass layer_class, const std::string& model) {
  // Accept either per-layer or class rows.
  std::vector<SweepRow> selected;
  for (const auto& r : rows)
    if (r.model == model && r.layer_class == layer_class) selected.push_back(r);
  const bool per_layer = std::any_of(selected.begin(), selected.end(), [](const SweepRow& r) { return r.layer != "*"; });
  if (per_layer) {
    std::vector<SweepRow> layers;
    for (auto& r : selected)
      if (r.layer != "*") layers.push_back(std::move(r));
    selected = aggregate_by_class(layers);
  }

  std::vector<std::string> flows;
  std::vector<Count> bws;
  double max_tp = 0, max_avg = 0;
  for (const auto& r : selected) {
    if (std::find(flows.begin(), flows.end(), r.dataflow) == flows.end()) flows.push_back(r.dataflow);
    if (std::find(bws.begin(), bws.end(), r.bandwidth) == bws.end()) bws.push_back(r.bandwidth);
    if (!r.feasible) continue;
    max_tp = std::max({max_tp, r.throughput, r.roofline});
    max_avg = std::max(max_avg, r.avg_bandwidth);
  }
  std::sort(bws.begin(), bws.end());

  Chart chart;
  chart.empty = std::none_of(selected.begin(), selected.end(), [](const SweepRow& r) { return r.feasible; });

  const double W = 680, H = 560;
  const double lo = bws.empty() ? 0 : std::log2(static_cast<double>(bws.front()));
  const double hi = bws.empty() ? 1 : std::log2(static_cast<double>(bws.back()));
  const Panel top{80, 50, 440, 200, lo, hi, nice_ceiling(max_tp)};
  const Panel bottom{80, 310, 440, 200, lo, hi, nice_ceiling(std::max(max_avg, 1.0))};

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" viewBox=\"0 0 " << W << ' ' << H << "\" font-family=\"sans-serif\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" font-size=\"14\" text-anchor=\"middle\">" << model << " / "
     << to_string(layer_class) << " layers</text>\n";
  if (chart.empty) {
    os << "<text x=\"" << W / 2 << "\" y=\"" << H / 2
       << "\" font-size=\"13\" text-anchor=\"middle\">no feasible layer in this class</text>\n</svg>\n";
    chart.svg = os.str();
    return chart;
  }
  axes(os, top, bws, "throughput (MACs/cycle)");
  axes(os, bottom, bws, "avg bandwidth (B/cycle)");
  os << "<text x=\"" << fmt(top.left + top.width / 2, 1) << "\" y=\"" << fmt(bottom.top + bottom.height + 36, 1)
     << "\" font-size=\"11\" text-anchor=\"middle\">NoC bandwidth (B/cycle)</text>\n";

  for (std::size_t f = 0; f < flows.size(); ++f) {
    const char* color = kPalette[f % std::size(kPalette)];
    std::vector<const SweepRow*> pts;
    for (const auto& r : selected)
      if (r.dataflow == flows[f]) pts.push_back(&r);
    std::sort(pts.begin(), pts.end(), [](auto* a, auto* b) { return a->bandwidth < b->bandwidth; });

    // Throughput holds its value until the next sampled bandwidth. An
    // infeasible sample breaks the curve.
    std::ostringstream tp, avg;
    bool open = false;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const SweepRow& r = *pts[i];
      if (!r.feasible) {
        open = false;
        continue;
      }
      const double x = top.x(static_cast<double>(r.bandwidth));
      const double x_next = i + 1 < pts.size() ? top.x(static_cast<double>(pts[i + 1]->bandwidth)) : x;
      if (!open) tp << 'M' << fmt(x, 1) << ',' << fmt(top.y(r.throughput), 1);
      else tp << 'V' << fmt(top.y(r.throughput), 1);
      tp << 'H' << fmt(x_next, 1);
      avg << (open ? 'L' : 'M') << fmt(bottom.x(static_cast<double>(r.bandwidth)), 1) << ','
          << fmt(bottom.y(r.avg_bandwidth), 1);
      open = true;
    }
    os << "<path class=\"throughput\" data-dataflow=\"" << flows[f] << "\" d=\"" << tp.str()
       << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<path class=\"avg-bandwidth\" data-dataflow=\"" << flows[f] << "\" d=\"" << avg.str()
       << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";

    const SweepRow* last = nullptr;
    for (auto* r : pts)
      if (r->feasible) last = r;
    if (last) {
      // Peaks past the sweep range, or unbounded ones, sit on the right edge.
      const double peak = last->peak_bandwidth ? static_cast<double>(*last->peak_bandwidth)
                                               : std::exp2(top.x_max);
      const std::string label = last->peak_bandwidth ? std::to_string(*last->peak_bandwidth) : "inf";
      for (const Panel* p : {&top, &bottom}) {
        const double x = p->x(peak);
        os << "<line class=\"peak\" data-dataflow=\"" << flows[f] << "\" data-bw=\"" << label << "\" x1=\""
           << fmt(x, 1) << "\" y1=\"" << fmt(p->top, 1) << "\" x2=\"" << fmt(x, 1) << "\" y2=\""
           << fmt(p->top + p->height, 1) << "\" stroke=\"" << color
           << "\" stroke-dasharray=\"2,3\" stroke-width=\"1.5\"/>\n";
      }
    }
    const double ly = top.top + 14.0 * static_cast<double>(f);
    os << "<line x1=\"540\" y1=\"" << fmt(ly, 1) << "\" x2=\"560\" y2=\"" << fmt(ly, 1) << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"/><text x=\"566\" y=\"" << fmt(ly + 4, 1) << "\" font-size=\"11\">" << flows[f]
       << "</text>\n";
  }
  os << "<text x=\"540\" y=\"" << fmt(top.top + 14.0 * static_cast<double>(flows.size()) + 10, 1)
     << "\" font-size=\"10\" fill=\"#555\">dotted: peak bandwidth</text>\n";
  os << "</svg>\n";
  chart.svg = os.str();
  return chart;
}

}  // namespace nocperf
