// nocperf: layer analysis, bandwidth sweeps and oracle checks from the shell.

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "nocperf/oracle.hpp"
#include "nocperf/sweep.hpp"

using namespace nocperf;

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kOracleMismatch = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string lower(std::string s) {
  for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

NetworkModel load_model(const std::string& source) {
  if (const auto* m = find_builtin_model(lower(source))) return *m;
  const std::filesystem::path path(source);
  return parse_model(read_file(source), path.stem().string());
}

Dataflow load_dataflow(const std::string& source) {
  // Builtins match by full name or by the part before '-', case-insensitively.
  for (const auto& df : builtin_dataflows())
    if (lower(df.name) == lower(source) || lower(df.name.substr(0, df.name.find('-'))) == lower(source))
      return df;
  return parse_dataflow(read_file(source));
}

std::vector<std::string> split_list(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string part;
    while (std::getline(ss, part, ','))
      if (!part.empty()) out.push_back(part);
  }
  return out;
}

struct HardwareOptions {
  Count pes = 256;
  Count bw = 256;
  std::string multicast = "on";
  Count elem_bytes = 1;
  Count global_buf = 256 * 1024;
  Count pe_buf = 1024;

  void attach(CLI::App* app, bool with_bw) {
    app->add_option("--pes", pes, "number of PEs")->capture_default_str();
    if (with_bw) app->add_option("--bw", bw, "NoC bandwidth in bytes per cycle")->capture_default_str();
    app->add_option("--multicast", multicast, "on|off")
        ->check(CLI::IsMember({"on", "off"}))
        ->capture_default_str();
    app->add_option("--elem-bytes", elem_bytes, "bytes per element")->capture_default_str();
    app->add_option("--global-buf", global_buf, "global buffer bytes")->capture_default_str();
    app->add_option("--pe-buf", pe_buf, "per-PE buffer bytes")->capture_default_str();
  }

  HardwareConfig config() const {
    HardwareConfig hw;
    hw.num_pes = pes;
    hw.noc_bandwidth = bw;
    hw.multicast = multicast == "on";
    hw.element_bytes = elem_bytes;
    hw.global_buffer_bytes = global_buf;
    hw.pe_buffer_bytes = pe_buf;
    hw.validate();
    return hw;
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

int run_analyze(const std::string& model_arg, const std::string& layer_name,
                const std::string& df_arg, const HardwareOptions& opts) {
  const auto model = load_model(model_arg);
  const auto* layer = model.find(layer_name);
  if (!layer) throw Error("model '" + model.name + "' has no layer '" + layer_name + "'");
  const auto df = load_dataflow(df_arg);
  const auto hw = opts.config();
  const auto a = analyze_layer(*layer, df, hw);
  const std::size_t index = static_cast<std::size_t>(layer - model.layers.data());

  std::cout << "layer                " << layer->name << " (" << to_string(layer->kind) << ", class "
            << to_string(classify_layer(*layer, index, model)) << ")\n"
            << "dataflow             " << df.name << '\n'
            << "macs                 " << a.macs << '\n'
            << "steps                " << a.steps << '\n'
            << "utilized_pes         " << a.utilized_pes << " (" << a.profile.parallelism.cluster_count
            << " x " << a.profile.parallelism.cluster_size << ")\n"
            << "roofline_macs_pc     " << fmt(a.roofline_throughput) << '\n'
            << "throughput_macs_pc   " << fmt(a.throughput) << " at " << hw.noc_bandwidth << " B/cycle\n"
            << "peak_bw_Bpc          "
            << (a.peak_bandwidth ? std::to_string(*a.peak_bandwidth) : std::string("unbounded")) << '\n'
            << "avg_bw_Bpc           " << fmt(a.avg_bandwidth) << '\n'
            << "total_cycles         " << a.total_cycles << " (fill " << a.fill_cycles << ", steady "
            << a.steady_cycles << ", drain " << a.drain_cycles << ")\n"
            << "compute_cycles       " << a.compute_delay_total << '\n'
            << "comm_cycles          " << a.comm_delay_total << '\n'
            << "bound                " << to_string(a.bound) << '\n'
            << "buffer_global_bytes  " << a.buffer_global_bytes << '\n'
            << "buffer_pe_bytes      " << a.buffer_pe_bytes << '\n'
            << "traffic_words        input " << a.profile.total_words[0] << ", weight "
            << a.profile.total_words[1] << ", output " << a.profile.total_words[2] << '\n'
            << "reuse                input " << to_string(a.profile.reuse[0]) << ", weight "
            << to_string(a.profile.reuse[1]) << ", output " << to_string(a.profile.reuse[2]) << '\n'
            << "step_classes         " << a.profile.steady.size() << '\n';
  return kOk;
}

int run_sweep_cmd(const std::vector<std::string>& model_args, const std::vector<std::string>& df_args,
                  const std::vector<std::string>& bw_list, const std::string& out_csv,
                  const std::string& out_svg, bool per_class, unsigned threads, const HardwareOptions& opts) {
  SweepConfig cfg;
  for (const auto& m : split_list(model_args)) cfg.models.push_back(load_model(m));
  if (cfg.models.empty()) cfg.models = builtin_models();
  for (const auto& d : split_list(df_args)) cfg.dataflows.push_back(load_dataflow(d));
  if (cfg.dataflows.empty()) cfg.dataflows = builtin_dataflows();
  const auto bws = split_list(bw_list);
  if (!bws.empty()) {
    cfg.bandwidths.clear();
    for (const auto& b : bws) {
      try {
        cfg.bandwidths.push_back(std::stoll(b));
      } catch (const std::exception&) {
        throw Error("bad bandwidth '" + b + "'");
      }
    }
  }
  cfg.hw = opts.config();
  cfg.threads = threads;
  cfg.aggregation = per_class ? Aggregation::PerClass : Aggregation::PerLayer;

  const auto rows = run_sweep(cfg);
  const std::string csv = emit_csv(rows);
  if (out_csv.empty() || out_csv == "-") {
    std::cout << csv;
  } else {
    std::ofstream(out_csv, std::ios::binary) << csv;
  }

  std::size_t infeasible = 0;
  for (const auto& r : rows) infeasible += !r.feasible;
  if (infeasible) std::cerr << infeasible << " infeasible rows\n";

  if (!out_svg.empty()) {
    std::filesystem::create_directories(out_svg);
    for (const auto& m : cfg.models) {
      for (LayerClass c : kLayerClasses) {
        const bool present = std::any_of(rows.begin(), rows.end(), [&](const SweepRow& r) {
          return r.model == m.name && r.layer_class == c;
        });
        if (!present) continue;
        const auto chart = emit_chart(rows, c, m.name);
        if (chart.empty) std::cerr << "warning: " << m.name << '/' << to_string(c) << " has no feasible row\n";
        const auto path = std::filesystem::path(out_svg) / (m.name + "_" + std::string(to_string(c)) + ".svg");
        std::ofstream(path, std::ios::binary) << chart.svg;
      }
    }
  }
  return kOk;
}

// Loop order with spatial dims starred and levels separated by '/', then
// the symbolic size of the outermost directive on each dim.
std::string describe(const Dataflow& df) {
  std::ostringstream os;
  os << df.name << "  retention=" << to_string(df.retention) << "\n  loop order: ";
  for (std::size_t l = 0; l < df.levels.size(); ++l) {
    if (l) os << " / ";
    for (const auto& d : df.levels[l].directives)
      os << to_string(d.dim) << (d.kind == MapKind::Spatial ? "*" : "");
  }
  os << "\n  tile sizes:";
  for (Dim dim : kLoopDims) {
    std::string tile = "-";
    for (std::size_t l = 0; l < df.levels.size(); ++l) {
      const auto& level = df.levels[l];
      const auto it = std::find_if(level.directives.begin(), level.directives.end(),
                                   [&](const Directive& d) { return d.dim == dim; });
      if (it != level.directives.end()) {
        tile = it->size.render();
        // One index per PE inside a cluster: the cluster spans the whole dim.
        if (l + 1 == df.levels.size() && l > 0 && it->kind == MapKind::Spatial &&
            it->size == SizeExpr::literal(1))
          tile = "|" + std::string(to_string(dim)) + "|";
        break;
      }
    }
    os << ' ' << to_string(dim) << '=' << tile;
  }
  os << '\n';
  return os.str();
}

int run_dataflows() {
  for (const auto& df : builtin_dataflows()) std::cout << describe(df) << '\n';
  return kOk;
}

int run_oracle_check(Count seeds, Count max_dim, Count max_pes, bool verbose) {
  Count failures = 0, checked = 0;
  for (Count seed = 0; seed < seeds; ++seed) {
    const auto c = random_case(static_cast<std::uint64_t>(seed), max_dim, max_pes);
    for (const auto& df : builtin_dataflows()) {
      ++checked;
      const auto analysis = evaluate(traffic_profile(bind(df, c.layer), c.hw), c.hw);
      const auto sim = simulate(c.layer, df, c.hw);
      const auto rep = compare(analysis, sim);
      if (verbose || !rep.pass) {
        std::cout << (rep.pass ? "ok   seed " : "FAIL seed ") << seed << ' ' << df.name << ' '
                  << to_string(c.layer.kind) << " K" << c.layer.K << " C" << c.layer.C << " Y" << c.layer.Y
                  << " X" << c.layer.X << " R" << c.layer.R << " S" << c.layer.S << " stride "
                  << c.layer.strideY << " pes " << c.hw.num_pes;
        if (!rep.pass) std::cout << "  [" << to_string(rep.phase) << "] " << rep.detail;
        std::cout << '\n';
      }
      failures += !rep.pass;
    }
  }
  std::cout << checked - failures << '/' << checked << " cases match\n";
  return failures ? kOracleMismatch : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Analytical NoC bandwidth and throughput model for spatial DNN accelerators"};
  app.require_subcommand(1);

  auto* analyze = app.add_subcommand("analyze", "analyze one layer under one dataflow");
  std::string model_arg, layer_name, df_arg;
  HardwareOptions analyze_hw;
  analyze->add_option("--model", model_arg, "workload file or builtin (resnet50, mobilenetv2)")->required();
  analyze->add_option("--layer", layer_name, "layer name")->required();
  analyze->add_option("--dataflow", df_arg, "dataflow file or builtin name")->required();
  analyze_hw.attach(analyze, true);

  auto* sweep = app.add_subcommand("sweep", "bandwidth sweep over models and dataflows");
  std::vector<std::string> models, dataflows, bw_list;
  std::string out_csv, out_svg;
  bool per_class = false;
  unsigned threads = 1;
  HardwareOptions sweep_hw;
  sweep->add_option("--models", models, "comma-separated workload files or builtins (default: both)");
  sweep->add_option("--dataflows", dataflows, "comma-separated dataflow files or builtins (default: all)");
  sweep->add_option("--bw-list", bw_list, "comma-separated bandwidths (default 4,8,...,256)");
  sweep->add_option("--out-csv", out_csv, "CSV output path ('-' for stdout)");
  sweep->add_option("--out-svg", out_svg, "directory for per-class charts");
  sweep->add_flag("--per-class", per_class, "emit class aggregates instead of layer rows");
  sweep->add_option("--threads", threads, "worker threads")->capture_default_str();
  sweep_hw.attach(sweep, false);

  app.add_subcommand("dataflows", "list the builtin dataflows");

  auto* oracle = app.add_subcommand("oracle-check", "compare the analytical model with the simulator");
  Count seeds = 100, max_dim = 6, max_pes = 8;
  bool verbose = false;
  oracle->add_option("--seeds", seeds, "number of random layers")->capture_default_str();
  oracle->add_option("--max-dim", max_dim, "largest extent per dim")->capture_default_str();
  oracle->add_option("--max-pes", max_pes, "largest PE count")->capture_default_str();
  oracle->add_flag("-v,--verbose", verbose, "print every case");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInputError;
  }

  try {
    if (*analyze) return run_analyze(model_arg, layer_name, df_arg, analyze_hw);
    if (*sweep)
      return run_sweep_cmd(models, dataflows, bw_list, out_csv, out_svg, per_class, threads, sweep_hw);
    if (app.got_subcommand("dataflows")) return run_dataflows();
    if (*oracle) return run_oracle_check(seeds, max_dim, max_pes, verbose);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kOk;
}
