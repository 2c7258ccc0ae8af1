#include "nocperf/model.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <set>
#include <sstream>

#include "builtin_data.hpp"
#include "text_util.hpp"

namespace nocperf {

namespace {

constexpr std::array<std::pair<Dim, std::string_view>, 7> kDimNames{{
    {Dim::N, "N"}, {Dim::K, "K"}, {Dim::C, "C"}, {Dim::Y, "Y"},
    {Dim::X, "X"}, {Dim::R, "R"}, {Dim::S, "S"},
}};

constexpr std::array<std::pair<LayerKind, std::string_view>, 5> kKindNames{{
    {LayerKind::Conv2D, "CONV2D"},
    {LayerKind::DepthwiseConv, "DWCONV"},
    {LayerKind::PointwiseConv, "PWCONV"},
    {LayerKind::FullyConnected, "FC"},
    {LayerKind::ResidualAdd, "ADD"},
}};

}  // namespace

std::string_view to_string(Dim d) {
  for (auto [dim, name] : kDimNames)
    if (dim == d) return name;
  return "?";
}

std::optional<Dim> parse_dim(std::string_view s) {
  for (auto [dim, name] : kDimNames)
    if (name == s) return dim;
  return std::nullopt;
}

std::string_view to_string(LayerKind k) {
  for (auto [kind, name] : kKindNames)
    if (kind == k) return name;
  return "?";
}

std::optional<LayerKind> parse_layer_kind(std::string_view s) {
  for (auto [kind, name] : kKindNames)
    if (name == s) return kind;
  return std::nullopt;
}

std::string_view to_string(LayerClass c) {
  switch (c) {
    case LayerClass::Early: return "early";
    case LayerClass::PointWise: return "pointwise";
    case LayerClass::FullyConnected: return "fc";
    case LayerClass::Residual: return "residual";
    case LayerClass::Late: return "late";
  }
  return "?";
}

Count LayerShape::extent(Dim d) const {
  switch (d) {
    case Dim::N: return 1;
    case Dim::K: return K;
    case Dim::C: return C;
    case Dim::Y: return Y;
    case Dim::X: return X;
    case Dim::R: return R;
    case Dim::S: return S;
  }
  return 1;
}

void validate(const LayerShape& l) {
  auto fail = [&](const std::string& what) {
    throw ValidationError("layer '" + l.name + "': " + what);
  };
  if (l.name.empty()) throw ValidationError("layer with empty name");
  const std::pair<const char*, Count> extents[] = {
      {"K", l.K}, {"C", l.C}, {"Y", l.Y}, {"X", l.X}, {"R", l.R},
      {"S", l.S}, {"strideY", l.strideY}, {"strideX", l.strideX}};
  for (auto [name, v] : extents)
    if (v < 1) fail(std::string(name) + " must be >= 1");
  if (l.R > l.Y) fail("R exceeds Y");
  if (l.S > l.X) fail("S exceeds X");

  switch (l.kind) {
    case LayerKind::Conv2D: break;
    case LayerKind::PointwiseConv:
      if (l.R != 1 || l.S != 1) fail("PWCONV requires R = S = 1");
      break;
    case LayerKind::FullyConnected:
      if (l.Y != l.R || l.X != l.S) fail("FC requires Y = R and X = S");
      break;
    case LayerKind::DepthwiseConv:
      if (l.K != l.C) fail("DWCONV requires K = C");
      break;
    case LayerKind::ResidualAdd:
      if (l.R != 1 || l.S != 1) fail("ADD requires R = S = 1");
      if (l.K != l.C) fail("ADD requires K = C");
      if (l.strideY != 1 || l.strideX != 1) fail("ADD requires unit strides");
      break;
  }
}

const LayerShape* NetworkModel::find(std::string_view layer_name) const {
  auto it = std::find_if(layers.begin(), layers.end(),
                         [&](const LayerShape& l) { return l.name == layer_name; });
  return it == layers.end() ? nullptr : &*it;
}

NetworkModel parse_model(std::string_view text, std::string name) {
  NetworkModel model{std::move(name), {}};
  std::set<std::string, std::less<>> seen;
  int line_no = 0;
  for (std::string_view line : detail::split_lines(text)) {
    ++line_no;
    auto fields = detail::tokenize(detail::strip_comment(line));
    if (fields.empty()) continue;
    if (fields.size() != 10)
      throw ParseError(line_no, "expected 10 fields 'name kind K C Y X R S strideY strideX', got " +
                                    std::to_string(fields.size()));
    LayerShape layer;
    layer.name = std::string(fields[0]);
    auto kind = parse_layer_kind(fields[1]);
    if (!kind) throw ParseError(line_no, "unknown layer kind '" + std::string(fields[1]) + "'");
    layer.kind = *kind;
    Count* slots[] = {&layer.K, &layer.C, &layer.Y, &layer.X, &layer.R,
                      &layer.S, &layer.strideY, &layer.strideX};
    for (std::size_t i = 0; i < 8; ++i) {
      auto v = detail::parse_count(fields[i + 2]);
      if (!v) throw ParseError(line_no, "expected an integer, got '" + std::string(fields[i + 2]) + "'");
      *slots[i] = *v;
    }
    validate(layer);
    if (!seen.insert(layer.name).second)
      throw ValidationError("duplicate layer name '" + layer.name + "'");
    model.layers.push_back(std::move(layer));
  }
  if (model.layers.empty()) throw ValidationError("model '" + model.name + "' has no layers");
  return model;
}

std::string render_model(const NetworkModel& model) {
  std::ostringstream os;
  os << "# " << model.name << "\n";
  for (const auto& l : model.layers) {
    os << l.name << ' ' << to_string(l.kind) << ' ' << l.K << ' ' << l.C << ' ' << l.Y << ' '
       << l.X << ' ' << l.R << ' ' << l.S << ' ' << l.strideY << ' ' << l.strideX << '\n';
  }
  return os.str();
}

std::pair<Count, Count> output_dims(const LayerShape& layer) {
  return {layer.out_y(), layer.out_x()};
}

Count macs(const LayerShape& l) {
  auto [yo, xo] = output_dims(l);
  switch (l.kind) {
    case LayerKind::DepthwiseConv: return l.C * yo * xo * l.R * l.S;
    case LayerKind::ResidualAdd: return l.C * l.Y * l.X;
    default: return l.K * l.C * yo * xo * l.R * l.S;
  }
}

LayerClass classify_layer(const LayerShape& layer, std::size_t /*index*/,
                          const NetworkModel& /*network*/) {
  switch (layer.kind) {
    case LayerKind::ResidualAdd: return LayerClass::Residual;
    case LayerKind::FullyConnected: return LayerClass::FullyConnected;
    case LayerKind::PointwiseConv: return LayerClass::PointWise;
    default: break;
  }
  return std::max(layer.C, layer.K) >= 512 ? LayerClass::Late : LayerClass::Early;
}

const std::vector<NetworkModel>& builtin_models() {
  static const std::vector<NetworkModel> models = [] {
    std::vector<NetworkModel> out;
    out.push_back(parse_model(detail::kResnet50Workload, "resnet50"));
    out.push_back(parse_model(detail::kMobilenetV2Workload, "mobilenetv2"));
    return out;
  }();
  return models;
}

const NetworkModel* find_builtin_model(std::string_view name) {
  for (const auto& m : builtin_models())
    if (m.name == name) return &m;
  return nullptr;
}

}  // namespace nocperf
