#include "nocperf/dataflow.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "builtin_data.hpp"
#include "nocperf/schedule.hpp"
#include "text_util.hpp"

namespace nocperf {

// ---------------------------------------------------------------------------
// SizeExpr

SizeExpr SizeExpr::literal(Count n) {
  SizeExpr e;
  e.terms_.push_back({n, Ref::One, Dim::N});
  return e;
}

SizeExpr SizeExpr::dim_ref(Dim d) {
  SizeExpr e;
  e.terms_.push_back({1, Ref::Extent, d});
  return e;
}

SizeExpr SizeExpr::dim_ref_plus(Dim d, Count constant) {
  SizeExpr e;
  e.terms_.push_back({constant, Ref::One, Dim::N});
  e.terms_.push_back({1, Ref::Extent, d});
  return e;
}

SizeExpr SizeExpr::stride(Dim d, Count coeff) {
  SizeExpr e;
  e.terms_.push_back({coeff, d == Dim::Y ? Ref::StrideY : Ref::StrideX, Dim::N});
  return e;
}

namespace {

SizeExpr::Term parse_factor(std::string_view f) {
  using Ref = SizeExpr::Ref;
  if (f.size() >= 3 && f.front() == '|' && f.back() == '|') {
    auto d = parse_dim(f.substr(1, f.size() - 2));
    if (!d) throw ParseError(0, "unknown dim in '" + std::string(f) + "'");
    return {1, Ref::Extent, *d};
  }
  if (f == "strideY") return {1, Ref::StrideY, Dim::N};
  if (f == "strideX") return {1, Ref::StrideX, Dim::N};
  auto v = detail::parse_count(f);
  if (!v) throw ParseError(0, "bad size term '" + std::string(f) + "'");
  return {*v, Ref::One, Dim::N};
}

}  // namespace

SizeExpr SizeExpr::parse(std::string_view text) {
  if (text.empty()) throw ParseError(0, "empty size expression");
  SizeExpr e;
  while (true) {
    auto plus = text.find('+');
    auto term = text.substr(0, plus);
    auto star = term.find('*');
    Term t;
    if (star == std::string_view::npos) {
      t = parse_factor(term);
    } else {
      Term a = parse_factor(term.substr(0, star));
      Term b = parse_factor(term.substr(star + 1));
      if (a.ref != Ref::One && b.ref != Ref::One)
        throw ParseError(0, "product of two symbols in '" + std::string(term) + "'");
      if (a.ref == Ref::One) std::swap(a, b);
      t = {a.coeff * b.coeff, a.ref, a.dim};
    }
    e.terms_.push_back(t);
    if (plus == std::string_view::npos) break;
    text.remove_prefix(plus + 1);
  }
  return e;
}

bool SizeExpr::is_literal() const {
  return std::all_of(terms_.begin(), terms_.end(), [](const Term& t) { return t.ref == Ref::One; });
}

Count SizeExpr::resolve(const LayerShape& layer) const {
  Count v = 0;
  for (const auto& t : terms_) {
    switch (t.ref) {
      case Ref::One: v += t.coeff; break;
      case Ref::Extent: v += t.coeff * layer.extent(t.dim); break;
      case Ref::StrideY: v += t.coeff * layer.strideY; break;
      case Ref::StrideX: v += t.coeff * layer.strideX; break;
    }
  }
  return v;
}

std::string SizeExpr::render() const {
  std::string out;
  for (const auto& t : terms_) {
    if (!out.empty()) out += '+';
    std::string sym;
    switch (t.ref) {
      case Ref::One: out += std::to_string(t.coeff); continue;
      case Ref::Extent: sym = "|" + std::string(to_string(t.dim)) + "|"; break;
      case Ref::StrideY: sym = "strideY"; break;
      case Ref::StrideX: sym = "strideX"; break;
    }
    if (t.coeff != 1) out += std::to_string(t.coeff) + "*";
    out += sym;
  }
  return out;
}

std::string_view to_string(MapKind k) { return k == MapKind::Temporal ? "temporal" : "spatial"; }

std::string_view to_string(Retention r) {
  switch (r) {
    case Retention::None: return "none";
    case Retention::Stationary: return "stationary";
    case Retention::StationaryPlusHalo: return "halo";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Parsing and structural validation

void validate(const Dataflow& df) {
  auto fail = [&](const std::string& what) {
    throw ValidationError("dataflow '" + df.name + "': " + what);
  };
  if (df.levels.empty()) fail("no cluster level");
  if (df.levels.size() > 2) fail("more than 2 cluster levels");
  for (std::size_t l = 0; l < df.levels.size(); ++l) {
    const auto& level = df.levels[l];
    if (level.directives.empty()) fail("level " + std::to_string(l) + " has no directive");
    std::set<Dim> dims;
    for (const auto& d : level.directives) {
      if (!dims.insert(d.dim).second)
        fail("dim " + std::string(to_string(d.dim)) + " appears twice in level " + std::to_string(l));
      if (d.size.is_literal() && d.offset.is_literal() && !WorkGeometry::sliding(d.dim)) {
        LayerShape unit;
        if (d.offset.resolve(unit) > d.size.resolve(unit))
          fail("offset exceeds size on dim " + std::string(to_string(d.dim)));
      }
    }
  }
}

Dataflow parse_dataflow(std::string_view text) {
  Dataflow df;
  bool have_header = false;
  int line_no = 0;
  for (std::string_view line : detail::split_lines(text)) {
    ++line_no;
    auto f = detail::tokenize(detail::strip_comment(line));
    if (f.empty()) continue;
    if (!have_header) {
      if (f[0] != "dataflow" || f.size() < 2 || f.size() > 3)
        throw ParseError(line_no, "expected 'dataflow <name> retention=<none|stationary|halo>'");
      df.name = std::string(f[1]);
      df.retention = Retention::Stationary;
      if (f.size() == 3) {
        if (f[2] == "retention=none") df.retention = Retention::None;
        else if (f[2] == "retention=stationary") df.retention = Retention::Stationary;
        else if (f[2] == "retention=halo") df.retention = Retention::StationaryPlusHalo;
        else throw ParseError(line_no, "bad retention '" + std::string(f[2]) + "'");
      }
      have_header = true;
      continue;
    }
    if (f[0] == "level") {
      if (f.size() != 1) throw ParseError(line_no, "'level' takes no argument");
      df.levels.emplace_back();
      if (df.levels.size() > 2) throw ParseError(line_no, "more than 2 cluster levels");
      continue;
    }
    if (f[0] != "temporal" && f[0] != "spatial")
      throw ParseError(line_no, "unknown keyword '" + std::string(f[0]) + "'");
    if (f.size() != 4) throw ParseError(line_no, "expected '<temporal|spatial> <dim> <size> <offset>'");
    Directive d;
    d.kind = f[0] == "temporal" ? MapKind::Temporal : MapKind::Spatial;
    auto dim = parse_dim(f[1]);
    if (!dim) throw ParseError(line_no, "unknown dim '" + std::string(f[1]) + "'");
    d.dim = *dim;
    try {
      d.size = SizeExpr::parse(f[2]);
      d.offset = SizeExpr::parse(f[3]);
    } catch (const ParseError& e) {
      throw ParseError(line_no, e.what());
    }
    if (df.levels.empty()) df.levels.emplace_back();
    auto& level = df.levels.back();
    for (const auto& prev : level.directives)
      if (prev.dim == d.dim)
        throw ParseError(line_no, "dim " + std::string(f[1]) + " appears twice in one level");
    if (d.size.is_literal() && d.offset.is_literal() && !WorkGeometry::sliding(d.dim)) {
      LayerShape unit;
      if (d.offset.resolve(unit) > d.size.resolve(unit))
        throw ParseError(line_no, "offset exceeds size");
    }
    level.directives.push_back(std::move(d));
  }
  if (!have_header) throw ParseError(0, "missing 'dataflow' header");
  validate(df);
  return df;
}

std::string render_dataflow(const Dataflow& df) {
  std::ostringstream os;
  os << "dataflow " << df.name << " retention=" << to_string(df.retention) << '\n';
  for (const auto& level : df.levels) {
    os << "level\n";
    for (const auto& d : level.directives)
      os << to_string(d.kind) << ' ' << to_string(d.dim) << ' ' << d.size.render() << ' '
         << d.offset.render() << '\n';
  }
  return os.str();
}

const std::vector<Dataflow>& builtin_dataflows() {
  static const std::vector<Dataflow> flows = [] {
    std::vector<Dataflow> out;
    for (auto text : detail::kBuiltinDataflows) out.push_back(parse_dataflow(text));
    return out;
  }();
  return flows;
}

const Dataflow* find_builtin_dataflow(std::string_view name) {
  for (const auto& df : builtin_dataflows())
    if (df.name == name) return &df;
  return nullptr;
}

std::vector<Count> tile_sizes(const Dataflow& df, const LayerShape& layer) {
  // Outermost occurrence wins. A spatial partition inside the inner cluster
  // level reports the span of the whole cluster.
  std::vector<Count> out;
  const WorkGeometry g(layer);
  for (Dim dim : kLoopDims) {
    Count tile = 0;
    for (std::size_t l = 0; l < df.levels.size() && tile == 0; ++l) {
      for (const auto& d : df.levels[l].directives) {
        if (d.dim != dim) continue;
        Count size = d.size.resolve(layer);
        Count offset = d.offset.resolve(layer);
        bool inner = df.levels.size() == 2 && l == 1;
        if (inner && d.kind == MapKind::Spatial && size == offset && !WorkGeometry::sliding(dim))
          size = g.extent[static_cast<int>(dim)];
        tile = size;
        break;
      }
    }
    out.push_back(tile);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Binding

Count work_extent(const LayerShape& layer, Dim d) {
  return WorkGeometry(layer).extent[static_cast<int>(d)];
}

namespace {

bool channel_aliased(LayerKind k) {
  return k == LayerKind::DepthwiseConv || k == LayerKind::ResidualAdd;
}

std::vector<Dim> required_dims(LayerKind k) {
  switch (k) {
    case LayerKind::DepthwiseConv: return {Dim::C, Dim::Y, Dim::X, Dim::R, Dim::S};
    case LayerKind::ResidualAdd: return {Dim::C, Dim::Y, Dim::X};
    default: return {Dim::K, Dim::C, Dim::Y, Dim::X, Dim::R, Dim::S};
  }
}

}  // namespace

BoundMapping bind(const Dataflow& df, const LayerShape& layer) {
  validate(layer);
  auto fail = [&](const std::string& what) {
    throw BindError("binding '" + df.name + "' to layer '" + layer.name + "': " + what);
  };
  // A bound dataflow may repeat a dim inside a level after channel aliasing,
  // so only the level count is re-checked here.
  if (df.levels.empty() || df.levels.size() > 2) fail("expected 1 or 2 cluster levels");

  BoundMapping m;
  m.layer = layer;
  m.dataflow.name = df.name;
  m.dataflow.retention = df.retention;
  m.levels = static_cast<int>(df.levels.size());
  const WorkGeometry g(layer);

  for (std::size_t l = 0; l < df.levels.size(); ++l) {
    ClusterLevel resolved;
    for (const auto& d : df.levels[l].directives) {
      BoundDirective b{d.dim, d.kind, d.size.resolve(layer), d.offset.resolve(layer),
                       static_cast<int>(l)};
      if (channel_aliased(layer.kind) && b.dim == Dim::K) {
        if (b.kind == MapKind::Temporal) continue;
        b.dim = Dim::C;
      }
      const std::string dn(to_string(b.dim));
      if (b.size < 1 || b.offset < 1) fail("non-positive size or offset on dim " + dn);
      if (WorkGeometry::sliding(b.dim)) {
        Count st = g.stride(b.dim), f = g.filter(b.dim);
        if (b.size < f) fail("window on " + dn + " smaller than the filter (degenerate mapping)");
        if (b.offset % st != 0) fail("offset on " + dn + " is not a multiple of the stride");
        if (b.offset / st > (b.size - f) / st + 1)
          fail("offset on " + dn + " skips output positions");
      } else if (b.offset > b.size) {
        fail("offset exceeds size on dim " + dn);
      }
      m.directives.push_back(b);
      resolved.directives.push_back(
          {b.dim, b.kind, SizeExpr::literal(b.size), SizeExpr::literal(b.offset)});
    }
    m.dataflow.levels.push_back(std::move(resolved));
  }

  for (Dim req : required_dims(layer.kind)) {
    bool covered = std::any_of(m.directives.begin(), m.directives.end(),
                               [&](const BoundDirective& b) { return b.dim == req; });
    if (!covered) fail("dim " + std::string(to_string(req)) + " is not mapped");
  }

  std::array<DimCursor, 7> cursor{};
  for (Dim d : {Dim::N, Dim::K, Dim::C, Dim::Y, Dim::X, Dim::R, Dim::S})
    cursor[static_cast<int>(d)] = root_cursor(g, d);
  m.spatial_units.assign(df.levels.size(), 1);
  for (const auto& b : m.directives) {
    auto& c = cursor[static_cast<int>(b.dim)];
    Count n = directive_steps(b, c, g);
    if (n < 1) fail("zero steps on dim " + std::string(to_string(b.dim)));
    m.steps.push_back(n);
    if (b.kind == MapKind::Spatial) m.spatial_units[b.level] *= n;
    c = *apply_directive(b, c, 0, g);
  }
  return m;
}

}  // namespace nocperf
