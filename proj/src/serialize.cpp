#include "coarse/serialize.hpp"

#include "coarse/error.hpp"

#include <fstream>
#include <sstream>

namespace coarse {

namespace {

constexpr const char* kPrefix = "coarse/";

Json header(ArtifactKind kind) {
  Json doc;
  doc["format"] = kPrefix + to_string(kind);
  doc["version"] = kFormatVersion;
  return doc;
}

void expect(const Json& doc, ArtifactKind kind) {
  if (artifact_kind(doc) != kind)
    throw Error(ErrorCode::ParseError, "expected a " + to_string(kind) + " document, got " + doc.value("format", std::string("?")));
}

std::string rat(const Rational& r) { return to_string(r); }

Rational rat(const Json& j) {
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  if (!j.is_string()) throw Error(ErrorCode::ParseError, "expected a rational, got " + j.dump());
  return parse_rational(j.get<std::string>());
}

const Json& field(const Json& doc, const char* name) {
  auto it = doc.find(name);
  if (it == doc.end()) throw Error(ErrorCode::ParseError, std::string("missing field '") + name + "'");
  return *it;
}

template <class T>
T get(const Json& doc, const char* name) {
  try {
    return field(doc, name).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("field '") + name + "': " + e.what());
  }
}

PointId point(const Json& j, std::size_t n) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < 0 || static_cast<std::size_t>(j.get<std::int64_t>()) >= n)
    throw Error(ErrorCode::ParseError, "point id out of range: " + j.dump());
  return static_cast<PointId>(j.get<std::int64_t>());
}

Json metric_json(const FiniteMetricSpace& space) {
  Json m;
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, GridDescriptor>) {
          m["kind"] = "grid";
          m["data"] = {{"dim", d.dim}, {"extent", d.extent}, {"norm", to_string(d.norm)}};
        } else if constexpr (std::is_same_v<T, FreeGroupDescriptor>) {
          m["kind"] = "free-group";
          m["data"] = {{"rank", d.rank}, {"radius", d.radius}};
        } else if constexpr (std::is_same_v<T, TreeDescriptor>) {
          m["kind"] = "tree";
          m["data"] = {{"parent", d.parent}};
        } else if constexpr (std::is_same_v<T, ProductDescriptor>) {
          m["kind"] = "product";
          m["data"] = {{"first", to_json(*d.first)}, {"second", to_json(*d.second)}};
        } else {
          // original units: from_matrix rescales again on load
          m["kind"] = "explicit";
          Json lower = Json::array();
          for (PointId i = 1; i < space.size(); ++i)
            for (PointId j = 0; j < i; ++j) lower.push_back(rat(space.distance(i, j) / space.scale()));
          m["data"] = {{"lower", std::move(lower)}};
        }
      },
      space.descriptor());
  return m;
}

Json families_json(const ColoredCover& cover) {
  Json families = Json::array();
  for (const auto& family : cover.families) {
    Json f = Json::array();
    for (const auto& u : family) f.push_back(u.members());
    families.push_back(std::move(f));
  }
  return families;
}

ColoredCover cover_body(const Json& doc, const SpacePtr& space) {
  ColoredCover cover;
  cover.space = space;
  cover.d = rat(field(doc, "d"));
  cover.mesh_bound = rat(field(doc, "mesh_bound"));
  for (const auto& f : field(doc, "families")) {
    std::vector<Subset> family;
    for (const auto& u : f) {
      std::vector<PointId> members;
      for (const auto& p : u) members.push_back(point(p, space->size()));
      family.emplace_back(space, std::move(members));
    }
    cover.families.push_back(std::move(family));
  }
  return cover;
}

Json cover_body_json(const ColoredCover& cover) {
  return {{"d", rat(cover.d)}, {"mesh_bound", rat(cover.mesh_bound)}, {"families", families_json(cover)}};
}

std::optional<Json> witness_json(const std::optional<PairWitness>& w) {
  if (!w) return std::nullopt;
  return Json{{"first", w->first}, {"second", w->second}, {"distance", rat(w->distance)}, {"value", rat(w->value)}};
}

Json nullable(const std::optional<Json>& j) { return j ? *j : Json(nullptr); }

Json buckets_json(const std::vector<Bucket>& buckets) {
  Json out = Json::array();
  for (const auto& b : buckets)
    out.push_back({{"distance", rat(b.distance)},
                   {"rho1", rat(b.rho1)},
                   {"rho2", rat(b.rho2)},
                   {"rho1_regularized", rat(b.rho1_regularized)},
                   {"pairs", b.pairs}});
  return out;
}

Json scope_json(const ScopeStats& s) {
  Json shortness = Json::array();
  for (const auto& v : s.shortness)
    shortness.push_back({{"color", v.color},
                         {"violations", v.violations},
                         {"worst_margin", rat(v.worst_margin)},
                         {"worst", nullable(witness_json(v.worst))}});
  Json deep = Json::array();
  for (const auto& d : s.deep)
    deep.push_back({{"level", d.level},
                    {"bound", rat(d.bound)},
                    {"checked", d.checked},
                    {"failures", d.failures},
                    {"pass", d.failures == 0},
                    {"weakest", nullable(witness_json(d.weakest))}});
  return {{"pairs", s.pairs},
          {"shortness", std::move(shortness)},
          {"lipschitz_violations", s.lipschitz_violations},
          {"lipschitz_worst", nullable(witness_json(s.lipschitz_worst))},
          {"deep_pairs", std::move(deep)}};
}

}  // namespace

std::string to_string(ArtifactKind kind) {
  switch (kind) {
    case ArtifactKind::Space: return "space";
    case ArtifactKind::Cover: return "cover";
    case ArtifactKind::Tower: return "tower";
    case ArtifactKind::Trees: return "trees";
    case ArtifactKind::Embedding: return "embedding";
    case ArtifactKind::Report: return "report";
  }
  return "?";
}

ArtifactKind artifact_kind(const Json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::ParseError, "artifact is not a JSON object");
  const auto format = get<std::string>(doc, "format");
  const auto version = get<int>(doc, "version");
  if (version != kFormatVersion) throw Error(ErrorCode::ParseError, "unsupported version " + std::to_string(version));
  for (auto k : {ArtifactKind::Space, ArtifactKind::Cover, ArtifactKind::Tower, ArtifactKind::Trees,
                 ArtifactKind::Embedding, ArtifactKind::Report})
    if (format == kPrefix + to_string(k)) return k;
  throw Error(ErrorCode::ParseError, "unknown format '" + format + "'");
}

Json to_json(const FiniteMetricSpace& space) {
  Json doc = header(ArtifactKind::Space);
  Json labels = Json::array();
  for (PointId p = 0; p < space.size(); ++p) labels.push_back(space.label(p));
  doc["points"] = std::move(labels);
  doc["base_point"] = space.base_point();
  doc["metric"] = metric_json(space);
  Json margins = Json::array();
  for (const auto& m : space.window_margins()) margins.push_back(rat(m / space.scale()));
  doc["window_margin"] = std::move(margins);
  return doc;
}

SpacePtr space_from_json(const Json& doc, std::size_t max_points) {
  expect(doc, ArtifactKind::Space);
  const auto& metric = field(doc, "metric");
  const auto kind = get<std::string>(metric, "kind");
  const auto& data = field(metric, "data");
  auto labels = get<std::vector<std::string>>(doc, "points");
  const auto base = get<std::int64_t>(doc, "base_point");
  if (base < 0 || static_cast<std::size_t>(base) >= labels.size()) throw Error(ErrorCode::ParseError, "base point out of range");
  if (labels.size() > max_points) throw Error(ErrorCode::SizeLimit, "space has more than " + std::to_string(max_points) + " points");

  SpacePtr space;
  if (kind == "grid") {
    space = gen_grid(get<int>(data, "dim"), get<int>(data, "extent"), parse_norm(get<std::string>(data, "norm")), max_points);
  } else if (kind == "free-group") {
    space = gen_free_group_ball(get<int>(data, "rank"), get<int>(data, "radius"), max_points);
  } else if (kind == "tree") {
    space = tree_space(get<std::vector<std::int64_t>>(data, "parent"), labels, static_cast<PointId>(base), max_points);
  } else if (kind == "product") {
    space = product_space(space_from_json(field(data, "first"), max_points), space_from_json(field(data, "second"), max_points),
                          max_points);
  } else if (kind == "explicit") {
    std::vector<Rational> lower, margins;
    for (const auto& v : field(data, "lower")) lower.push_back(rat(v));
    for (const auto& v : field(doc, "window_margin")) margins.push_back(rat(v));
    return FiniteMetricSpace::from_matrix(std::move(labels), std::move(lower), static_cast<PointId>(base), std::move(margins));
  } else {
    throw Error(ErrorCode::ParseError, "unknown metric kind '" + kind + "'");
  }
  // generated spaces must agree with the stored point list
  if (space->size() != labels.size()) throw Error(ErrorCode::ParseError, "point count does not match the generator");
  for (PointId p = 0; p < space->size(); ++p)
    if (space->label(p) != labels[p]) throw Error(ErrorCode::ParseError, "label mismatch at point " + std::to_string(p));
  if (space->base_point() != static_cast<PointId>(base)) throw Error(ErrorCode::ParseError, "base point does not match the generator");
  return space;
}

Json to_json(const ColoredCover& cover) {
  Json doc = header(ArtifactKind::Cover);
  doc["space"] = to_json(*cover.space);
  doc.update(cover_body_json(cover));
  return doc;
}

ColoredCover cover_from_json(const Json& doc, std::size_t max_points) {
  expect(doc, ArtifactKind::Cover);
  return cover_body(doc, space_from_json(field(doc, "space"), max_points));
}

Json to_json(const CoverTower& tower) {
  Json doc = header(ArtifactKind::Tower);
  doc["space"] = to_json(*tower.space);
  doc["colors"] = tower.colors;
  doc["base_point"] = tower.base_point;
  doc["requested_levels"] = tower.requested_levels;
  doc["window_exhausted"] = tower.window_exhausted;
  Json levels = Json::array();
  for (const auto& l : tower.levels)
    levels.push_back({{"d", rat(l.d)}, {"m", rat(l.m)}, {"saturated", l.saturated}, {"cover", cover_body_json(l.cover)}});
  doc["levels"] = std::move(levels);
  Json provenance = Json::array();
  for (const auto& p : tower.provenance) provenance.push_back({{"level", p.level}, {"action", p.action}, {"detail", p.detail}});
  doc["provenance"] = std::move(provenance);
  return doc;
}

CoverTower tower_from_json(const Json& doc, std::size_t max_points) {
  expect(doc, ArtifactKind::Tower);
  CoverTower tower;
  tower.space = space_from_json(field(doc, "space"), max_points);
  tower.colors = get<std::size_t>(doc, "colors");
  tower.base_point = point(field(doc, "base_point"), tower.space->size());
  tower.requested_levels = get<int>(doc, "requested_levels");
  tower.window_exhausted = get<bool>(doc, "window_exhausted");
  for (const auto& l : field(doc, "levels")) {
    TowerLevel level;
    level.d = rat(field(l, "d"));
    level.m = rat(field(l, "m"));
    level.saturated = get<bool>(l, "saturated");
    level.cover = cover_body(field(l, "cover"), tower.space);
    tower.levels.push_back(std::move(level));
  }
  for (const auto& p : field(doc, "provenance"))
    tower.provenance.push_back({get<int>(p, "level"), get<std::string>(p, "action"), get<std::string>(p, "detail")});
  return tower;
}

Json to_json(const CoverTower& tower, const std::vector<ScaleTree>& trees) {
  Json doc = header(ArtifactKind::Trees);
  doc["tower"] = to_json(tower);
  Json list = Json::array();
  for (const auto& t : trees) {
    Json nodes = Json::array();
    for (NodeId i = 0; i < t.nodes().size(); ++i) {
      const auto& n = t.nodes()[i];
      Json row = {{"id", i}, {"virtual", n.is_virtual}};
      if (!n.is_virtual) row["set"] = {n.ref.level, n.ref.element};
      row["parent"] = n.parent ? Json(*n.parent) : Json(nullptr);
      row["attach"] = n.attach;
      nodes.push_back(std::move(row));
    }
    Json lint = Json::array();
    for (const auto& z : t.zero_chains()) lint.push_back({{"bottom", z.bottom}, {"length", z.length}});
    list.push_back({{"color", t.color()}, {"root", t.root()}, {"nodes", std::move(nodes)}, {"zero_chains", std::move(lint)}});
  }
  doc["trees"] = std::move(list);
  return doc;
}

std::vector<ScaleTree> trees_from_json(const Json& doc, const CoverTower& tower) {
  expect(doc, ArtifactKind::Trees);
  std::vector<ScaleTree> trees;
  for (const auto& t : field(doc, "trees")) {
    const auto color = get<std::size_t>(t, "color");
    if (color >= tower.colors) throw Error(ErrorCode::ParseError, "tree color out of range");
    std::vector<TreeNode> nodes;
    const auto& table = field(t, "nodes");
    for (const auto& row : table) {
      TreeNode n;
      if (get<std::size_t>(row, "id") != nodes.size()) throw Error(ErrorCode::ParseError, "node ids must be consecutive");
      n.is_virtual = get<bool>(row, "virtual");
      if (n.is_virtual) {
        n.ref = {-1, 0};
        n.set = Subset(tower.space);
        n.length = Rational(0);
      } else {
        const auto& ref = field(row, "set");
        n.ref = {ref.at(0).get<int>(), ref.at(1).get<std::size_t>()};
        if (n.ref.level < 0 || static_cast<std::size_t>(n.ref.level) >= tower.levels.size() ||
            n.ref.element >= tower.levels[n.ref.level].cover.families.at(color).size())
          throw Error(ErrorCode::ParseError, "tree node refers to a missing set");
        n.set = tower.levels[n.ref.level].cover.families[color][n.ref.element];
        n.length = pow2(n.ref.level);
      }
      const auto& parent = field(row, "parent");
      if (!parent.is_null()) {
        const auto p = parent.get<std::size_t>();
        if (p >= table.size()) throw Error(ErrorCode::ParseError, "parent id out of range");
        n.parent = p;
      }
      n.attach = get<std::int64_t>(row, "attach");
      nodes.push_back(std::move(n));
    }
    trees.push_back(assemble_tree(color, std::move(nodes), get<std::size_t>(t, "root")));
  }
  if (trees.size() != tower.colors) throw Error(ErrorCode::ParseError, "need one tree per color");
  return trees;
}

Json to_json(const CoverTower& tower, const std::vector<ScaleTree>& trees, const Embedding& embedding) {
  Json doc = header(ArtifactKind::Embedding);
  doc["trees"] = to_json(tower, trees);
  Json points = Json::array();
  for (const auto& p : embedding.points) {
    Json row = Json::array();
    for (const auto& c : p.coordinates) row.push_back({c.node, rat(c.offset)});
    points.push_back(std::move(row));
  }
  doc["points"] = std::move(points);
  doc["uncovered"] = embedding.uncovered;
  Json anchors = Json::array();
  for (const auto& a : embedding.anchors) {
    Json conflicts = Json::array();
    for (const auto& c : a.conflicts)
      conflicts.push_back({{"point", c.point},
                           {"kept", to_string(c.kept)},
                           {"dropped", to_string(c.dropped)},
                           {"kept_value", rat(c.kept_value)},
                           {"dropped_value", rat(c.dropped_value)}});
    Json shortness = Json::array();
    for (const auto& s : a.shortness)
      shortness.push_back({{"first", s.first}, {"second", s.second}, {"gap", rat(s.gap)}, {"distance", rat(s.distance)}});
    anchors.push_back({{"color", a.color},
                       {"node", a.node},
                       {"anchors", a.anchor_count},
                       {"conflicts", std::move(conflicts)},
                       {"shortness", std::move(shortness)}});
  }
  doc["anchors"] = std::move(anchors);
  return doc;
}

Embedding embedding_from_json(const Json& doc, const CoverTower& tower) {
  expect(doc, ArtifactKind::Embedding);
  auto parse_class = [](const std::string& s) {
    for (auto c : {AnchorClass::InnerCore, AnchorClass::ChildBoundary, AnchorClass::OuterBoundary})
      if (to_string(c) == s) return c;
    throw Error(ErrorCode::ParseError, "unknown anchor class '" + s + "'");
  };
  Embedding e;
  e.space = tower.space;
  const auto& points = field(doc, "points");
  if (points.size() != tower.space->size()) throw Error(ErrorCode::ParseError, "embedding point count mismatch");
  for (const auto& row : points) {
    ProductPoint p;
    if (row.size() != tower.colors) throw Error(ErrorCode::ParseError, "embedding coordinate count mismatch");
    for (const auto& c : row) p.coordinates.push_back({c.at(0).get<NodeId>(), rat(c.at(1))});
    e.points.push_back(std::move(p));
  }
  e.uncovered = get<std::vector<std::vector<PointId>>>(doc, "uncovered");
  for (const auto& a : field(doc, "anchors")) {
    AnchorSummary s;
    s.color = get<std::size_t>(a, "color");
    s.node = get<NodeId>(a, "node");
    s.anchor_count = get<std::size_t>(a, "anchors");
    for (const auto& c : field(a, "conflicts"))
      s.conflicts.push_back({get<PointId>(c, "point"), parse_class(get<std::string>(c, "kept")),
                             parse_class(get<std::string>(c, "dropped")), rat(field(c, "kept_value")),
                             rat(field(c, "dropped_value"))});
    for (const auto& v : field(a, "shortness"))
      s.shortness.push_back({get<PointId>(v, "first"), get<PointId>(v, "second"), rat(field(v, "gap")), rat(field(v, "distance"))});
    e.anchors.push_back(std::move(s));
  }
  return e;
}

Json to_json(const DistortionReport& report, const CoverTower& tower) {
  Json doc = header(ArtifactKind::Report);
  doc["colors"] = report.colors;
  Json scales = Json::array();
  for (std::size_t k = 0; k < tower.levels.size(); ++k) {
    const auto& l = tower.levels[k];
    auto rho = report.rho1_at(l.m + 1);
    scales.push_back({{"level", k},
                      {"d", rat(l.d)},
                      {"m", rat(l.m)},
                      {"saturated", l.saturated},
                      {"rho1_at_m_plus_1", rho ? Json(rat(*rho)) : Json(nullptr)},
                      {"bound", rat(pow2(static_cast<int>(k)))}});
  }
  doc["levels"] = std::move(scales);
  doc["interior_threshold"] = rat(report.interior_threshold);
  doc["frontier_excluded"] = {{"points", report.frontier_points.size()},
                              {"pairs", report.frontier_pairs()},
                              {"listing", report.frontier_points}};
  doc["all"] = scope_json(report.all);
  doc["interior"] = scope_json(report.interior);
  Json failures = Json::array();
  for (const auto& f : report.deep_points.failures)
    failures.push_back({{"color", f.color}, {"point", f.point}, {"level", f.level}, {"offset", rat(f.offset)}, {"interior", f.interior}});
  doc["deep_points"] = {{"checked", report.deep_points.checked},
                        {"interior_checked", report.deep_points.interior_checked},
                        {"failures", std::move(failures)}};
  doc["anchor_conflicts"] = report.anchor_conflicts;
  doc["anchor_shortness"] = report.anchor_shortness;
  doc["uncovered"] = report.uncovered;
  doc["buckets"] = buckets_json(report.buckets);
  doc["interior_buckets"] = buckets_json(report.interior_buckets);
  return doc;
}

std::string report_csv(const DistortionReport& report) {
  std::ostringstream out;
  out << "distance,rho1,rho2,pairs\n";
  for (const auto& b : report.buckets) out << rat(b.distance) << ',' << rat(b.rho1) << ',' << rat(b.rho2) << ',' << b.pairs << '\n';
  return out.str();
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorCode::InvalidArgument, "write failed for " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string dump(const Json& doc) { return doc.dump(1) + "\n"; }

}  // namespace coarse
