#include "coarse/embedding.hpp"

#include "coarse/error.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <queue>
#include <thread>

namespace coarse {

std::string to_string(AnchorClass c) {
  switch (c) {
    case AnchorClass::InnerCore: return "inner-core";
    case AnchorClass::ChildBoundary: return "child-boundary";
    case AnchorClass::OuterBoundary: return "outer-boundary";
  }
  return "?";
}

NodeId select_node(const ScaleTree& tree, PointId x) {
  std::optional<NodeId> best;
  for (NodeId i = 0; i < tree.nodes().size(); ++i) {
    const auto& n = tree.nodes()[i];
    if (n.is_virtual || !n.set.contains(x)) continue;
    if (!best || n.ref.level < tree.nodes()[*best].ref.level) best = i;
  }
  if (!best)
    throw Error(ErrorCode::NoCoveringSet, "no set of color " + std::to_string(tree.color()) + " contains point " + std::to_string(x));
  return *best;
}

namespace {

void check_shortness(AnchorFunction& f, const SpacePtr& space) {
  std::map<Rational, std::vector<PointId>> groups;
  for (const auto& [p, v] : f.anchors) groups[v].push_back(p);
  for (auto lo = groups.begin(); lo != groups.end(); ++lo) {
    auto field = distance_field(Subset(space, lo->second));
    for (auto hi = std::next(lo); hi != groups.end(); ++hi) {
      const Rational gap = hi->first - lo->first;
      for (PointId z : hi->second) {
        if (!(Extended(gap) > field[z])) continue;
        PointId y = lo->second.front();
        for (PointId c : lo->second)
          if (space->distance(c, z) < space->distance(y, z)) y = c;
        f.shortness.push_back({std::min(y, z), std::max(y, z), gap, space->distance(y, z)});
      }
    }
  }
  std::sort(f.shortness.begin(), f.shortness.end(), [](const AnchorShortness& a, const AnchorShortness& b) {
    return std::pair(a.first, a.second) < std::pair(b.first, b.second);
  });
}

}  // namespace

AnchorFunction build_anchors(const CoverTower& tower, const ScaleTree& tree, NodeId node) {
  const TreeNode& n = tree.node(node);
  AnchorFunction f;
  f.color = tree.color();
  f.node = node;
  if (n.is_virtual) {
    f.top = Rational(0);
    return f;
  }
  f.top = pow2(n.ref.level);
  const Rational& d = tower.levels[n.ref.level].d;

  auto put = [&](PointId p, const Rational& value, AnchorClass cls) {
    auto it = f.provenance.find(p);
    if (it == f.provenance.end()) {
      f.anchors[p] = value;
      f.provenance[p] = cls;
      return;
    }
    const Rational old = f.anchors[p];
    // lower enum value = higher precedence; ties keep the first value
    if (static_cast<int>(cls) < static_cast<int>(it->second)) {
      if (old != value) f.conflicts.push_back({p, cls, it->second, value, old});
      f.anchors[p] = value;
      it->second = cls;
    } else if (old != value) {
      f.conflicts.push_back({p, it->second, cls, old, value});
    }
  };

  for (PointId p : neighborhood(n.set, -d)) put(p, f.top, AnchorClass::InnerCore);
  for (NodeId c : n.children) {
    const TreeNode& child = tree.node(c);
    if (child.is_virtual) continue;
    for (PointId p : discrete_boundary(child.set)) put(p, Rational(child.attach), AnchorClass::ChildBoundary);
  }
  for (PointId p : discrete_boundary(n.set)) put(p, Rational(0), AnchorClass::OuterBoundary);
  check_shortness(f, tower.space);
  return f;
}

Rational short_extension(const AnchorFunction& f, const FiniteMetricSpace& space, PointId x) {
  Rational best = f.top;
  for (const auto& [y, v] : f.anchors) best = std::min(best, v + space.distance(x, y));
  return std::clamp(best, Rational(0), f.top);
}

std::vector<Rational> extend_all(const AnchorFunction& f, const FiniteMetricSpace& space) {
  const std::size_t n = space.size();
  std::vector<Rational> value(n, f.top);
  if (!space.is_graph_metric()) {
    for (PointId x = 0; x < n; ++x) value[x] = short_extension(f, space, x);
    return value;
  }
  // unit edges: Dijkstra from all anchors at once, pruned at the interval top
  using Item = std::pair<Rational, PointId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  for (const auto& [y, v] : f.anchors) {
    Rational start = std::max(v, Rational(0));
    if (start < value[y]) {
      value[y] = start;
      queue.emplace(start, y);
    }
  }
  while (!queue.empty()) {
    auto [v, x] = queue.top();
    queue.pop();
    if (v > value[x]) continue;
    const Rational next = v + 1;
    for (PointId y : space.neighbors(x)) {
      if (next < value[y]) {
        value[y] = next;
        queue.emplace(next, y);
      }
    }
  }
  return value;
}

TreePoint project(const CoverTower& tower, const ScaleTree& tree, PointId x) {
  NodeId node;
  try {
    node = select_node(tree, x);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoCoveringSet || !tree.has_virtual_root()) throw;
    return {tree.root(), Rational(0)};
  }
  return {node, short_extension(build_anchors(tower, tree, node), *tower.space, x)};
}

namespace {

struct ColorResult {
  std::vector<TreePoint> coordinate;
  std::vector<PointId> uncovered;
  std::vector<AnchorSummary> anchors;
};

ColorResult embed_color(const CoverTower& tower, const ScaleTree& tree) {
  const std::size_t n = tower.space->size();
  const auto& nodes = tree.nodes();
  std::vector<std::optional<NodeId>> owner(n);
  for (NodeId i = 0; i < nodes.size(); ++i) {
    if (nodes[i].is_virtual) continue;
    for (PointId p : nodes[i].set)
      if (!owner[p] || nodes[i].ref.level < nodes[*owner[p]].ref.level) owner[p] = i;
  }
  std::vector<std::vector<PointId>> owned(nodes.size());
  ColorResult out;
  out.coordinate.assign(n, TreePoint{tree.root(), Rational(0)});
  for (PointId p = 0; p < n; ++p) {
    if (owner[p]) {
      owned[*owner[p]].push_back(p);
    } else {
      if (!tree.has_virtual_root())
        throw Error(ErrorCode::NoCoveringSet, "point " + std::to_string(p) + " uncovered in color " + std::to_string(tree.color()));
      out.uncovered.push_back(p);
    }
  }
  for (NodeId i = 0; i < nodes.size(); ++i) {
    if (owned[i].empty()) continue;
    AnchorFunction f = build_anchors(tower, tree, i);
    auto value = extend_all(f, *tower.space);
    for (PointId p : owned[i]) out.coordinate[p] = {i, value[p]};
    out.anchors.push_back({f.color, i, f.anchors.size(), std::move(f.conflicts), std::move(f.shortness)});
  }
  return out;
}

}  // namespace

Embedding embed_space(const CoverTower& tower, const std::vector<ScaleTree>& trees, unsigned workers) {
  if (trees.size() != tower.colors) throw Error(ErrorCode::InvalidArgument, "need one tree per color");
  const std::size_t colors = trees.size();
  std::vector<ColorResult> results(colors);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_lock;
  auto work = [&] {
    for (std::size_t c = next++; c < colors; c = next++) {
      try {
        results[c] = embed_color(tower, trees[c]);
      } catch (...) {
        std::lock_guard lock(failure_lock);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < std::max(1u, workers); ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  Embedding e;
  e.space = tower.space;
  e.points.assign(tower.space->size(), ProductPoint{});
  for (auto& p : e.points) p.coordinates.reserve(colors);
  for (std::size_t c = 0; c < colors; ++c) {
    for (PointId p = 0; p < e.points.size(); ++p) e.points[p].coordinates.push_back(results[c].coordinate[p]);
    e.uncovered.push_back(std::move(results[c].uncovered));
    for (auto& a : results[c].anchors) e.anchors.push_back(std::move(a));
  }
  return e;
}

Rational product_distance(const std::vector<ScaleTree>& trees, const ProductPoint& a, const ProductPoint& b) {
  if (a.coordinates.size() != trees.size() || b.coordinates.size() != trees.size())
    throw Error(ErrorCode::InvalidArgument, "product point has the wrong number of coordinates");
  Rational total{0};
  for (std::size_t c = 0; c < trees.size(); ++c) total += trees[c].distance(a.coordinates[c], b.coordinates[c]);
  return total;
}

}  // namespace coarse
