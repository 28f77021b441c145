#include "coarse/scale_tree.hpp"

#include "coarse/error.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

namespace coarse {

namespace {

struct ColorIndex {
  std::vector<SetRef> refs;
  std::vector<const Subset*> sets;
  std::vector<std::vector<std::size_t>> by_point;

  ColorIndex(const CoverTower& tower, std::size_t color) : by_point(tower.space->size()) {
    for (std::size_t k = 0; k < tower.levels.size(); ++k) {
      const auto& families = tower.levels[k].cover.families;
      if (color >= families.size()) continue;
      for (std::size_t e = 0; e < families[color].size(); ++e) {
        const Subset& s = families[color][e];
        if (s.empty()) continue;
        for (PointId p : s) by_point[p].push_back(refs.size());
        refs.push_back({static_cast<int>(k), e});
        sets.push_back(&s);
      }
    }
  }

  std::optional<std::size_t> locate(SetRef ref) const {
    for (std::size_t i = 0; i < refs.size(); ++i)
      if (refs[i] == ref) return i;
    return std::nullopt;
  }

  std::optional<std::size_t> parent_of(std::size_t i, std::size_t color) const {
    const Subset& u = *sets[i];
    std::vector<std::size_t> candidates;
    for (std::size_t j : by_point[u.members().front()]) {
      if (j == i || sets[j]->size() <= u.size()) continue;
      if (u.is_subset_of(*sets[j])) candidates.push_back(j);
    }
    if (candidates.empty()) return std::nullopt;
    std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
      if (sets[a]->size() != sets[b]->size()) return sets[a]->size() < sets[b]->size();
      return refs[a].level < refs[b].level;
    });
    for (std::size_t t = 1; t < candidates.size(); ++t) {
      if (!sets[candidates[t - 1]]->is_subset_of(*sets[candidates[t]])) {
        const auto& a = refs[candidates[t - 1]];
        const auto& b = refs[candidates[t]];
        throw Error(ErrorCode::ChainViolation,
                    "color " + std::to_string(color) + ": supersets (" + std::to_string(a.level) + "," +
                        std::to_string(a.element) + ") and (" + std::to_string(b.level) + "," +
                        std::to_string(b.element) + ") of (" + std::to_string(refs[i].level) + "," +
                        std::to_string(refs[i].element) + ") are incomparable");
      }
    }
    return candidates.front();
  }
};

std::int64_t attach_from_depth(const Subset& child, const std::vector<Extended>& parent_depth, int parent_level,
                               const Rational& parent_d) {
  const Rational cap = pow2(parent_level);
  Extended s{0};
  for (PointId x : child) s = std::max(s, parent_depth[x]);
  if (s.is_infinite()) return cap.numerator();
  return std::min(cap.numerator(), floor(s.value() * cap / parent_d));
}

}  // namespace

std::optional<SetRef> psi(const CoverTower& tower, std::size_t color, SetRef u) {
  ColorIndex index(tower, color);
  auto i = index.locate(u);
  if (!i) throw Error(ErrorCode::InvalidArgument, "set is not a nonempty element of this color");
  auto p = index.parent_of(*i, color);
  if (!p) return std::nullopt;
  return index.refs[*p];
}

std::int64_t attach_value(const Subset& child, const Subset& parent, int parent_level, const Rational& parent_d) {
  return attach_from_depth(child, depth_field(parent), parent_level, parent_d);
}

std::int64_t attach_point(const CoverTower& tower, std::size_t color, SetRef v) {
  auto parent = psi(tower, color, v);
  if (!parent) throw Error(ErrorCode::InvalidArgument, "set has no parent");
  const auto& child = tower.levels[v.level].cover.families[color][v.element];
  const auto& up = tower.levels[parent->level].cover.families[color][parent->element];
  return attach_value(child, up, parent->level, tower.levels[parent->level].d);
}

std::optional<NodeId> ScaleTree::find(SetRef ref) const {
  for (NodeId i = 0; i < nodes_.size(); ++i)
    if (!nodes_[i].is_virtual && nodes_[i].ref == ref) return i;
  return std::nullopt;
}

bool ScaleTree::is_connected_acyclic() const {
  std::size_t roots = 0;
  for (NodeId i = 0; i < nodes_.size(); ++i) {
    if (!nodes_[i].parent) {
      ++roots;
      if (i != root_) return false;
      continue;
    }
    // climbing must end at the root within |nodes| steps
    NodeId v = i;
    std::size_t steps = 0;
    while (nodes_[v].parent) {
      v = *nodes_[v].parent;
      if (++steps > nodes_.size()) return false;
    }
    if (v != root_) return false;
  }
  return roots == 1;
}

void ScaleTree::finalize() {
  for (auto& n : nodes_) n.children.clear();
  for (NodeId i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].parent) nodes_[*nodes_[i].parent].children.push_back(i);
  if (!is_connected_acyclic()) throw Error(ErrorCode::ChainViolation, "parent table is not a rooted tree");
  // top-down pass for depth and root distance
  std::vector<NodeId> order{root_};
  nodes_[root_].depth = 0;
  nodes_[root_].root_distance = Rational(0);
  for (std::size_t t = 0; t < order.size(); ++t) {
    const NodeId v = order[t];
    for (NodeId c : nodes_[v].children) {
      nodes_[c].depth = nodes_[v].depth + 1;
      nodes_[c].root_distance = nodes_[v].root_distance + Rational(nodes_[c].attach);
      order.push_back(c);
    }
  }
  zero_chains_.clear();
  for (NodeId i = 0; i < nodes_.size(); ++i) {
    // report each maximal chain once, from its bottom
    bool child_continues = std::any_of(nodes_[i].children.begin(), nodes_[i].children.end(),
                                       [&](NodeId c) { return nodes_[c].attach == 0 && !nodes_[c].is_virtual; });
    if (child_continues || !nodes_[i].parent || nodes_[i].attach != 0) continue;
    std::size_t length = 0;
    NodeId v = i;
    while (nodes_[v].parent && nodes_[v].attach == 0 && !nodes_[*nodes_[v].parent].is_virtual) {
      ++length;
      v = *nodes_[v].parent;
    }
    if (length >= 2) zero_chains_.push_back({i, length});
  }
}

NodeId ScaleTree::common_ancestor(NodeId a, NodeId b) const {
  while (nodes_[a].depth > nodes_[b].depth) a = *nodes_[a].parent;
  while (nodes_[b].depth > nodes_[a].depth) b = *nodes_[b].parent;
  while (a != b) {
    a = *nodes_[a].parent;
    b = *nodes_[b].parent;
  }
  return a;
}

Rational ScaleTree::distance(const TreePoint& p, const TreePoint& q) const {
  if (p.node == q.node) return abs(p.offset - q.offset);
  const NodeId c = common_ancestor(p.node, q.node);
  auto climb = [&](const TreePoint& x, Rational& cost) -> Rational {
    if (x.node == c) {
      cost = Rational(0);
      return x.offset;
    }
    NodeId v = x.node;
    while (*nodes_[v].parent != c) v = *nodes_[v].parent;
    cost = x.offset + nodes_[x.node].root_distance - nodes_[v].root_distance;
    return Rational(nodes_[v].attach);
  };
  Rational cost_p, cost_q;
  Rational at_p = climb(p, cost_p);
  Rational at_q = climb(q, cost_q);
  return cost_p + cost_q + abs(at_p - at_q);
}

Rational tree_distance(const ScaleTree& tree, const TreePoint& p, const TreePoint& q) { return tree.distance(p, q); }

FourPointResult four_point_check(const ScaleTree& tree, std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto& nodes = tree.nodes();
  std::uniform_int_distribution<std::size_t> pick(0, nodes.size() - 1);
  auto sample = [&]() -> TreePoint {
    const NodeId n = pick(rng);
    const std::int64_t halves = 2 * floor(nodes[n].length);
    std::uniform_int_distribution<std::int64_t> off(0, halves);
    return {n, Rational(off(rng), 2)};
  };
  FourPointResult result;
  for (; result.samples < samples; ++result.samples) {
    std::array<TreePoint, 4> q{sample(), sample(), sample(), sample()};
    auto d = [&](int a, int b) { return tree.distance(q[a], q[b]); };
    std::array<Rational, 3> sums{d(0, 1) + d(2, 3), d(0, 2) + d(1, 3), d(0, 3) + d(1, 2)};
    std::sort(sums.begin(), sums.end());
    if (sums[1] != sums[2]) {
      if (!result.witness) result.witness = q;
      ++result.failures;
    }
  }
  return result;
}

ScaleTree build_tree(const CoverTower& tower, std::size_t color) {
  if (color >= tower.colors) throw Error(ErrorCode::InvalidArgument, "color out of range");
  ColorIndex index(tower, color);
  ScaleTree tree;
  tree.color_ = color;
  tree.nodes_.resize(index.refs.size());
  std::map<std::size_t, std::vector<Extended>> depth_cache;
  std::vector<NodeId> roots;
  boost::dynamic_bitset<> covered(tower.space->size());
  for (std::size_t i = 0; i < index.refs.size(); ++i) {
    TreeNode& n = tree.nodes_[i];
    n.ref = index.refs[i];
    n.set = *index.sets[i];
    n.length = pow2(n.ref.level);
    covered |= n.set.bits();
    auto parent = index.parent_of(i, color);
    if (!parent) {
      roots.push_back(i);
      continue;
    }
    n.parent = *parent;
    auto it = depth_cache.find(*parent);
    if (it == depth_cache.end()) it = depth_cache.emplace(*parent, depth_field(*index.sets[*parent])).first;
    const int parent_level = index.refs[*parent].level;
    n.attach = attach_from_depth(n.set, it->second, parent_level, tower.levels[parent_level].d);
  }
  if (roots.size() == 1 && covered.all()) {
    tree.root_ = roots.front();
  } else {
    TreeNode root;
    root.is_virtual = true;
    root.ref = {-1, 0};
    root.set = Subset(tower.space);
    root.length = Rational(0);
    tree.root_ = tree.nodes_.size();
    for (NodeId r : roots) tree.nodes_[r].parent = tree.root_;
    tree.nodes_.push_back(std::move(root));
  }
  tree.finalize();
  return tree;
}

ScaleTree assemble_tree(std::size_t color, std::vector<TreeNode> nodes, NodeId root) {
  ScaleTree tree;
  tree.color_ = color;
  tree.nodes_ = std::move(nodes);
  tree.root_ = root;
  if (root >= tree.nodes_.size()) throw Error(ErrorCode::InvalidArgument, "root out of range");
  tree.finalize();
  return tree;
}

DiscreteTree discretize(const ScaleTree& tree) {
  const auto& nodes = tree.nodes();
  // first id of the points (node, 1..len); the root also owns offset 0
  std::vector<std::int64_t> parent;
  std::vector<std::string> labels;
  std::vector<TreePoint> located;
  std::vector<std::int64_t> first(nodes.size(), -1);
  auto point_of = [&](NodeId n, std::int64_t t) -> std::int64_t {
    // (n, 0) is the parent's attachment point
    while (t == 0 && nodes[n].parent) {
      t = nodes[n].attach;
      n = *nodes[n].parent;
    }
    if (t == 0) return 0;  // the root point
    return first[n] + (t - 1);
  };
  parent.push_back(-1);
  labels.push_back("n" + std::to_string(tree.root()) + "@0");
  located.push_back({tree.root(), Rational(0)});

  std::vector<NodeId> order{tree.root()};
  for (std::size_t t = 0; t < order.size(); ++t)
    for (NodeId c : nodes[order[t]].children) order.push_back(c);
  for (NodeId n : order) {
    const std::int64_t len = floor(nodes[n].length);
    first[n] = static_cast<std::int64_t>(parent.size());
    for (std::int64_t t = 1; t <= len; ++t) {
      parent.push_back(t == 1 ? point_of(n, 0) : first[n] + (t - 2));
      labels.push_back("n" + std::to_string(n) + "@" + std::to_string(t));
      located.push_back({n, Rational(t)});
    }
  }
  DiscreteTree out;
  out.space = tree_space(std::move(parent), std::move(labels), 0);
  out.located = std::move(located);
  return out;
}

ColoredCover tree_colored_cover(const DiscreteTree& tree, const Rational& d) {
  if (d <= Rational(0)) throw Error(ErrorCode::InvalidArgument, "tree cover needs d > 0");
  const auto& space = *tree.space;
  const auto& desc = std::get<TreeDescriptor>(space.descriptor());
  const std::size_t n = space.size();
  std::vector<std::int64_t> depth(n, 0);
  for (PointId i = 1; i < n; ++i) depth[i] = depth[static_cast<std::size_t>(desc.parent[i])] + 1;  // parents precede children
  const std::int64_t half = floor(d / 2);

  // (annulus, group ancestor) -> members
  std::map<std::pair<std::int64_t, std::int64_t>, std::vector<PointId>> groups;
  for (PointId i = 0; i < n; ++i) {
    const std::int64_t j = floor(Rational(depth[i]) / d);
    const std::int64_t key_depth = std::max<std::int64_t>(0, ceil(Rational(j) * d) - half);
    std::int64_t v = i;
    while (depth[static_cast<std::size_t>(v)] > key_depth) v = desc.parent[static_cast<std::size_t>(v)];
    groups[{j, v}].push_back(i);
  }
  ColoredCover cover;
  cover.space = tree.space;
  cover.d = d;
  cover.families.assign(2, {});
  for (auto& [key, members] : groups) cover.families[static_cast<std::size_t>(key.first % 2)].emplace_back(tree.space, std::move(members));
  cover.mesh_bound = mesh(cover.elements());
  return cover;
}

ColoredCover tree_colored_cover(const ScaleTree& tree, const Rational& d) { return tree_colored_cover(discretize(tree), d); }

}  // namespace coarse
