#include "coarse/metric_space.hpp"

#include "coarse/error.hpp"

#include <algorithm>
#include <cstdlib>
#include <queue>

namespace coarse {

std::string to_string(Norm norm) { return norm == Norm::L1 ? "l1" : "linf"; }

Norm parse_norm(std::string_view text) {
  if (text == "l1") return Norm::L1;
  if (text == "linf") return Norm::LInf;
  throw Error(ErrorCode::ParseError, "unknown metric '" + std::string(text) + "'");
}

struct SpaceBuilder {
  static std::shared_ptr<FiniteMetricSpace> make() { return std::shared_ptr<FiniteMetricSpace>(new FiniteMetricSpace()); }
  static FiniteMetricSpace& edit(FiniteMetricSpace& s) { return s; }

  static void index_labels(FiniteMetricSpace& s) {
    s.label_index_.reserve(s.labels_.size());
    for (PointId i = 0; i < s.labels_.size(); ++i) {
      if (!s.label_index_.emplace(s.labels_[i], i).second)
        throw Error(ErrorCode::InvalidArgument, "duplicate point label '" + s.labels_[i] + "'");
    }
  }

  static std::vector<std::int32_t> tree_depths(const std::vector<std::int64_t>& parent) {
    std::vector<std::int32_t> depth(parent.size(), -1);
    for (std::size_t i = 0; i < parent.size(); ++i) {
      // walk up until a known depth; parents need not precede children
      std::vector<std::size_t> chain;
      std::size_t v = i;
      while (depth[v] < 0 && parent[v] >= 0) {
        chain.push_back(v);
        if (chain.size() > parent.size()) throw Error(ErrorCode::InvalidArgument, "tree parent array has a cycle");
        v = static_cast<std::size_t>(parent[v]);
      }
      if (depth[v] < 0) depth[v] = 0;
      for (auto it = chain.rbegin(); it != chain.rend(); ++it) depth[*it] = depth[static_cast<std::size_t>(parent[*it])] + 1;
    }
    return depth;
  }

  static void fill_tree(FiniteMetricSpace& s, std::vector<std::int64_t> parent) {
    std::size_t roots = 0;
    for (auto p : parent) {
      if (p < 0) ++roots;
      else if (static_cast<std::size_t>(p) >= parent.size())
        throw Error(ErrorCode::InvalidArgument, "tree parent out of range");
    }
    if (roots != 1) throw Error(ErrorCode::InvalidArgument, "tree must have exactly one root");
    s.depth_ = tree_depths(parent);
    s.parent_ = std::move(parent);
    s.adjacency_.assign(s.parent_.size(), {});
    for (std::size_t i = 0; i < s.parent_.size(); ++i) {
      if (s.parent_[i] >= 0) {
        s.adjacency_[i].push_back(static_cast<PointId>(s.parent_[i]));
        s.adjacency_[static_cast<std::size_t>(s.parent_[i])].push_back(static_cast<PointId>(i));
      }
    }
    for (auto& adj : s.adjacency_) std::sort(adj.begin(), adj.end());
    // tree diameter: two sweeps
    auto farthest = [&](PointId from) {
      std::vector<std::int64_t> dist(s.parent_.size(), -1);
      std::queue<PointId> q;
      dist[from] = 0;
      q.push(from);
      PointId last = from;
      while (!q.empty()) {
        PointId v = q.front();
        q.pop();
        if (dist[v] > dist[last] || (dist[v] == dist[last] && v < last)) last = v;
        for (PointId w : s.adjacency_[v]) {
          if (dist[w] < 0) {
            dist[w] = dist[v] + 1;
            q.push(w);
          }
        }
      }
      return std::pair{last, dist[last]};
    };
    auto [a, da] = farthest(0);
    (void)da;
    s.diameter_ = Rational(farthest(a).second);
  }
};

std::optional<PointId> FiniteMetricSpace::find(std::string_view label) const {
  auto it = label_index_.find(std::string(label));
  if (it == label_index_.end()) return std::nullopt;
  return it->second;
}

PointId FiniteMetricSpace::index_of(std::string_view label) const {
  if (auto p = find(label)) return *p;
  throw Error(ErrorCode::ParseError, "unknown point '" + std::string(label) + "'");
}

std::int64_t FiniteMetricSpace::tree_distance(PointId a, PointId b) const {
  std::int64_t steps = 0;
  std::int64_t u = a, v = b;
  while (depth_[u] > depth_[v]) { u = parent_[u]; ++steps; }
  while (depth_[v] > depth_[u]) { v = parent_[v]; ++steps; }
  while (u != v) {
    u = parent_[u];
    v = parent_[v];
    steps += 2;
  }
  return steps;
}

Rational FiniteMetricSpace::distance(PointId a, PointId b) const {
  if (a == b) return Rational(0);
  switch (descriptor_.index()) {
    case 0: {  // grid
      const auto& g = std::get<GridDescriptor>(descriptor_);
      const std::int32_t* pa = coords_.data() + static_cast<std::size_t>(a) * g.dim;
      const std::int32_t* pb = coords_.data() + static_cast<std::size_t>(b) * g.dim;
      std::int64_t acc = 0;
      for (int k = 0; k < g.dim; ++k) {
        std::int64_t delta = std::abs(static_cast<std::int64_t>(pa[k]) - pb[k]);
        acc = g.norm == Norm::L1 ? acc + delta : std::max(acc, delta);
      }
      return Rational(acc);
    }
    case 1:
    case 2:
      return Rational(tree_distance(a, b));
    case 3: {
      PointId hi = std::max(a, b), lo = std::min(a, b);
      return lower_[static_cast<std::size_t>(hi) * (hi - 1) / 2 + lo];
    }
    default: {
      const auto& p = std::get<ProductDescriptor>(descriptor_);
      auto m = static_cast<PointId>(p.second->size());
      return p.first->distance(a / m, b / m) + p.second->distance(a % m, b % m);
    }
  }
}

SpacePtr FiniteMetricSpace::from_matrix(std::vector<std::string> labels, std::vector<Rational> lower,
                                        PointId base_point, std::vector<Rational> margins) {
  const std::size_t n = labels.size();
  if (n == 0) throw Error(ErrorCode::EmptySet, "metric space needs at least one point");
  if (lower.size() != n * (n - 1) / 2) throw Error(ErrorCode::InvalidArgument, "lower-triangular matrix has wrong size");
  if (base_point >= n) throw Error(ErrorCode::InvalidArgument, "base point out of range");
  if (margins.empty()) margins.assign(n, Rational(0));
  if (margins.size() != n) throw Error(ErrorCode::InvalidArgument, "margin count mismatch");

  Rational smallest{0};
  bool any = false;
  for (const auto& v : lower) {
    if (v <= Rational(0)) throw Error(ErrorCode::InvalidArgument, "distinct points must have positive distance");
    if (!any || v < smallest) smallest = v;
    any = true;
  }
  auto s = SpaceBuilder::make();
  s->scale_ = Rational(1);
  if (any && smallest < Rational(1)) {
    s->scale_ = Rational(1) / smallest;
    for (auto& v : lower) v *= s->scale_;
    for (auto& m : margins) m *= s->scale_;
  }
  s->labels_ = std::move(labels);
  SpaceBuilder::index_labels(*s);
  s->base_point_ = base_point;
  s->margins_ = std::move(margins);
  s->diameter_ = Rational(0);
  for (const auto& v : lower) s->diameter_ = std::max(s->diameter_, v);
  s->lower_ = std::move(lower);
  s->descriptor_ = ExplicitDescriptor{};
  return s;
}

namespace {

void check_size(std::size_t n, std::size_t max_points) {
  if (n > max_points)
    throw Error(ErrorCode::SizeLimit, std::to_string(n) + " points exceeds the cap of " + std::to_string(max_points));
}

}  // namespace

SpacePtr gen_grid(int n, int extent, Norm norm, std::size_t max_points) {
  if (n < 1 || extent < 1) throw Error(ErrorCode::InvalidArgument, "grid needs n >= 1 and extent >= 1");
  const std::size_t side = static_cast<std::size_t>(2 * extent + 1);
  std::size_t count = 1;
  for (int k = 0; k < n; ++k) {
    if (count > max_points / side + 1) throw Error(ErrorCode::SizeLimit, "grid too large");
    count *= side;
  }
  check_size(count, max_points);

  auto s = SpaceBuilder::make();
  s->descriptor_ = GridDescriptor{n, extent, norm};
  s->coords_.resize(count * static_cast<std::size_t>(n));
  s->labels_.reserve(count);
  s->margins_.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t rest = i;
    std::int32_t widest = 0;
    std::string label = n > 1 ? "(" : "";
    // last coordinate varies fastest
    for (int k = n - 1; k >= 0; --k) {
      s->coords_[i * n + k] = static_cast<std::int32_t>(rest % side) - extent;
      rest /= side;
    }
    for (int k = 0; k < n; ++k) {
      std::int32_t c = s->coords_[i * n + k];
      widest = std::max(widest, std::abs(c));
      if (k > 0) label += ",";
      label += std::to_string(c);
    }
    if (n > 1) label += ")";
    s->labels_.push_back(std::move(label));
    s->margins_.emplace_back(extent - widest);
  }
  SpaceBuilder::index_labels(*s);
  std::size_t origin = 0;
  for (int k = 0; k < n; ++k) origin = origin * side + static_cast<std::size_t>(extent);
  s->base_point_ = static_cast<PointId>(origin);
  s->diameter_ = Rational(norm == Norm::L1 ? 2 * extent * n : 2 * extent);

  // unit graph: axis moves for l1, king moves for linf
  s->adjacency_.assign(count, {});
  std::vector<std::int32_t> step(n);
  for (std::size_t i = 0; i < count; ++i) {
    const std::int32_t* c = s->coords_.data() + i * n;
    std::size_t moves = 1;
    for (int k = 0; k < n; ++k) moves *= 3;
    for (std::size_t m = 0; m < moves; ++m) {
      std::size_t r = m;
      int nonzero = 0;
      bool inside = true;
      std::size_t j = 0;
      for (int k = 0; k < n; ++k) {
        step[k] = static_cast<std::int32_t>(r % 3) - 1;
        r /= 3;
        nonzero += step[k] != 0;
      }
      if (nonzero == 0 || (norm == Norm::L1 && nonzero != 1)) continue;
      for (int k = 0; k < n; ++k) {
        std::int32_t v = c[k] + step[k];
        if (v < -extent || v > extent) inside = false;
        j = j * side + static_cast<std::size_t>(v + extent);
      }
      if (inside) s->adjacency_[i].push_back(static_cast<PointId>(j));
    }
    std::sort(s->adjacency_[i].begin(), s->adjacency_[i].end());
  }
  return s;
}

SpacePtr gen_free_group_ball(int rank, int radius, std::size_t max_points) {
  if (rank < 1 || rank > 26 || radius < 0) throw Error(ErrorCode::InvalidArgument, "free group needs 1 <= rank <= 26, radius >= 0");
  // size = 1 + 2r * sum_{j<radius} (2r-1)^j
  std::size_t count = 1, layer = static_cast<std::size_t>(2 * rank);
  for (int j = 0; j < radius; ++j) {
    count += layer;
    check_size(count, max_points);
    layer *= static_cast<std::size_t>(2 * rank - 1);
  }
  std::vector<std::int64_t> parent{-1};
  std::vector<std::string> labels{"e"};
  std::vector<int> last_letter{-1};  // letter index 2g (generator) or 2g+1 (inverse)
  std::size_t begin = 0;
  for (int len = 1; len <= radius; ++len) {
    std::size_t end = parent.size();
    for (std::size_t w = begin; w < end; ++w) {
      for (int letter = 0; letter < 2 * rank; ++letter) {
        if (last_letter[w] >= 0 && (letter ^ 1) == last_letter[w]) continue;  // would cancel
        char ch = static_cast<char>((letter % 2 == 0 ? 'a' : 'A') + letter / 2);
        parent.push_back(static_cast<std::int64_t>(w));
        labels.push_back(w == 0 ? std::string(1, ch) : labels[w] + ch);
        last_letter.push_back(letter);
      }
    }
    begin = end;
  }
  auto s = SpaceBuilder::make();
  s->labels_ = std::move(labels);
  SpaceBuilder::index_labels(*s);
  SpaceBuilder::fill_tree(*s, std::move(parent));
  s->base_point_ = 0;
  s->margins_.reserve(s->size());
  for (auto d : s->depth_) s->margins_.emplace_back(radius - d);
  s->descriptor_ = FreeGroupDescriptor{rank, radius};
  return s;
}

SpacePtr tree_space(std::vector<std::int64_t> parent, std::vector<std::string> labels, PointId base_point,
                    std::size_t max_points) {
  check_size(parent.size(), max_points);
  if (parent.empty()) throw Error(ErrorCode::EmptySet, "tree needs at least one point");
  if (labels.empty()) {
    for (std::size_t i = 0; i < parent.size(); ++i) labels.push_back("t" + std::to_string(i));
  }
  if (labels.size() != parent.size()) throw Error(ErrorCode::InvalidArgument, "label count mismatch");
  if (base_point >= parent.size()) throw Error(ErrorCode::InvalidArgument, "base point out of range");
  auto s = SpaceBuilder::make();
  s->labels_ = std::move(labels);
  SpaceBuilder::index_labels(*s);
  s->descriptor_ = TreeDescriptor{parent};
  SpaceBuilder::fill_tree(*s, std::move(parent));
  s->base_point_ = base_point;
  s->margins_.assign(s->size(), Rational(0));
  return s;
}

SpacePtr product_space(const SpacePtr& first, const SpacePtr& second, std::size_t max_points) {
  const std::size_t n = first->size(), m = second->size();
  if (n > max_points / m) throw Error(ErrorCode::SizeLimit, "product space too large");
  auto s = SpaceBuilder::make();
  s->descriptor_ = ProductDescriptor{first, second};
  s->labels_.reserve(n * m);
  s->margins_.reserve(n * m);
  for (PointId i = 0; i < n; ++i) {
    for (PointId j = 0; j < m; ++j) {
      s->labels_.push_back("<" + first->label(i) + "|" + second->label(j) + ">");
      s->margins_.push_back(std::min(first->window_margin(i), second->window_margin(j)));
    }
  }
  SpaceBuilder::index_labels(*s);
  s->base_point_ = static_cast<PointId>(first->base_point() * m + second->base_point());
  s->diameter_ = first->diameter() + second->diameter();
  if (first->is_graph_metric() && second->is_graph_metric()) {
    s->adjacency_.assign(n * m, {});
    for (PointId i = 0; i < n; ++i) {
      for (PointId j = 0; j < m; ++j) {
        auto& adj = s->adjacency_[i * m + j];
        if (n > 1)
          for (PointId k : first->neighbors(i)) adj.push_back(static_cast<PointId>(k * m + j));
        if (m > 1)
          for (PointId k : second->neighbors(j)) adj.push_back(static_cast<PointId>(i * m + k));
        std::sort(adj.begin(), adj.end());
      }
    }
  }
  return s;
}

SpacePtr rebuild(const SpaceDescriptor& descriptor, std::size_t max_points) {
  return std::visit(
      [&](const auto& d) -> SpacePtr {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, GridDescriptor>) return gen_grid(d.dim, d.extent, d.norm, max_points);
        else if constexpr (std::is_same_v<T, FreeGroupDescriptor>) return gen_free_group_ball(d.rank, d.radius, max_points);
        else if constexpr (std::is_same_v<T, TreeDescriptor>) return tree_space(d.parent, {}, 0, max_points);
        else if constexpr (std::is_same_v<T, ProductDescriptor>) return product_space(d.first, d.second, max_points);
        else throw Error(ErrorCode::InvalidArgument, "explicit metrics cannot be rebuilt from a descriptor");
      },
      descriptor);
}

}  // namespace coarse
