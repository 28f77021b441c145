#include "coarse/distortion.hpp"

#include "coarse/error.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <mutex>
#include <thread>

namespace coarse {

std::uint64_t ScopeStats::shortness_violations() const {
  std::uint64_t total = 0;
  for (const auto& s : shortness) total += s.violations;
  return total;
}

std::uint64_t ScopeStats::deep_failures() const {
  std::uint64_t total = 0;
  for (const auto& d : deep) total += d.failures;
  return total;
}

std::optional<Rational> DistortionReport::rho1_at(const Rational& t, bool interior_only) const {
  const auto& list = interior_only ? interior_buckets : buckets;
  auto it = std::lower_bound(list.begin(), list.end(), t, [](const Bucket& b, const Rational& v) { return b.distance < v; });
  if (it == list.end()) return std::nullopt;
  return it->rho1_regularized;
}

namespace {

Rational as_rational(std::int64_t v) { return Rational(v); }
const Rational& as_rational(const Rational& v) { return v; }

template <class T>
T absolute(const T& v) {
  return v < T(0) ? -v : v;
}

/// Integer or rational view of the per-color tree positions with
/// precomputed climbs between every ordered pair of nodes.
template <class T>
struct ColorTable {
  std::size_t nodes = 0;
  std::vector<std::uint32_t> node;  // per point
  std::vector<T> offset;            // per point
  std::vector<char> is_ancestor;    // [a * nodes + b]: a is the common ancestor
  std::vector<T> climb;             // root_distance(a) - root_distance(child of lca on a's side)
  std::vector<T> position;          // attachment of that child on the lca interval

  T distance(PointId x, PointId y) const {
    const std::uint32_t a = node[x], b = node[y];
    if (a == b) return absolute(T(offset[x] - offset[y]));
    const std::size_t ab = a * nodes + b, ba = b * nodes + a;
    T cost{0};
    T pa = offset[x], pb = offset[y];
    if (!is_ancestor[ab]) {
      cost += offset[x] + climb[ab];
      pa = position[ab];
    }
    if (!is_ancestor[ba]) {
      cost += offset[y] + climb[ba];
      pb = position[ba];
    }
    return cost + absolute(T(pa - pb));
  }
};

template <class T>
T convert(const Rational& r) {
  if constexpr (std::is_same_v<T, Rational>) {
    return r;
  } else {
    return r.numerator();
  }
}

template <class T>
ColorTable<T> make_table(const ScaleTree& tree, const Embedding& e, std::size_t color) {
  ColorTable<T> t;
  const auto& nodes = tree.nodes();
  t.nodes = nodes.size();
  t.is_ancestor.assign(t.nodes * t.nodes, 0);
  t.climb.assign(t.nodes * t.nodes, T(0));
  t.position.assign(t.nodes * t.nodes, T(0));
  for (NodeId a = 0; a < t.nodes; ++a) {
    for (NodeId b = 0; b < t.nodes; ++b) {
      const NodeId c = tree.common_ancestor(a, b);
      const std::size_t ab = a * t.nodes + b;
      if (a == c) {
        t.is_ancestor[ab] = 1;
        continue;
      }
      NodeId v = a;
      while (*nodes[v].parent != c) v = *nodes[v].parent;
      t.climb[ab] = convert<T>(nodes[a].root_distance - nodes[v].root_distance);
      t.position[ab] = T(nodes[v].attach);
    }
  }
  for (const auto& p : e.points) {
    t.node.push_back(static_cast<std::uint32_t>(p.coordinates[color].node));
    t.offset.push_back(convert<T>(p.coordinates[color].offset));
  }
  return t;
}

template <class T>
struct Witness {
  bool set = false;
  T key{0};  // larger is worse, except for DeepAcc where smaller is weaker
  PointId first = 0, second = 0;
  T distance{0}, value{0};

  void offer(const T& k, PointId x, PointId y, const T& d, const T& v, bool larger_wins) {
    bool better = !set || (larger_wins ? k > key : k < key) ||
                  (k == key && std::pair(x, y) < std::pair(first, second));
    if (better) *this = {true, k, x, y, d, v};
  }
  void merge(const Witness& o, bool larger_wins) {
    if (o.set) offer(o.key, o.first, o.second, o.distance, o.value, larger_wins);
  }
  std::optional<PairWitness> get() const {
    if (!set) return std::nullopt;
    return PairWitness{first, second, as_rational(distance), as_rational(value)};
  }
};

template <class T>
struct BucketAcc {
  T rho1{0}, rho2{0};
  std::uint64_t pairs = 0;
};

template <class T>
struct ScopeAcc {
  std::uint64_t pairs = 0;
  std::vector<std::uint64_t> short_violations;
  std::vector<Witness<T>> short_worst;
  std::uint64_t lipschitz_violations = 0;
  Witness<T> lipschitz_worst;
  std::vector<std::uint64_t> deep_checked, deep_failures;
  std::vector<Witness<T>> deep_weakest;
  std::map<T, BucketAcc<T>> buckets;

  ScopeAcc(std::size_t colors, std::size_t levels)
      : short_violations(colors), short_worst(colors), deep_checked(levels), deep_failures(levels),
        deep_weakest(levels) {}

  void merge(const ScopeAcc& o) {
    pairs += o.pairs;
    for (std::size_t c = 0; c < short_violations.size(); ++c) {
      short_violations[c] += o.short_violations[c];
      short_worst[c].merge(o.short_worst[c], true);
    }
    lipschitz_violations += o.lipschitz_violations;
    lipschitz_worst.merge(o.lipschitz_worst, true);
    for (std::size_t k = 0; k < deep_checked.size(); ++k) {
      deep_checked[k] += o.deep_checked[k];
      deep_failures[k] += o.deep_failures[k];
      deep_weakest[k].merge(o.deep_weakest[k], false);
    }
    for (const auto& [d, b] : o.buckets) {
      auto [it, fresh] = buckets.try_emplace(d, b);
      if (fresh) continue;
      it->second.rho1 = std::min(it->second.rho1, b.rho1);
      it->second.rho2 = std::max(it->second.rho2, b.rho2);
      it->second.pairs += b.pairs;
    }
  }
};

template <class T>
struct PairContext {
  const CoverTower& tower;
  const FiniteMetricSpace& space;
  std::vector<ColorTable<T>> tables;
  std::vector<char> interior;
  std::vector<std::vector<char>> deep;  // per level, per point
  std::vector<T> mesh;                  // per level
  std::vector<T> bound;                 // 2^k
};

template <class T>
void row_distances(const FiniteMetricSpace& space, PointId x, std::vector<T>& row) {
  const std::size_t n = space.size();
  row.assign(n, T(-1));
  if constexpr (std::is_same_v<T, std::int64_t>) {
    // unit-edge graph: breadth-first row
    std::vector<PointId> queue{x};
    row[x] = 0;
    for (std::size_t h = 0; h < queue.size(); ++h) {
      const PointId u = queue[h];
      for (PointId v : space.neighbors(u)) {
        if (row[v] >= 0) continue;
        row[v] = row[u] + 1;
        queue.push_back(v);
      }
    }
  } else {
    for (PointId y = 0; y < n; ++y) row[y] = space.distance(x, y);
  }
}

template <class T>
void scan_rows(const PairContext<T>& ctx, std::size_t start, std::size_t stride, ScopeAcc<T>& all,
               ScopeAcc<T>& inner) {
  const std::size_t n = ctx.space.size();
  const std::size_t colors = ctx.tables.size();
  const std::size_t levels = ctx.deep.size();
  const T color_count(static_cast<std::int64_t>(colors));
  std::vector<T> row;
  std::vector<T> per_color(colors);
  for (std::size_t i = start; i < n; i += stride) {
    const PointId x = static_cast<PointId>(i);
    row_distances(ctx.space, x, row);
    for (PointId y = x + 1; y < n; ++y) {
      const T d = row[y];
      T product{0};
      for (std::size_t c = 0; c < colors; ++c) {
        per_color[c] = ctx.tables[c].distance(x, y);
        product += per_color[c];
      }
      const bool in = ctx.interior[x] && ctx.interior[y];
      for (ScopeAcc<T>* acc : {&all, &inner}) {
        if (acc == &inner && !in) break;
        ++acc->pairs;
        for (std::size_t c = 0; c < colors; ++c) {
          const T margin = per_color[c] - d;
          if (margin > T(0)) {
            ++acc->short_violations[c];
            acc->short_worst[c].offer(margin, x, y, d, per_color[c], true);
          }
        }
        const T excess = product - color_count * d;
        if (excess > T(0)) {
          ++acc->lipschitz_violations;
          acc->lipschitz_worst.offer(excess, x, y, d, product, true);
        }
        for (std::size_t k = 0; k < levels; ++k) {
          if (!(d > ctx.mesh[k]) || !(ctx.deep[k][x] || ctx.deep[k][y])) continue;
          ++acc->deep_checked[k];
          if (product < ctx.bound[k]) ++acc->deep_failures[k];
          acc->deep_weakest[k].offer(product, x, y, d, product, false);
        }
        auto [it, fresh] = acc->buckets.try_emplace(d, BucketAcc<T>{product, product, 0});
        if (!fresh) {
          if (product < it->second.rho1) it->second.rho1 = product;
          if (product > it->second.rho2) it->second.rho2 = product;
        }
        ++it->second.pairs;
      }
    }
  }
}

template <class T>
std::vector<Bucket> finish_buckets(const std::map<T, BucketAcc<T>>& acc) {
  std::vector<Bucket> out;
  for (const auto& [d, b] : acc) out.push_back({as_rational(d), as_rational(b.rho1), as_rational(b.rho2), Rational(0), b.pairs});
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i].rho1_regularized = out[i].rho1;
    if (i + 1 < out.size()) out[i].rho1_regularized = std::min(out[i].rho1, out[i + 1].rho1_regularized);
  }
  return out;
}

template <class T>
ScopeStats finish_scope(const ScopeAcc<T>& acc, const CoverTower& tower) {
  ScopeStats s;
  s.pairs = acc.pairs;
  for (std::size_t c = 0; c < acc.short_violations.size(); ++c) {
    ShortnessVerdict v;
    v.color = c;
    v.violations = acc.short_violations[c];
    v.worst = acc.short_worst[c].get();
    if (v.worst) v.worst_margin = v.worst->value - v.worst->distance;
    s.shortness.push_back(std::move(v));
  }
  s.lipschitz_violations = acc.lipschitz_violations;
  s.lipschitz_worst = acc.lipschitz_worst.get();
  for (std::size_t k = 0; k < acc.deep_checked.size(); ++k) {
    DeepLevel dl;
    dl.level = static_cast<int>(k);
    dl.bound = pow2(static_cast<int>(k));
    dl.checked = acc.deep_checked[k];
    dl.failures = acc.deep_failures[k];
    dl.weakest = acc.deep_weakest[k].get();
    s.deep.push_back(std::move(dl));
  }
  (void)tower;
  return s;
}

template <class T>
void run_pairs(const CoverTower& tower, const std::vector<ScaleTree>& trees, const Embedding& e, unsigned workers,
               const std::vector<std::vector<char>>& deep, DistortionReport& report) {
  PairContext<T> ctx{tower, *tower.space, {}, {}, deep, {}, {}};
  for (std::size_t c = 0; c < trees.size(); ++c) ctx.tables.push_back(make_table<T>(trees[c], e, c));
  for (PointId p = 0; p < tower.space->size(); ++p) ctx.interior.push_back(tower.is_interior(p) ? 1 : 0);
  for (std::size_t k = 0; k < tower.levels.size(); ++k) {
    ctx.mesh.push_back(convert<T>(tower.levels[k].m));
    ctx.bound.push_back(convert<T>(pow2(static_cast<int>(k))));
  }
  const std::size_t colors = trees.size(), levels = tower.levels.size();
  const unsigned threads = std::max(1u, workers);
  std::vector<ScopeAcc<T>> all(threads, ScopeAcc<T>(colors, levels)), inner(threads, ScopeAcc<T>(colors, levels));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < threads; ++w) pool.emplace_back([&, w] { scan_rows(ctx, w, threads, all[w], inner[w]); });
  scan_rows(ctx, 0, threads, all[0], inner[0]);
  for (auto& t : pool) t.join();
  for (unsigned w = 1; w < threads; ++w) {
    all[0].merge(all[w]);
    inner[0].merge(inner[w]);
  }
  report.buckets = finish_buckets(all[0].buckets);
  report.interior_buckets = finish_buckets(inner[0].buckets);
  report.all = finish_scope(all[0], tower);
  report.interior = finish_scope(inner[0], tower);
}

}  // namespace

DistortionReport distortion_report(const CoverTower& tower, const std::vector<ScaleTree>& trees,
                                   const Embedding& embedding, unsigned workers) {
  const auto& space = *tower.space;
  const std::size_t n = space.size();
  if (embedding.points.size() != n || trees.size() != tower.colors)
    throw Error(ErrorCode::InvalidArgument, "embedding does not match the tower");

  DistortionReport report;
  report.colors = trees.size();
  report.interior_threshold = tower.interior_threshold();
  for (PointId p = 0; p < n; ++p)
    if (!tower.is_interior(p)) report.frontier_points.push_back(p);
  for (const auto& a : embedding.anchors) {
    report.anchor_conflicts += a.conflicts.size();
    report.anchor_shortness += a.shortness.size();
  }
  for (const auto& u : embedding.uncovered) report.uncovered.push_back(u.size());

  // points deeper than d_k in some level-k set, any color
  std::vector<std::vector<char>> deep(tower.levels.size(), std::vector<char>(n, 0));
  for (std::size_t k = 0; k < tower.levels.size(); ++k) {
    const Extended dk(tower.levels[k].d);
    for (const auto& u : tower.levels[k].cover.elements()) {
      auto depth = depth_field(u);
      for (PointId p : u)
        if (depth[p] > dk) deep[k][p] = 1;
    }
  }

  // deep-point exactness, per color and selected node
  for (std::size_t c = 0; c < trees.size(); ++c) {
    const auto& nodes = trees[c].nodes();
    std::vector<std::vector<PointId>> owned(nodes.size());
    for (PointId p = 0; p < n; ++p) owned[embedding.points[p].coordinates[c].node].push_back(p);
    for (NodeId i = 0; i < nodes.size(); ++i) {
      if (owned[i].empty() || nodes[i].is_virtual) continue;
      const int k = nodes[i].ref.level;
      const Extended dk(tower.levels[k].d);
      const Rational top = pow2(k);
      auto depth = depth_field(nodes[i].set);
      for (PointId p : owned[i]) {
        if (!(depth[p] > dk)) continue;
        const bool in = tower.is_interior(p);
        ++report.deep_points.checked;
        if (in) ++report.deep_points.interior_checked;
        const Rational& offset = embedding.points[p].coordinates[c].offset;
        if (offset != top) report.deep_points.failures.push_back({c, p, k, offset, in});
      }
    }
  }

  bool integral = space.is_graph_metric();
  for (const auto& p : embedding.points)
    for (const auto& t : p.coordinates)
      if (t.offset.denominator() != 1) integral = false;
  if (integral)
    run_pairs<std::int64_t>(tower, trees, embedding, workers, deep, report);
  else
    run_pairs<Rational>(tower, trees, embedding, workers, deep, report);
  return report;
}

}  // namespace coarse
