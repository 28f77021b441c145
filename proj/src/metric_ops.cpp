#include "coarse/metric_ops.hpp"

#include "coarse/error.hpp"

#include <algorithm>
#include <deque>
#include <limits>

namespace coarse {

namespace {

constexpr std::int64_t kUnreached = std::numeric_limits<std::int64_t>::max();

/// Multi-source BFS on the unit graph. Only points with allowed[p] are
/// entered (sources are always seeded). Stops expanding past max_radius.
std::vector<std::int64_t> bfs(const FiniteMetricSpace& space, std::span<const PointId> sources,
                              const boost::dynamic_bitset<>* allowed, std::int64_t max_radius) {
  std::vector<std::int64_t> dist(space.size(), kUnreached);
  std::deque<PointId> queue;
  for (PointId s : sources) {
    if (dist[s] != 0) {
      dist[s] = 0;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    PointId v = queue.front();
    queue.pop_front();
    if (dist[v] >= max_radius) continue;
    for (PointId w : space.neighbors(v)) {
      if (dist[w] != kUnreached) continue;
      if (allowed && !allowed->test(w)) continue;
      dist[w] = dist[v] + 1;
      queue.push_back(w);
    }
  }
  return dist;
}

}  // namespace

Extended dist_point_set(PointId x, const Subset& a, bool allow_empty) {
  if (a.empty()) {
    if (allow_empty) return Extended::infinity();
    throw Error(ErrorCode::EmptySet, "distance to an empty set");
  }
  if (a.contains(x)) return Rational(0);
  const auto& space = a.metric();
  Rational best = space.distance(x, a.members().front());
  for (PointId p : a) best = std::min(best, space.distance(x, p));
  return best;
}

std::vector<Extended> distance_field(const Subset& a) {
  const auto& space = a.metric();
  if (a.empty()) return std::vector<Extended>(space.size(), Extended::infinity());
  std::vector<Extended> out(space.size());
  if (space.is_graph_metric()) {
    auto dist = bfs(space, a.members(), nullptr, kUnreached);
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = dist[i] == kUnreached ? Extended::infinity() : Extended(dist[i]);
    return out;
  }
  for (PointId x = 0; x < space.size(); ++x) out[x] = dist_point_set(x, a);
  return out;
}

std::vector<Extended> depth_field(const Subset& u) {
  const auto& space = u.metric();
  std::vector<Extended> out(space.size(), Extended(0));
  if (u.empty()) return out;
  if (u.is_everything()) {
    for (PointId x : u) out[x] = Extended::infinity();
    return out;
  }
  if (space.is_graph_metric()) {
    std::vector<PointId> outer;
    for (PointId x : u)
      for (PointId w : space.neighbors(x))
        if (!u.contains(w)) outer.push_back(w);
    std::sort(outer.begin(), outer.end());
    outer.erase(std::unique(outer.begin(), outer.end()), outer.end());
    auto dist = bfs(space, outer, &u.bits(), kUnreached);
    for (PointId x : u) out[x] = dist[x] == kUnreached ? Extended::infinity() : Extended(dist[x]);
    return out;
  }
  Subset rest = u.complement();
  for (PointId x : u) out[x] = dist_point_set(x, rest);
  return out;
}

Rational set_set_distance(const Subset& a, const Subset& b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::EmptySet, "set distance with an empty set");
  if (a.intersects(b)) return Rational(0);
  const auto& space = a.metric();
  if (space.is_graph_metric()) {
    const Subset& small = a.size() <= b.size() ? a : b;
    const Subset& large = a.size() <= b.size() ? b : a;
    std::vector<std::int64_t> dist(space.size(), kUnreached);
    std::deque<PointId> queue;
    for (PointId s : small) {
      dist[s] = 0;
      queue.push_back(s);
    }
    while (!queue.empty()) {
      PointId v = queue.front();
      queue.pop_front();
      if (large.contains(v)) return Rational(dist[v]);
      for (PointId w : space.neighbors(v)) {
        if (dist[w] == kUnreached) {
          dist[w] = dist[v] + 1;
          queue.push_back(w);
        }
      }
    }
    throw Error(ErrorCode::InvalidArgument, "unit graph is disconnected");
  }
  auto pair = closest_pair(a, b);
  return space.distance(pair.first, pair.second);
}

PointPair closest_pair(const Subset& a, const Subset& b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::EmptySet, "closest pair with an empty set");
  const auto& space = a.metric();
  PointPair best{a.members().front(), b.members().front()};
  Rational best_d = space.distance(best.first, best.second);
  for (PointId x : a) {
    for (PointId y : b) {
      Rational d = space.distance(x, y);
      if (d < best_d) {
        best_d = d;
        best = {x, y};
      }
    }
  }
  return best;
}

Subset neighborhood(const Subset& a, const Rational& r) {
  const auto& space = a.metric();
  boost::dynamic_bitset<> bits(space.size());
  if (r >= Rational(0)) {
    if (a.empty()) return Subset(a.space(), std::move(bits));
    if (space.is_graph_metric()) {
      auto dist = bfs(space, a.members(), nullptr, floor(r));
      for (std::size_t i = 0; i < dist.size(); ++i)
        if (dist[i] != kUnreached) bits.set(i);
    } else {
      for (PointId x = 0; x < space.size(); ++x)
        if (dist_point_set(x, a) <= Extended(r)) bits.set(x);
    }
    return Subset(a.space(), std::move(bits));
  }
  auto depth = depth_field(a);
  for (PointId x : a)
    if (depth[x] > Extended(-r)) bits.set(x);
  return Subset(a.space(), std::move(bits));
}

Subset discrete_boundary(const Subset& a) {
  const auto& space = a.metric();
  boost::dynamic_bitset<> bits(space.size());
  if (a.empty() || a.is_everything()) return Subset(a.space(), std::move(bits));
  auto depth = depth_field(a);
  for (PointId x : a)
    if (depth[x] <= Extended(1)) bits.set(x);
  auto outside = distance_field(a);
  for (PointId x = 0; x < space.size(); ++x)
    if (!a.contains(x) && outside[x] <= Extended(1)) bits.set(x);
  return Subset(a.space(), std::move(bits));
}

PointPair diameter_pair(const Subset& a) {
  if (a.empty()) throw Error(ErrorCode::EmptySet, "diameter of an empty set");
  const auto& space = a.metric();
  PointPair best{a.members().front(), a.members().front()};
  Rational best_d{0};
  auto m = a.members();
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = i + 1; j < m.size(); ++j) {
      Rational d = space.distance(m[i], m[j]);
      if (d > best_d) {
        best_d = d;
        best = {m[i], m[j]};
      }
    }
  }
  return best;
}

Rational diameter(const Subset& a) {
  if (a.empty()) throw Error(ErrorCode::EmptySet, "diameter of an empty set");
  if (a.is_everything()) return a.metric().diameter();
  const auto& space = a.metric();
  if (space.is_graph_metric() && a.size() > 64) {
    // eccentricities via BFS in the ambient graph; still exact
    Rational best{0};
    for (PointId x : a) {
      auto dist = bfs(space, std::span<const PointId>(&x, 1), nullptr, kUnreached);
      for (PointId y : a) best = std::max(best, Rational(dist[y]));
    }
    return best;
  }
  auto pair = diameter_pair(a);
  return space.distance(pair.first, pair.second);
}

Extended lebesgue_number(const std::vector<Subset>& cover) {
  if (cover.empty()) throw Error(ErrorCode::NotACover, "empty cover");
  const auto& space = cover.front().metric();
  std::vector<Extended> best(space.size(), Extended(0));
  std::vector<bool> covered(space.size(), false);
  for (const auto& u : cover) {
    if (u.empty()) continue;
    auto depth = depth_field(u);
    for (PointId x : u) {
      covered[x] = true;
      best[x] = std::max(best[x], depth[x]);
    }
  }
  Extended result = Extended::infinity();
  for (PointId x = 0; x < space.size(); ++x) {
    if (!covered[x]) throw Error(ErrorCode::NotACover, "point '" + space.label(x) + "' is not covered");
    result = std::min(result, best[x]);
  }
  return result;
}

Rational mesh(const std::vector<Subset>& cover) {
  Rational m{0};
  for (const auto& u : cover) m = std::max(m, diameter(u));
  return m;
}

std::size_t capacity(const FiniteMetricSpace& space, const Rational& r, const Rational& eps) {
  if (eps <= Rational(0) || r <= Rational(0)) throw Error(ErrorCode::InvalidArgument, "capacity needs r > 0, eps > 0");
  std::size_t best = 0;
  std::vector<PointId> chosen;
  for (PointId x = 0; x < space.size(); ++x) {
    chosen.clear();
    for (PointId y = 0; y < space.size(); ++y) {
      if (space.distance(x, y) > r) continue;
      bool separated = true;
      for (PointId c : chosen) {
        if (space.distance(c, y) < eps) {
          separated = false;
          break;
        }
      }
      if (separated) chosen.push_back(y);
    }
    best = std::max(best, chosen.size());
  }
  return best;
}

std::optional<std::array<PointId, 3>> find_metric_violation(const FiniteMetricSpace& space) {
  const auto n = static_cast<PointId>(space.size());
  for (PointId x = 0; x < n; ++x) {
    if (space.distance(x, x) != Rational(0)) return std::array{x, x, x};
    for (PointId y = 0; y < n; ++y) {
      if (x != y && (space.distance(x, y) != space.distance(y, x) || space.distance(x, y) < Rational(1)))
        return std::array{x, y, y};
    }
  }
  for (PointId x = 0; x < n; ++x)
    for (PointId y = 0; y < n; ++y)
      for (PointId z = 0; z < n; ++z)
        if (space.distance(x, z) > space.distance(x, y) + space.distance(y, z)) return std::array{x, y, z};
  return std::nullopt;
}

}  // namespace coarse
