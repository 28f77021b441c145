#include "coarse/cover.hpp"

#include "coarse/error.hpp"

#include <algorithm>
#include <deque>
#include <numeric>

namespace coarse {

std::size_t ColoredCover::element_count() const {
  std::size_t n = 0;
  for (const auto& f : families) n += f.size();
  return n;
}

std::vector<Subset> ColoredCover::elements() const {
  std::vector<Subset> out;
  for (const auto& f : families) out.insert(out.end(), f.begin(), f.end());
  return out;
}

bool VerificationReport::ok() const {
  return covers && mesh_ok && std::all_of(d_disjoint.begin(), d_disjoint.end(), [](bool b) { return b; });
}

namespace {

/// For every set i, the sorted list of j != i with d(S_i, S_j) <= d.
std::vector<std::vector<std::size_t>> conflicts(const std::vector<Subset>& sets, const Rational& d) {
  std::vector<std::vector<std::size_t>> out(sets.size());
  if (sets.empty()) return out;
  const auto& space = sets.front().metric();
  if (space.is_graph_metric()) {
    std::vector<std::vector<std::size_t>> owners(space.size());
    for (std::size_t i = 0; i < sets.size(); ++i)
      for (PointId p : sets[i]) owners[p].push_back(i);
    for (std::size_t i = 0; i < sets.size(); ++i) {
      if (sets[i].empty()) continue;
      Subset reach = neighborhood(sets[i], d);
      for (PointId p : reach)
        for (std::size_t j : owners[p])
          if (j != i) out[i].push_back(j);
      std::sort(out[i].begin(), out[i].end());
      out[i].erase(std::unique(out[i].begin(), out[i].end()), out[i].end());
    }
    return out;
  }
  for (std::size_t i = 0; i < sets.size(); ++i) {
    for (std::size_t j = i + 1; j < sets.size(); ++j) {
      if (sets[i].empty() || sets[j].empty()) continue;
      if (set_set_distance(sets[i], sets[j]) <= d) {
        out[i].push_back(j);
        out[j].push_back(i);
      }
    }
  }
  for (auto& v : out) std::sort(v.begin(), v.end());
  return out;
}

}  // namespace

VerificationReport verify_colored_cover(const ColoredCover& cover) {
  VerificationReport report;
  const auto& space = *cover.space;

  std::vector<bool> covered(space.size(), false);
  for (const auto& f : cover.families)
    for (const auto& u : f)
      for (PointId p : u) covered[p] = true;
  report.covers = true;
  for (PointId p = 0; p < space.size(); ++p) {
    if (!covered[p]) {
      report.covers = false;
      report.witness = CoverWitness{"covers", 0, 0, 0, p, p, Rational(0)};
      break;
    }
  }

  report.d_disjoint.assign(cover.families.size(), true);
  for (std::size_t fi = 0; fi < cover.families.size(); ++fi) {
    const auto& family = cover.families[fi];
    auto edges = conflicts(family, cover.d);
    for (std::size_t i = 0; i < family.size(); ++i) {
      auto later = std::find_if(edges[i].begin(), edges[i].end(), [i](std::size_t j) { return j > i; });
      if (later == edges[i].end()) continue;
      report.d_disjoint[fi] = false;
      if (!report.witness) {
        auto pair = closest_pair(family[i], family[*later]);
        report.witness = CoverWitness{"d_disjoint", fi, i, *later, pair.first, pair.second,
                                      space.distance(pair.first, pair.second)};
      }
      break;
    }
  }

  report.mesh_ok = true;
  report.mesh = Rational(0);
  for (std::size_t fi = 0; fi < cover.families.size(); ++fi) {
    for (std::size_t i = 0; i < cover.families[fi].size(); ++i) {
      const auto& u = cover.families[fi][i];
      if (u.empty()) {
        report.mesh_ok = false;
        if (!report.witness) report.witness = CoverWitness{"mesh", fi, i, i, 0, 0, Rational(0)};
        continue;
      }
      Rational diam = diameter(u);
      report.mesh = std::max(report.mesh, diam);
      if (diam > cover.mesh_bound) {
        report.mesh_ok = false;
        if (!report.witness) {
          auto pair = diameter_pair(u);
          report.witness = CoverWitness{"mesh", fi, i, i, pair.first, pair.second, diam};
        }
      }
    }
  }

  if (report.covers) {
    std::vector<Subset> all;
    for (const auto& u : cover.elements())
      if (!u.empty()) all.push_back(u);
    report.lebesgue = lebesgue_number(all);
  }
  return report;
}

std::vector<Subset> greedy_clusters(const SpacePtr& space_ptr, const Rational& block) {
  const auto& space = *space_ptr;
  const std::size_t n = space.size();
  std::vector<bool> assigned(n, false);
  std::vector<Subset> clusters;
  std::vector<PointId> order(n);

  for (PointId seed = 0; seed < n; ++seed) {
    if (assigned[seed]) continue;
    std::vector<PointId> members{seed};
    assigned[seed] = true;
    auto fits = [&](PointId p) {
      for (PointId c : members)
        if (space.distance(p, c) > block) return false;
      return true;
    };
    if (space.is_graph_metric()) {
      std::vector<bool> seen(n, false);
      std::deque<PointId> queue{seed};
      seen[seed] = true;
      while (!queue.empty()) {
        PointId v = queue.front();
        queue.pop_front();
        for (PointId w : space.neighbors(v)) {
          if (seen[w] || assigned[w]) continue;
          seen[w] = true;
          if (!fits(w)) continue;
          members.push_back(w);
          assigned[w] = true;
          queue.push_back(w);
        }
      }
    } else {
      std::vector<PointId> candidates;
      for (PointId p = 0; p < n; ++p)
        if (!assigned[p]) candidates.push_back(p);
      std::stable_sort(candidates.begin(), candidates.end(),
                       [&](PointId a, PointId b) { return space.distance(seed, a) < space.distance(seed, b); });
      for (PointId p : candidates) {
        if (fits(p)) {
          members.push_back(p);
          assigned[p] = true;
        }
      }
    }
    clusters.emplace_back(space_ptr, std::move(members));
  }
  return clusters;
}

std::vector<std::size_t> color_sets(const std::vector<Subset>& sets, const Rational& d) {
  auto edges = conflicts(sets, d);
  std::vector<std::size_t> order(sets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto first_member = [&](std::size_t i) {
    return sets[i].empty() ? PointId(-1) : sets[i].members().front();
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (edges[a].size() != edges[b].size()) return edges[a].size() > edges[b].size();
    return first_member(a) < first_member(b);
  });
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> color(sets.size(), kNone);
  std::vector<bool> used;
  for (std::size_t i : order) {
    used.assign(edges[i].size() + 1, false);
    for (std::size_t j : edges[i])
      if (color[j] != kNone && color[j] < used.size()) used[color[j]] = true;
    std::size_t c = 0;
    while (used[c]) ++c;
    color[i] = c;
  }
  return color;
}

namespace {

ColoredCover assemble(const SpacePtr& space, std::vector<Subset> sets, const Rational& d) {
  auto color = color_sets(sets, d);
  ColoredCover cover;
  cover.space = space;
  cover.d = d;
  std::size_t colors = color.empty() ? 0 : *std::max_element(color.begin(), color.end()) + 1;
  cover.families.assign(colors, {});
  for (std::size_t i = 0; i < sets.size(); ++i) cover.families[color[i]].push_back(std::move(sets[i]));
  std::vector<Subset> all = cover.elements();
  cover.mesh_bound = all.empty() ? Rational(0) : mesh(all);
  return cover;
}

}  // namespace

ColoredCover greedy_colored_cover(const SpacePtr& space, const Rational& d, const Rational& block) {
  if (d <= Rational(0) || block < d) throw Error(ErrorCode::InvalidArgument, "greedy cover needs d > 0 and block >= d");
  return assemble(space, greedy_clusters(space, block), d);
}

ColoredCover inflated_colored_cover(const SpacePtr& space, const Rational& d, const Rational& block,
                                    const Rational& margin) {
  if (d <= Rational(0) || block < Rational(0) || margin < Rational(0))
    throw Error(ErrorCode::InvalidArgument, "inflated cover needs d > 0, block >= 0, margin >= 0");
  auto clusters = greedy_clusters(space, block);
  for (auto& c : clusters) c = neighborhood(c, margin);
  return assemble(space, std::move(clusters), d);
}

ColoredCover product_cover(const ColoredCover& a, const ColoredCover& b, const SpacePtr& product) {
  if (a.d != b.d) throw Error(ErrorCode::ScaleMismatch, "product of covers at scales " + to_string(a.d) + " and " + to_string(b.d));
  const auto* desc = std::get_if<ProductDescriptor>(&product->descriptor());
  if (!desc || desc->first.get() != a.space.get() || desc->second.get() != b.space.get())
    throw Error(ErrorCode::InvalidArgument, "product space does not match the factor covers");
  const auto m = static_cast<PointId>(b.space->size());
  ColoredCover out;
  out.space = product;
  out.d = a.d;
  out.mesh_bound = a.mesh_bound + b.mesh_bound;
  out.families.assign(a.colors() * b.colors(), {});
  for (std::size_t i = 0; i < a.colors(); ++i) {
    for (std::size_t j = 0; j < b.colors(); ++j) {
      auto& family = out.families[i * b.colors() + j];
      for (const auto& u : a.families[i]) {
        for (const auto& v : b.families[j]) {
          std::vector<PointId> members;
          members.reserve(u.size() * v.size());
          for (PointId x : u)
            for (PointId y : v) members.push_back(x * m + y);
          family.emplace_back(product, std::move(members));
        }
      }
    }
  }
  return out;
}

}  // namespace coarse
