#include "coarse/tower.hpp"

#include "coarse/error.hpp"

#include <algorithm>

namespace coarse {

int CoverTower::top_realized_level() const {
  for (int k = static_cast<int>(levels.size()) - 1; k >= 0; --k)
    if (!levels[k].saturated) return k;
  return -1;
}

Rational CoverTower::interior_threshold() const {
  int top = top_realized_level();
  return top < 0 ? space->diameter() : levels[top].m;
}

bool CoverTower::is_interior(PointId p) const { return space->window_margin(p) > interior_threshold(); }

std::size_t TowerReport::interior_violations() const {
  return static_cast<std::size_t>(
      std::count_if(violations.begin(), violations.end(), [](const TowerViolation& v) { return !v.frontier; }));
}

Subset carve(const Subset& u, const std::vector<Subset>& earlier) {
  // carving can break a containment V in U, so repeat until nothing changes
  Subset current = u;
  for (;;) {
    boost::dynamic_bitset<> sources(u.metric().size());
    for (const auto& v : earlier)
      if (!v.empty() && !v.is_subset_of(current)) sources |= v.bits();
    if (sources.none()) return current;
    auto field = distance_field(Subset(u.space(), std::move(sources)));
    std::vector<PointId> kept;
    for (PointId p : u)
      if (field[p] >= Extended(4)) kept.push_back(p);
    Subset next(u.space(), std::move(kept));
    if (next == current) return current;
    current = std::move(next);
  }
}

namespace {

/// Family whose element reaches deepest around x0; ties to the lowest index.
std::size_t deepest_family(const std::vector<std::vector<Subset>>& families, PointId x0, Extended* depth_out) {
  std::size_t best = 0;
  Extended best_depth{-1};
  for (std::size_t f = 0; f < families.size(); ++f) {
    for (const auto& u : families[f]) {
      if (!u.contains(x0)) continue;
      Extended depth = depth_field(u)[x0];
      if (depth > best_depth) {
        best_depth = depth;
        best = f;
      }
    }
  }
  if (depth_out) *depth_out = best_depth;
  return best;
}

void rotate_to(std::vector<std::vector<Subset>>& families, std::size_t from, std::size_t to) {
  const std::size_t r = families.size();
  std::vector<std::vector<Subset>> rotated(r);
  for (std::size_t j = 0; j < r; ++j) rotated[(j + r - from + to) % r] = std::move(families[j]);
  families = std::move(rotated);
}

}  // namespace

CoverTower build_tower(const SpacePtr& space, std::size_t colors, int levels, const ColoredCover& seed,
                       const TowerOptions& options) {
  if (levels < 1) throw Error(ErrorCode::InvalidArgument, "tower needs at least one level");
  if (colors < 1) throw Error(ErrorCode::InvalidArgument, "tower needs at least one color");
  if (levels > 40) throw Error(ErrorCode::SizeLimit, "at most 40 levels");
  if (seed.space.get() != space.get()) throw Error(ErrorCode::SeedInvalid, "seed cover lives on another space");
  if (seed.d <= Rational(2)) throw Error(ErrorCode::SeedInvalid, "seed separation must exceed 2, got " + to_string(seed.d));
  if (seed.colors() > colors)
    throw Error(ErrorCode::SeedInvalid, "seed uses " + std::to_string(seed.colors()) + " colors, budget is " + std::to_string(colors));
  auto seed_report = verify_colored_cover(seed);
  if (!seed_report.ok()) throw Error(ErrorCode::SeedInvalid, "seed cover fails verification (" + seed_report.witness->check + ")");

  CoverTower tower;
  tower.space = space;
  tower.colors = colors;
  tower.base_point = space->base_point();
  tower.requested_levels = levels;
  const PointId x0 = tower.base_point;

  TowerLevel level0;
  level0.cover = seed;
  level0.cover.families.resize(colors);
  level0.d = seed.d;
  {
    Extended depth;
    std::size_t from = deepest_family(level0.cover.families, x0, &depth);
    if (from != 0) {
      rotate_to(level0.cover.families, from, 0);
      tower.provenance.push_back({0, "seed-rotate", "family " + std::to_string(from) + " -> color 0, depth " + to_string(depth)});
    }
  }
  level0.m = mesh(level0.cover.elements());
  level0.cover.mesh_bound = level0.m;
  level0.saturated = level0.cover.element_count() == 1 && level0.cover.elements().front().is_everything();
  tower.levels.push_back(std::move(level0));

  for (int l = 0; l + 1 < levels; ++l) {
    const int next = l + 1;
    if (tower.levels.back().saturated) {
      tower.window_exhausted = true;
      tower.provenance.push_back({next, "truncate", "level " + std::to_string(l) + " already spans the window"});
      break;
    }
    const Rational d_next = pow2(l + 2) * tower.levels[l].m;
    const std::size_t target = static_cast<std::size_t>(next) % colors;
    TowerLevel level;
    level.d = d_next;
    level.cover.space = space;
    level.cover.d = d_next;
    level.cover.families.assign(colors, {});

    if (d_next > space->diameter()) {
      level.cover.families[target].push_back(Subset::all(space));
      level.saturated = true;
      tower.window_exhausted = true;
      tower.provenance.push_back({next, "saturate", "d=" + to_string(d_next) + " exceeds window diameter " + to_string(space->diameter())});
    } else {
      Rational block = options.block_factor * d_next;
      ColoredCover raw;
      for (;;) {
        raw = inflated_colored_cover(space, d_next, block, 2 * d_next);
        if (raw.colors() <= colors) break;
        tower.provenance.push_back({next, "procure", "block " + to_string(block) + " gave " + std::to_string(raw.colors()) + " colors; doubling"});
        block *= 2;
      }
      tower.provenance.push_back({next, "procure", "block " + to_string(block) + ", " + std::to_string(raw.element_count()) + " elements, " + std::to_string(raw.colors()) + " colors"});
      raw.families.resize(colors);

      for (std::size_t f = 0; f < colors; ++f) {
        auto& family = raw.families[f];
        std::size_t before = family.size();
        std::erase_if(family, [&](const Subset& u) { return neighborhood(u, -2 * d_next).empty(); });
        if (family.size() != before)
          tower.provenance.push_back({next, "prune", "family " + std::to_string(f) + ": removed " + std::to_string(before - family.size())});
      }

      Extended depth;
      std::size_t from = deepest_family(raw.families, x0, &depth);
      if (from != target) {
        rotate_to(raw.families, from, target);
        tower.provenance.push_back({next, "rotate", "family " + std::to_string(from) + " -> color " + std::to_string(target) + ", depth " + to_string(depth)});
      }

      for (std::size_t c = 0; c < colors; ++c) {
        std::vector<Subset> earlier;
        for (int k = 0; k <= l; ++k)
          for (const auto& v : tower.levels[k].cover.families[c]) earlier.push_back(v);
        for (std::size_t e = 0; e < raw.families[c].size(); ++e) {
          const Subset& u = raw.families[c][e];
          Subset carved = carve(u, earlier);
          if (carved.size() != u.size())
            tower.provenance.push_back({next, "carve", "color " + std::to_string(c) + " element " + std::to_string(e) + ": removed " + std::to_string(u.size() - carved.size())});
          if (carved.empty()) {
            tower.provenance.push_back({next, "carve", "color " + std::to_string(c) + " element " + std::to_string(e) + " vanished"});
            continue;
          }
          level.cover.families[c].push_back(std::move(carved));
        }
      }
      auto all = level.cover.elements();
      level.saturated = all.size() == 1 && all.front().is_everything();
    }
    level.m = mesh(level.cover.elements());
    level.cover.mesh_bound = level.m;
    tower.levels.push_back(std::move(level));
  }
  return tower;
}

TowerReport verify_tower(const CoverTower& tower) {
  TowerReport report;
  const auto& space = *tower.space;
  const PointId x0 = tower.base_point;
  const auto r = tower.colors;
  auto frontier = [&](const std::vector<PointId>& pts) {
    return std::any_of(pts.begin(), pts.end(), [&](PointId p) { return !tower.is_interior(p); });
  };
  // only the window-sensitive conditions can be excused at the frontier
  auto add = [&](TowerViolation v) {
    const bool windowed = v.condition == "1-lebesgue" || v.condition == "1-core" || v.condition == "3'" || v.condition == "4";
    v.frontier = windowed && frontier(v.points);
    report.violations.push_back(std::move(v));
  };

  for (std::size_t k = 0; k < tower.levels.size(); ++k) {
    const auto& level = tower.levels[k];
    const int lk = static_cast<int>(k);
    LevelCheck check;

    auto cover_report = verify_colored_cover(level.cover);
    check.cover_ok = cover_report.ok() && level.cover.d == level.d && level.cover.colors() == r;
    if (!check.cover_ok) {
      TowerViolation v{"cover", lk};
      if (cover_report.witness) {
        v.color = cover_report.witness->family;
        v.element = cover_report.witness->element;
        v.other_element = cover_report.witness->other;
        v.points = {cover_report.witness->first, cover_report.witness->second};
        v.detail = cover_report.witness->check;
      } else {
        v.detail = "separation or color count mismatch";
      }
      add(std::move(v));
    }
    check.mesh_exact = cover_report.mesh == level.m;
    if (!check.mesh_exact) add({"mesh", lk, -1, 0, 0, 0, {}, "recorded " + to_string(level.m) + ", exact " + to_string(cover_report.mesh)});

    // (1)
    check.lebesgue = cover_report.lebesgue;
    check.lebesgue_ok = cover_report.covers && check.lebesgue > Extended(level.d);
    if (!check.lebesgue_ok) {
      TowerViolation v{"1-lebesgue", lk};
      v.detail = "L=" + to_string(check.lebesgue) + " <= d=" + to_string(level.d);
      if (cover_report.covers) {
        // the point attaining the minimum
        std::vector<Extended> best(space.size(), Extended(0));
        for (const auto& u : level.cover.elements()) {
          if (u.empty()) continue;
          auto depth = depth_field(u);
          for (PointId x : u) best[x] = std::max(best[x], depth[x]);
        }
        for (PointId x = 0; x < space.size(); ++x)
          if (best[x] == check.lebesgue) {
            v.points = {x};
            break;
          }
      }
      add(std::move(v));
    }
    check.cores_ok = true;
    for (std::size_t c = 0; c < level.cover.families.size(); ++c) {
      for (std::size_t e = 0; e < level.cover.families[c].size(); ++e) {
        const auto& u = level.cover.families[c][e];
        if (u.empty() || neighborhood(u, -level.d).empty()) {
          check.cores_ok = false;
          TowerViolation v{"1-core", lk, -1, c, e, e};
          v.points.assign(u.begin(), u.end());
          v.detail = "empty inner " + to_string(level.d) + "-core";
          add(std::move(v));
        }
      }
    }

    // (2)
    check.scale_ok = k == 0 || level.d > pow2(lk) * tower.levels[k - 1].m;
    if (!check.scale_ok)
      add({"2", lk, lk - 1, 0, 0, 0, {}, "d=" + to_string(level.d) + " <= 2^k m=" + to_string(pow2(lk) * tower.levels[k - 1].m)});

    // (3)': level l = m r + i needs U in family i with inner d_l-core containing B_m(x0)
    {
      const std::size_t i = k % r;
      const auto radius = static_cast<std::int64_t>(k / r);
      std::vector<PointId> ball;
      for (PointId y = 0; y < space.size(); ++y)
        if (space.distance(x0, y) <= Rational(radius)) ball.push_back(y);
      check.reach_ok = false;
      if (i < level.cover.families.size()) {
        for (const auto& u : level.cover.families[i]) {
          if (!u.contains(x0)) continue;
          auto depth = depth_field(u);
          if (std::all_of(ball.begin(), ball.end(), [&](PointId y) { return u.contains(y) && depth[y] > Extended(level.d); })) {
            check.reach_ok = true;
            break;
          }
        }
      }
      if (!check.reach_ok)
        add({"3'", lk, -1, i, 0, 0, {x0}, "no color-" + std::to_string(i) + " element whose inner core holds B_" + std::to_string(radius) + "(x0)"});
    }

    // (4): lower same-color U not inside this level's V must be >= 4 away
    check.separation_ok = true;
    for (std::size_t c = 0; c < level.cover.families.size(); ++c) {
      for (std::size_t e = 0; e < level.cover.families[c].size(); ++e) {
        const auto& v = level.cover.families[c][e];
        std::vector<Extended> field;
        for (std::size_t j = 0; j < k; ++j) {
          if (c >= tower.levels[j].cover.families.size()) continue;
          const auto& lower = tower.levels[j].cover.families[c];
          for (std::size_t f = 0; f < lower.size(); ++f) {
            const auto& u = lower[f];
            if (u.empty() || u.is_subset_of(v)) continue;
            if (field.empty()) field = distance_field(v);
            PointId closest = u.members().front();
            for (PointId p : u)
              if (field[p] < field[closest]) closest = p;
            if (field[closest] < Extended(4)) {
              check.separation_ok = false;
              TowerViolation viol{"4", static_cast<int>(j), lk, c, f, e};
              viol.points = {closest};
              viol.detail = "d(U,V)=" + to_string(field[closest]) + " < 4";
              add(std::move(viol));
            }
          }
        }
      }
    }
    report.levels.push_back(check);
  }
  return report;
}

}  // namespace coarse
