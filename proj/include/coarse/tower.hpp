#pragma once

#include "coarse/cover.hpp"

#include <string>
#include <vector>

namespace coarse {

struct TowerLevel {
  ColoredCover cover;  // families indexed by color, separation d
  Rational d{0};
  Rational m{0};  // exact mesh
  /// The level is the single set X: its scale exceeds what the window can
  /// resolve, so the whole window is the only cover with a large enough
  /// Lebesgue number.
  bool saturated = false;
};

struct ProvenanceRecord {
  int level = 0;
  std::string action;  // seed-rotate, procure, prune, rotate, carve, saturate, truncate
  std::string detail;
};

/// The sequence of colored covers U_0, U_1, ... with scales d_k and meshes m_k.
struct CoverTower {
  SpacePtr space;
  std::vector<TowerLevel> levels;
  std::size_t colors = 0;
  PointId base_point = 0;
  int requested_levels = 0;
  bool window_exhausted = false;
  std::vector<ProvenanceRecord> provenance;

  bool truncated() const noexcept { return static_cast<int>(levels.size()) < requested_levels; }
  /// Highest level that is not saturated (-1 if none).
  int top_realized_level() const;
  /// Window margin a point needs to count as interior: m_K at the top realized level.
  Rational interior_threshold() const;
  bool is_interior(PointId p) const;
};

struct TowerOptions {
  /// Initial cluster diameter for raw covers, as a multiple of d_{l+1}.
  Rational block_factor{8};
};

/// Inductive construction: d_{l+1} = 2^{l+2} m_l; raw cover with Lebesgue
/// number > 2 d_{l+1}; prune elements with empty inner 2 d_{l+1}-core;
/// rotate colors so color (l+1) mod r has the base point deepest; carve
/// open 4-neighbourhoods of earlier same-color sets not contained in U.
/// Error(SeedInvalid) for a seed that fails verification, has d <= 2, or
/// uses more than `colors` families.
CoverTower build_tower(const SpacePtr& space, std::size_t colors, int levels, const ColoredCover& seed,
                       const TowerOptions& options = {});

/// U minus the points at distance < 4 from earlier sets V not inside the result
/// (iterated to a fixed point).
Subset carve(const Subset& u, const std::vector<Subset>& earlier);

struct TowerViolation {
  std::string condition;  // cover, mesh, 1-lebesgue, 1-core, 2, 3', 4
  int level = 0;
  int other_level = -1;
  std::size_t color = 0;
  std::size_t element = 0;
  std::size_t other_element = 0;
  std::vector<PointId> points;
  std::string detail;
  bool frontier = false;
};

struct LevelCheck {
  Extended lebesgue{0};
  bool cover_ok = false;
  bool mesh_exact = false;
  bool lebesgue_ok = false;
  bool cores_ok = false;
  bool scale_ok = false;
  bool reach_ok = false;
  bool separation_ok = false;
};

struct TowerReport {
  std::vector<LevelCheck> levels;
  std::vector<TowerViolation> violations;

  std::size_t interior_violations() const;
  bool ok() const noexcept { return violations.empty(); }
};

TowerReport verify_tower(const CoverTower& tower);

}  // namespace coarse
