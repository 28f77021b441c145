#pragma once

#include "coarse/rational.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace coarse {

using PointId = std::uint32_t;

class FiniteMetricSpace;
using SpacePtr = std::shared_ptr<const FiniteMetricSpace>;

enum class Norm { L1, LInf };

std::string to_string(Norm norm);
Norm parse_norm(std::string_view text);

inline constexpr std::size_t kDefaultMaxPoints = 200000;

struct GridDescriptor {
  int dim = 1;
  int extent = 1;
  Norm norm = Norm::L1;
};

struct FreeGroupDescriptor {
  int rank = 1;
  int radius = 0;
};

/// Unit-edge rooted tree; parent[i] < 0 marks the root.
struct TreeDescriptor {
  std::vector<std::int64_t> parent;
};

struct ExplicitDescriptor {};

/// l1 sum metric on a x b; point (i, j) has index i * |b| + j.
struct ProductDescriptor {
  SpacePtr first;
  SpacePtr second;
};

using SpaceDescriptor =
    std::variant<GridDescriptor, FreeGroupDescriptor, TreeDescriptor, ExplicitDescriptor, ProductDescriptor>;

/// A finite window into a metric space. Immutable after construction.
///
/// Distinct points are at distance at least one; explicit inputs closer
/// than that are rescaled on ingest and the applied factor is kept in
/// scale(). Spaces whose metric is the path metric of a unit-edge graph
/// (grids, trees, their products) expose that graph through neighbors(),
/// which lets set operations run as breadth-first scans instead of
/// all-pairs minimisation.
class FiniteMetricSpace {
public:
  /// Builds an explicit metric from a lower-triangular row-major matrix:
  /// entry (i, j) with j < i lives at i*(i-1)/2 + j.
  static SpacePtr from_matrix(std::vector<std::string> labels, std::vector<Rational> lower, PointId base_point,
                              std::vector<Rational> margins = {});

  std::size_t size() const noexcept { return labels_.size(); }
  const std::string& label(PointId p) const { return labels_.at(p); }
  std::optional<PointId> find(std::string_view label) const;
  /// Throws Error(ParseError) for unknown labels.
  PointId index_of(std::string_view label) const;

  PointId base_point() const noexcept { return base_point_; }
  const Rational& window_margin(PointId p) const { return margins_.at(p); }
  const std::vector<Rational>& window_margins() const noexcept { return margins_; }
  const Rational& scale() const noexcept { return scale_; }
  const Rational& diameter() const noexcept { return diameter_; }

  Rational distance(PointId a, PointId b) const;

  bool is_graph_metric() const noexcept { return !adjacency_.empty(); }
  std::span<const PointId> neighbors(PointId p) const { return adjacency_.at(p); }

  const SpaceDescriptor& descriptor() const noexcept { return descriptor_; }

private:
  FiniteMetricSpace() = default;
  friend struct SpaceBuilder;
  friend SpacePtr gen_grid(int, int, Norm, std::size_t);
  friend SpacePtr gen_free_group_ball(int, int, std::size_t);
  friend SpacePtr tree_space(std::vector<std::int64_t>, std::vector<std::string>, PointId, std::size_t);
  friend SpacePtr product_space(const SpacePtr&, const SpacePtr&, std::size_t);

  std::int64_t tree_distance(PointId a, PointId b) const;

  std::vector<std::string> labels_;
  std::unordered_map<std::string, PointId> label_index_;
  PointId base_point_ = 0;
  std::vector<Rational> margins_;
  Rational scale_{1};
  Rational diameter_{0};
  SpaceDescriptor descriptor_;

  // metric payloads; which one is used follows descriptor_
  std::vector<std::int32_t> coords_;      // grid, dim entries per point
  std::vector<std::int64_t> parent_;      // tree / free group
  std::vector<std::int32_t> depth_;       // tree / free group
  std::vector<Rational> lower_;           // explicit
  std::vector<std::vector<PointId>> adjacency_;
};

/// Lattice points {-extent..extent}^n with the l1 or l-infinity metric.
SpacePtr gen_grid(int n, int extent, Norm norm, std::size_t max_points = kDefaultMaxPoints);

/// Reduced words of length <= radius over `rank` free generators; word metric.
SpacePtr gen_free_group_ball(int rank, int radius, std::size_t max_points = kDefaultMaxPoints);

/// Unit-edge tree metric. Margins default to zero.
SpacePtr tree_space(std::vector<std::int64_t> parent, std::vector<std::string> labels, PointId base_point,
                    std::size_t max_points = kDefaultMaxPoints);

/// l1 product; the base point is the pair of base points.
SpacePtr product_space(const SpacePtr& first, const SpacePtr& second,
                       std::size_t max_points = kDefaultMaxPoints);

/// Rebuilds a space from its descriptor (generators are re-expanded).
SpacePtr rebuild(const SpaceDescriptor& descriptor, std::size_t max_points = kDefaultMaxPoints);

}  // namespace coarse
