#pragma once

#include "coarse/scale_tree.hpp"

#include <map>
#include <vector>

namespace coarse {

enum class AnchorClass { InnerCore, ChildBoundary, OuterBoundary };

std::string to_string(AnchorClass c);

/// A point that qualified for two anchor classes with different values.
/// The higher-precedence class is kept.
struct AnchorConflict {
  PointId point = 0;
  AnchorClass kept = AnchorClass::InnerCore;
  AnchorClass dropped = AnchorClass::InnerCore;
  Rational kept_value{0};
  Rational dropped_value{0};
};

/// Two anchors whose values differ by more than their distance.
struct AnchorShortness {
  PointId first = 0;
  PointId second = 0;
  Rational gap{0};
  Rational distance{0};
};

/// The anchor map xi of one tree node: the inner core goes to 2^k, the
/// outer boundary to 0 and the boundary of each child V to a_V.
struct AnchorFunction {
  std::size_t color = 0;
  NodeId node = 0;
  Rational top{1};  // 2^k, the interval length
  std::map<PointId, Rational> anchors;
  std::map<PointId, AnchorClass> provenance;
  std::vector<AnchorConflict> conflicts;
  std::vector<AnchorShortness> shortness;
};

/// Smallest-level set of the tree's color containing x.
/// Error(NoCoveringSet) when no set of that color contains x.
NodeId select_node(const ScaleTree& tree, PointId x);

AnchorFunction build_anchors(const CoverTower& tower, const ScaleTree& tree, NodeId node);

/// clamp(min_y xi(y) + d(x, y), 0, 2^k); 2^k when there are no anchors.
Rational short_extension(const AnchorFunction& f, const FiniteMetricSpace& space, PointId x);

/// short_extension at every point of the space (a bounded multi-source
/// Dijkstra on graph spaces, the direct formula elsewhere).
std::vector<Rational> extend_all(const AnchorFunction& f, const FiniteMetricSpace& space);

/// p_i(x); a point no set covers goes to offset 0 of the virtual root.
TreePoint project(const CoverTower& tower, const ScaleTree& tree, PointId x);

struct ProductPoint {
  std::vector<TreePoint> coordinates;  // one per color

  friend bool operator==(const ProductPoint&, const ProductPoint&) = default;
};

/// Per-node anchor diagnostics kept by embed_space.
struct AnchorSummary {
  std::size_t color = 0;
  NodeId node = 0;
  std::size_t anchor_count = 0;
  std::vector<AnchorConflict> conflicts;
  std::vector<AnchorShortness> shortness;
};

struct Embedding {
  SpacePtr space;
  std::vector<ProductPoint> points;                // indexed by point id
  std::vector<std::vector<PointId>> uncovered;     // per color, sent to the virtual root
  std::vector<AnchorSummary> anchors;              // nodes with anchors, by color then node
};

Embedding embed_space(const CoverTower& tower, const std::vector<ScaleTree>& trees, unsigned workers = 1);

/// l1 sum of tree distances over the colors.
Rational product_distance(const std::vector<ScaleTree>& trees, const ProductPoint& a, const ProductPoint& b);

}  // namespace coarse
