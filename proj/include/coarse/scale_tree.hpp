#pragma once

#include "coarse/tower.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace coarse {

using NodeId = std::size_t;

/// A set of the tower named by (level, element) within a fixed color.
struct SetRef {
  int level = 0;
  std::size_t element = 0;

  friend bool operator==(const SetRef&, const SetRef&) = default;
};

/// Smallest same-color set strictly containing U (lowest level among equal
/// candidates). Error(ChainViolation) if two candidates are incomparable.
std::optional<SetRef> psi(const CoverTower& tower, std::size_t color, SetRef u);

/// min(2^k, floor(s 2^k / d_k)) with s = max over the child of d(x, X \ parent),
/// k the parent's level. An infinite s clamps to 2^k.
std::int64_t attach_value(const Subset& child, const Subset& parent, int parent_level, const Rational& parent_d);

/// attach_value against psi(V); Error(InvalidArgument) when V has no parent.
std::int64_t attach_point(const CoverTower& tower, std::size_t color, SetRef v);

struct TreeNode {
  SetRef ref;
  bool is_virtual = false;
  Subset set;
  Rational length{0};  // 2^level, zero for the virtual root
  std::optional<NodeId> parent;
  std::int64_t attach = 0;  // integer point of the parent interval holding this node's 0-end
  std::vector<NodeId> children;
  int depth = 0;             // edges to the root
  Rational root_distance{0};  // tree distance from the 0-end to the root point
};

/// A point of the metric tree: `offset` along the node's interval, 0 being
/// the end glued to the parent.
struct TreePoint {
  NodeId node = 0;
  Rational offset{0};

  friend bool operator==(const TreePoint&, const TreePoint&) = default;
};

struct ZeroChainLint {
  NodeId bottom = 0;
  std::size_t length = 0;
};

/// The interval tree of one color. Nodes are every nonempty set of that
/// color across all levels; edges follow psi.
class ScaleTree {
public:
  std::size_t color() const noexcept { return color_; }
  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  const TreeNode& node(NodeId id) const { return nodes_.at(id); }
  NodeId root() const noexcept { return root_; }
  bool has_virtual_root() const noexcept { return nodes_[root_].is_virtual; }
  std::optional<NodeId> find(SetRef ref) const;

  /// Length of the unique path between two located points.
  Rational distance(const TreePoint& p, const TreePoint& q) const;
  /// Lowest common ancestor of two nodes.
  NodeId common_ancestor(NodeId a, NodeId b) const;
  /// Chains of consecutive zero attachments of length >= 2 (bottom node, length).
  const std::vector<ZeroChainLint>& zero_chains() const noexcept { return zero_chains_; }

  /// Parent table must be acyclic and reach the root from every node.
  bool is_connected_acyclic() const;

private:
  friend ScaleTree build_tree(const CoverTower& tower, std::size_t color);
  friend ScaleTree assemble_tree(std::size_t color, std::vector<TreeNode> nodes, NodeId root);

  void finalize();

  std::size_t color_ = 0;
  std::vector<TreeNode> nodes_;
  NodeId root_ = 0;
  std::vector<ZeroChainLint> zero_chains_;
};

/// Builds the tree; a zero-length virtual root joins several parentless
/// nodes and also hosts points of the window no set of this color covers.
ScaleTree build_tree(const CoverTower& tower, std::size_t color);

/// Builds a tree from an explicit node table (used by deserialization and tests).
ScaleTree assemble_tree(std::size_t color, std::vector<TreeNode> nodes, NodeId root);

Rational tree_distance(const ScaleTree& tree, const TreePoint& p, const TreePoint& q);

struct FourPointResult {
  std::size_t samples = 0;
  std::size_t failures = 0;
  std::optional<std::array<TreePoint, 4>> witness;  // first failing quadruple
};

/// Samples quadruples of points (node uniform, offset a random multiple of 1/2
/// in the node's interval) and checks that the two largest of the three
/// pairwise sums coincide.
FourPointResult four_point_check(const ScaleTree& tree, std::size_t samples, std::uint64_t seed);

/// Integer points of the tree as a unit-edge tree space.
struct DiscreteTree {
  SpacePtr space;
  std::vector<TreePoint> located;  // located[i] is point i of `space`
};

DiscreteTree discretize(const ScaleTree& tree);

/// Two-color cover of the discretized tree: annuli of width d around the
/// root point, split by the ancestor at depth ceil(jd) - floor(d/2); the
/// parity of j picks the color.
ColoredCover tree_colored_cover(const ScaleTree& tree, const Rational& d);
ColoredCover tree_colored_cover(const DiscreteTree& tree, const Rational& d);

}  // namespace coarse
