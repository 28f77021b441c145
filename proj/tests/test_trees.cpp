#include "coarse/error.hpp"
#include "coarse/scale_tree.hpp"
#include "oracle.hpp"

#include <doctest.h>

using namespace coarse;

namespace {

Subset interval(const SpacePtr& s, int lo, int hi) { return oracle::subset(s, oracle::range(*s, lo, hi)); }

/// One-color tower from explicit per-level sets (covers need not be valid).
CoverTower manual(const SpacePtr& s, const std::vector<std::pair<Rational, std::vector<Subset>>>& levels) {
  CoverTower t;
  t.space = s;
  t.colors = 1;
  t.requested_levels = static_cast<int>(levels.size());
  for (const auto& [d, sets] : levels) {
    TowerLevel l;
    l.d = d;
    l.cover.space = s;
    l.cover.d = d;
    l.cover.families = {sets};
    l.m = sets.empty() ? Rational(0) : mesh(sets);
    l.cover.mesh_bound = l.m;
    t.levels.push_back(std::move(l));
  }
  return t;
}

}  // namespace

TEST_CASE("attachment values") {
  auto s = oracle::path(-1, 101);
  auto parent = interval(s, 0, 100);
  // 16 sits at depth 17 in {0..100}: floor(17 * 8 / 40) = 3
  CHECK(attach_value(interval(s, 16, 16), parent, 3, Rational(40)) == 3);
  CHECK(attach_value(interval(s, 50, 50), parent, 3, Rational(40)) == 8);
  CHECK(attach_value(interval(s, 0, 0), parent, 3, Rational(40)) == 0);
  CHECK(attach_value(interval(s, 0, 0), Subset::all(s), 3, Rational(40)) == 8);
  for (int lo = 0; lo < 100; lo += 7) {
    auto child = interval(s, lo, lo + 3);
    CHECK(attach_value(child, parent, 2, Rational(9)) ==
          oracle::attach(*s, oracle::points(child), oracle::points(parent), 2, Rational(9)));
  }
}

TEST_CASE("nested intervals give a path") {
  auto s = oracle::path(-10, 60);
  auto t = manual(s, {{Rational(3), {interval(s, 10, 14)}}, {Rational(10), {interval(s, 5, 30)}},
                      {Rational(40), {interval(s, 0, 50)}}});
  CHECK(psi(t, 0, {0, 0}) == SetRef{1, 0});
  CHECK(psi(t, 0, {1, 0}) == SetRef{2, 0});
  CHECK_FALSE(psi(t, 0, {2, 0}));
  CHECK(attach_point(t, 0, {0, 0}) == oracle::attach(*s, oracle::range(*s, 10, 14), oracle::range(*s, 5, 30), 1, Rational(10)));
  CHECK(attach_point(t, 0, {1, 0}) == oracle::attach(*s, oracle::range(*s, 5, 30), oracle::range(*s, 0, 50), 2, Rational(40)));

  auto tree = build_tree(t, 0);
  // the top set is not the whole window, so a virtual root hosts the rest
  CHECK(tree.has_virtual_root());
  REQUIRE(tree.nodes().size() == 4);
  const NodeId a = *tree.find({0, 0}), b = *tree.find({1, 0}), c = *tree.find({2, 0});
  CHECK(tree.node(a).parent == b);
  CHECK(tree.node(b).parent == c);
  CHECK(tree.node(c).parent == tree.root());
  CHECK(tree.node(a).attach == 2);  // depth 10 in {5..30}: floor(10 * 2 / 10)
  CHECK(tree.node(b).attach == 2);  // depth 26 in {0..50}: floor(26 * 4 / 40)
  CHECK(tree.is_connected_acyclic());
}

TEST_CASE("two level-0 sets under one level-1 set form a star") {
  auto s = oracle::path(0, 40);
  auto t = manual(s, {{Rational(3), {interval(s, 5, 10), interval(s, 25, 30)}}, {Rational(8), {Subset::all(s)}}});
  auto tree = build_tree(t, 0);
  CHECK_FALSE(tree.has_virtual_root());
  const NodeId top = *tree.find({1, 0});
  CHECK(tree.root() == top);
  CHECK(tree.node(top).children.size() == 2);
  for (NodeId c : tree.node(top).children) {
    CHECK(tree.node(c).set.is_subset_of(tree.node(top).set));
    CHECK(tree.node(c).attach == 2);  // the parent is X: infinite depth clamps to 2^1
    CHECK(tree.node(c).ref.level < tree.node(top).ref.level);
  }
}

TEST_CASE("disjoint top sets hang from a virtual root") {
  auto s = oracle::path(0, 40);
  auto t = manual(s, {{Rational(3), {interval(s, 0, 19), interval(s, 25, 40)}}});
  CHECK_FALSE(psi(t, 0, {0, 0}));
  CHECK_FALSE(psi(t, 0, {0, 1}));
  auto tree = build_tree(t, 0);
  CHECK(tree.has_virtual_root());
  CHECK(tree.node(tree.root()).length == Rational(0));
  const NodeId a = *tree.find({0, 0}), b = *tree.find({0, 1});
  // both 0-ends sit on the zero-length root
  CHECK(tree.distance({a, Rational(1)}, {b, Rational(1)}) == Rational(2));
}

TEST_CASE("incomparable supersets are a chain violation") {
  auto s = oracle::path(0, 40);
  auto t = manual(s, {{Rational(3), {interval(s, 6, 10)}}, {Rational(8), {interval(s, 0, 20)}},
                      {Rational(30), {interval(s, 5, 30)}}});
  CHECK_THROWS_AS(psi(t, 0, {0, 0}), Error);
  CHECK_THROWS_AS(build_tree(t, 0), Error);
}

TEST_CASE("tree distance along attachments") {
  auto s = oracle::path(0, 10);
  std::vector<TreeNode> nodes(2);
  nodes[0].ref = {3, 0};
  nodes[0].set = Subset::all(s);
  nodes[0].length = Rational(8);
  nodes[1].ref = {1, 0};
  nodes[1].set = interval(s, 2, 4);
  nodes[1].length = Rational(2);
  nodes[1].parent = 0;
  nodes[1].attach = 3;
  auto tree = assemble_tree(0, nodes, 0);
  CHECK(tree.distance({0, Rational(2)}, {0, Rational(5)}) == Rational(3));
  CHECK(tree.distance({1, Rational(0)}, {0, Rational(7)}) == Rational(4));
  CHECK(tree.distance({1, Rational(2)}, {0, Rational(7)}) == Rational(6));
  CHECK(tree.distance({0, Rational(7)}, {1, Rational(2)}) == Rational(6));
  CHECK(tree.distance({1, Rational(1, 2)}, {1, Rational(1, 2)}) == Rational(0));
  CHECK(tree.distance({1, Rational(0)}, {0, Rational(3)}) == Rational(0));

  nodes[1].parent = 1;  // self loop
  CHECK_THROWS_AS(assemble_tree(0, nodes, 0), Error);
}

TEST_CASE("built trees satisfy the four-point condition") {
  auto s = gen_grid(1, 256, Norm::L1);
  auto seed = inflated_colored_cover(s, Rational(5, 2), Rational(6), Rational(5, 2));
  auto t = build_tower(s, 2, 3, seed);
  for (std::size_t c = 0; c < 2; ++c) {
    auto tree = build_tree(t, c);
    CHECK(tree.is_connected_acyclic());
    auto fp = four_point_check(tree, 2000, 11 + c);
    CHECK(fp.samples == 2000);
    CHECK(fp.failures == 0);
    for (const auto& n : tree.nodes()) {
      if (!n.parent || tree.node(*n.parent).is_virtual) continue;
      CHECK(n.set.is_subset_of(tree.node(*n.parent).set));
      CHECK(n.ref.level < tree.node(*n.parent).ref.level);
    }
  }
}

TEST_CASE("zero-attachment chains are linted") {
  auto s = oracle::path(0, 100);
  // each set hugs its parent's frontier at a tiny fraction of the parent's scale
  auto t = manual(s, {{Rational(3), {interval(s, 59, 59)}}, {Rational(50), {interval(s, 57, 59)}},
                      {Rational(100), {interval(s, 50, 59)}}, {Rational(200), {interval(s, 0, 59)}}});
  auto tree = build_tree(t, 0);
  REQUIRE(tree.zero_chains().size() == 1);
  CHECK(tree.zero_chains()[0].length == 3);
  CHECK(tree.zero_chains()[0].bottom == *tree.find({0, 0}));
}

TEST_CASE("linear-type cover of trees") {
  auto s = oracle::path(0, 20);
  SUBCASE("single interval of length 8") {
    std::vector<TreeNode> nodes(1);
    nodes[0].ref = {3, 0};
    nodes[0].set = Subset::all(s);
    nodes[0].length = Rational(8);
    auto tree = assemble_tree(0, nodes, 0);
    auto disc = discretize(tree);
    CHECK(disc.space->size() == 9);
    auto cover = tree_colored_cover(tree, Rational(2));
    CHECK(cover.colors() == 2);
    auto r = verify_colored_cover(cover);
    CHECK(r.ok());
    CHECK(r.mesh <= Rational(8));
  }
  SUBCASE("star: annuli split by branch") {
    std::vector<TreeNode> nodes(4);
    nodes[0].ref = {2, 0};
    nodes[0].set = Subset::all(s);
    nodes[0].length = Rational(4);
    for (std::size_t i = 1; i < 4; ++i) {
      nodes[i].ref = {2, i};
      nodes[i].set = interval(s, static_cast<int>(i), static_cast<int>(i));
      nodes[i].length = Rational(4);
      nodes[i].parent = 0;
      nodes[i].attach = 4;
    }
    auto tree = assemble_tree(0, nodes, 0);
    auto cover = tree_colored_cover(tree, Rational(2));
    auto r = verify_colored_cover(cover);
    CHECK(r.ok());
    // bands [0,2) and [2,4) on the trunk, one band joining the branches at
    // their base, then three pieces in each of the last two bands
    CHECK(cover.element_count() == 9);
    CHECK(r.mesh <= Rational(8));
  }
  SUBCASE("large d gives the whole tree") {
    std::vector<TreeNode> nodes(1);
    nodes[0].ref = {2, 0};
    nodes[0].set = Subset::all(s);
    nodes[0].length = Rational(4);
    auto tree = assemble_tree(0, nodes, 0);
    auto cover = tree_colored_cover(tree, Rational(10));
    CHECK(cover.element_count() == 1);
    CHECK(verify_colored_cover(cover).mesh == Rational(4));
  }
}
