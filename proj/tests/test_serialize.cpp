#include "coarse/error.hpp"
#include "coarse/serialize.hpp"
#include "oracle.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>

using namespace coarse;

namespace {

void same_space(const FiniteMetricSpace& a, const FiniteMetricSpace& b) {
  REQUIRE(a.size() == b.size());
  CHECK(a.base_point() == b.base_point());
  CHECK(a.scale() == b.scale());
  for (PointId p = 0; p < a.size(); ++p) {
    CHECK(a.label(p) == b.label(p));
    CHECK(a.window_margin(p) == b.window_margin(p));
    for (PointId q = 0; q < p; ++q) CHECK(a.distance(p, q) == b.distance(p, q));
  }
}

bool same_families(const ColoredCover& a, const ColoredCover& b) {
  if (a.families.size() != b.families.size()) return false;
  for (std::size_t c = 0; c < a.families.size(); ++c) {
    if (a.families[c].size() != b.families[c].size()) return false;
    for (std::size_t i = 0; i < a.families[c].size(); ++i)
      if (!std::ranges::equal(a.families[c][i].members(), b.families[c][i].members())) return false;
  }
  return a.d == b.d && a.mesh_bound == b.mesh_bound;
}

}  // namespace

TEST_CASE("space documents round trip") {
  std::vector<SpacePtr> spaces{gen_grid(2, 3, Norm::LInf), gen_free_group_ball(2, 2), oracle::path(-3, 4),
                               product_space(oracle::path(0, 2), gen_grid(1, 1, Norm::L1))};
  // a metric with a sub-unit distance is rescaled on load
  spaces.push_back(FiniteMetricSpace::from_matrix({"a", "b", "c"}, {Rational(1, 2), Rational(1), Rational(3, 4)}, 1));
  for (const auto& s : spaces) {
    const Json doc = to_json(*s);
    CHECK(artifact_kind(doc) == ArtifactKind::Space);
    auto back = space_from_json(Json::parse(dump(doc)));
    same_space(*s, *back);
    CHECK(dump(to_json(*back)) == dump(doc));
  }
  CHECK(spaces.back()->scale() == Rational(2));
}

TEST_CASE("space documents are checked on load") {
  auto doc = to_json(*gen_grid(1, 3, Norm::L1));
  CHECK_THROWS_AS(space_from_json(doc, 5), Error);
  auto relabeled = doc;
  relabeled["points"][0] = "bogus";
  CHECK_THROWS_AS(space_from_json(relabeled), Error);
  auto wrong = doc;
  wrong["format"] = "coarse/nothing";
  CHECK_THROWS_AS(artifact_kind(wrong), Error);
  auto future = doc;
  future["version"] = kFormatVersion + 1;
  CHECK_THROWS_AS(space_from_json(future), Error);
}

TEST_CASE("cover, tower, trees and embedding round trip") {
  auto s = gen_grid(1, 40, Norm::L1);
  auto seed = inflated_colored_cover(s, Rational(5, 2), Rational(6), Rational(5, 2));
  auto cover_back = cover_from_json(Json::parse(dump(to_json(seed))));
  CHECK(same_families(seed, cover_back));

  auto tower = build_tower(s, 2, 3, seed);
  auto tower_doc = to_json(tower);
  auto tower_back = tower_from_json(Json::parse(dump(tower_doc)));
  REQUIRE(tower_back.levels.size() == tower.levels.size());
  CHECK(tower_back.colors == tower.colors);
  CHECK(tower_back.window_exhausted == tower.window_exhausted);
  for (std::size_t l = 0; l < tower.levels.size(); ++l) {
    CHECK(tower_back.levels[l].d == tower.levels[l].d);
    CHECK(tower_back.levels[l].m == tower.levels[l].m);
    CHECK(tower_back.levels[l].saturated == tower.levels[l].saturated);
    CHECK(same_families(tower_back.levels[l].cover, tower.levels[l].cover));
  }
  CHECK(dump(to_json(tower_back)) == dump(tower_doc));

  std::vector<ScaleTree> trees;
  for (std::size_t c = 0; c < tower.colors; ++c) trees.push_back(build_tree(tower, c));
  auto trees_doc = to_json(tower, trees);
  auto trees_back = trees_from_json(Json::parse(dump(trees_doc)), tower_back);
  REQUIRE(trees_back.size() == trees.size());
  for (std::size_t c = 0; c < trees.size(); ++c) {
    CHECK(trees_back[c].root() == trees[c].root());
    REQUIRE(trees_back[c].nodes().size() == trees[c].nodes().size());
    for (NodeId n = 0; n < trees[c].nodes().size(); ++n) {
      CHECK(trees_back[c].node(n).ref == trees[c].node(n).ref);
      CHECK(trees_back[c].node(n).parent == trees[c].node(n).parent);
      CHECK(trees_back[c].node(n).attach == trees[c].node(n).attach);
      CHECK(trees_back[c].node(n).root_distance == trees[c].node(n).root_distance);
    }
  }
  CHECK(dump(to_json(tower_back, trees_back)) == dump(trees_doc));

  auto e = embed_space(tower, trees);
  auto e_doc = to_json(tower, trees, e);
  auto e_back = embedding_from_json(Json::parse(dump(e_doc)), tower_back);
  CHECK(e_back.points == e.points);
}

TEST_CASE("report CSV carries exact fractions") {
  auto s = FiniteMetricSpace::from_matrix({"a", "b", "c"}, {Rational(3), Rational(5), Rational(7, 2)}, 0);
  auto seed = inflated_colored_cover(s, Rational(5, 2), Rational(0), Rational(5, 2));
  auto tower = build_tower(s, std::max<std::size_t>(seed.colors(), 1), 1, seed);
  std::vector<ScaleTree> trees;
  for (std::size_t c = 0; c < tower.colors; ++c) trees.push_back(build_tree(tower, c));
  auto e = embed_space(tower, trees);
  auto r = distortion_report(tower, trees, e);
  const std::string csv = report_csv(r);
  CHECK(csv.rfind("distance,rho1,rho2,pairs\n", 0) == 0);
  CHECK(csv.find("7/2,") != std::string::npos);
  std::size_t lines = 0;
  for (char ch : csv) lines += ch == '\n';
  CHECK(lines == r.buckets.size() + 1);
  auto j = to_json(r, tower);
  CHECK(artifact_kind(j) == ArtifactKind::Report);
}

TEST_CASE("write_text replaces files whole") {
  const auto dir = std::filesystem::temp_directory_path() / "coarse_serialize_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  write_text(dir / "a.txt", "first");
  write_text(dir / "a.txt", "second");
  std::ifstream in(dir / "a.txt");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(text == "second");
  CHECK_THROWS(read_json(dir / "missing.json"));
  std::filesystem::remove_all(dir);
}
