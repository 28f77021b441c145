#pragma once

#include "coarse/metric_ops.hpp"

#include <optional>
#include <string>
#include <vector>

namespace coarse {

/// A cover split into color classes; each class should be d-disjoint
/// (pairwise set distance strictly greater than d) with element
/// diameters at most mesh_bound. Elements of different colors may overlap.
struct ColoredCover {
  SpacePtr space;
  std::vector<std::vector<Subset>> families;
  Rational d{1};
  Rational mesh_bound{0};

  std::size_t colors() const noexcept { return families.size(); }
  std::size_t element_count() const;
  std::vector<Subset> elements() const;
};

struct CoverWitness {
  std::string check;  // "covers", "d_disjoint", "mesh"
  std::size_t family = 0;
  std::size_t element = 0;
  std::size_t other = 0;
  PointId first = 0;
  PointId second = 0;
  Rational value{0};
};

struct VerificationReport {
  bool covers = false;
  std::vector<bool> d_disjoint;
  bool mesh_ok = false;
  Extended lebesgue{0};  // zero when the family does not cover
  Rational mesh{0};
  std::optional<CoverWitness> witness;

  bool ok() const;
};

VerificationReport verify_colored_cover(const ColoredCover& cover);

/// Breadth-first accretion from the smallest unassigned point; a point
/// joins the growing cluster while the cluster diameter stays <= block.
std::vector<Subset> greedy_clusters(const SpacePtr& space, const Rational& block);

/// Greedy coloring of the conflict graph (edge iff set distance <= d):
/// decreasing degree, ties by smallest member id, smallest free color.
std::vector<std::size_t> color_sets(const std::vector<Subset>& sets, const Rational& d);

/// Clusters, conflict graph and coloring; one family per color.
ColoredCover greedy_colored_cover(const SpacePtr& space, const Rational& d, const Rational& block);

/// Like greedy_colored_cover but every cluster is replaced by its closed
/// `margin`-neighbourhood before coloring, which forces the Lebesgue
/// number above `margin`.
ColoredCover inflated_colored_cover(const SpacePtr& space, const Rational& d, const Rational& block,
                                    const Rational& margin);

/// Elementwise products U x V on `product` (which must be
/// product_space(a.space, b.space)); family (i, j) lands at i * |b| + j.
/// Error(ScaleMismatch) when a.d != b.d.
ColoredCover product_cover(const ColoredCover& a, const ColoredCover& b, const SpacePtr& product);

}  // namespace coarse
