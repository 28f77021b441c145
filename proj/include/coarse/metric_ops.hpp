#pragma once

#include "coarse/metric_space.hpp"
#include "coarse/subset.hpp"

#include <array>
#include <optional>
#include <vector>

namespace coarse {

/// d(x, A). An empty A throws Error(EmptySet) unless `allow_empty`, in
/// which case +infinity is returned.
Extended dist_point_set(PointId x, const Subset& a, bool allow_empty = false);

/// d(x, A) for every point of the space; +infinity everywhere when A is empty.
std::vector<Extended> distance_field(const Subset& a);

/// phi_U(x) = d(x, X \ U) for x in U, and 0 outside U. +infinity when U = X.
std::vector<Extended> depth_field(const Subset& u);

/// inf over pairs; Error(EmptySet) when either side is empty.
Rational set_set_distance(const Subset& a, const Subset& b);

struct PointPair {
  PointId first = 0;
  PointId second = 0;
};

/// Closest pair realising set_set_distance, ties broken by smallest ids.
PointPair closest_pair(const Subset& a, const Subset& b);

/// Closed outer neighbourhood {x : d(x,A) <= r} for r >= 0, strict inner
/// core {x in A : d(x, X \ A) > -r} for r < 0.
Subset neighborhood(const Subset& a, const Rational& r);

/// Points within unit distance of the frontier of A, from either side.
Subset discrete_boundary(const Subset& a);

Rational diameter(const Subset& a);
/// Pair realising the diameter (lexicographically smallest); {0,0} on singletons.
PointPair diameter_pair(const Subset& a);

/// min over x of max over elements U containing x of phi_U(x).
/// Error(NotACover) when the union misses a point.
Extended lebesgue_number(const std::vector<Subset>& cover);

/// Exact maximum element diameter; Error(EmptySet) on an empty element.
Rational mesh(const std::vector<Subset>& cover);

/// Max over x of a greedy maximal eps-separated subset of the closed r-ball.
std::size_t capacity(const FiniteMetricSpace& space, const Rational& r, const Rational& eps);

/// First triple (x, y, z) with d(x,z) > d(x,y) + d(y,z), or symmetry/zero
/// violations reported as (x, y, y).
std::optional<std::array<PointId, 3>> find_metric_violation(const FiniteMetricSpace& space);

}  // namespace coarse
