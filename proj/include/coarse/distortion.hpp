#pragma once

#include "coarse/embedding.hpp"

#include <optional>
#include <vector>

namespace coarse {

/// Product distances of all pairs at one exact space distance.
struct Bucket {
  Rational distance{0};
  Rational rho1{0};              // min product distance
  Rational rho2{0};              // max product distance
  Rational rho1_regularized{0};  // min over this and every larger bucket
  std::uint64_t pairs = 0;
};

struct PairWitness {
  PointId first = 0;
  PointId second = 0;
  Rational distance{0};
  Rational value{0};  // the measured quantity (tree or product distance)
};

struct ShortnessVerdict {
  std::size_t color = 0;
  std::uint64_t violations = 0;
  Rational worst_margin{0};  // max of tree distance minus space distance
  std::optional<PairWitness> worst;
};

/// Pairs at distance > m_k with a point deeper than d_k in some level-k set.
struct DeepLevel {
  int level = 0;
  Rational bound{1};  // 2^k
  std::uint64_t checked = 0;
  std::uint64_t failures = 0;
  std::optional<PairWitness> weakest;  // smallest product distance seen
};

struct ScopeStats {
  std::uint64_t pairs = 0;
  std::vector<ShortnessVerdict> shortness;
  std::uint64_t lipschitz_violations = 0;
  std::optional<PairWitness> lipschitz_worst;  // largest product distance relative to colors * d
  std::vector<DeepLevel> deep;

  std::uint64_t shortness_violations() const;
  std::uint64_t deep_failures() const;
};

/// Points deeper than d_k in their selected level-k set must sit at offset 2^k.
struct DeepPointCheck {
  std::uint64_t checked = 0;
  std::uint64_t interior_checked = 0;
  struct Failure {
    std::size_t color;
    PointId point;
    int level;
    Rational offset;
    bool interior;
  };
  std::vector<Failure> failures;
};

struct DistortionReport {
  std::size_t colors = 0;
  Rational interior_threshold{0};
  std::vector<PointId> frontier_points;  // points outside the interior
  std::vector<Bucket> buckets;           // all pairs, ascending distance
  std::vector<Bucket> interior_buckets;  // pairs of interior points
  ScopeStats all;
  ScopeStats interior;
  DeepPointCheck deep_points;
  std::uint64_t anchor_conflicts = 0;
  std::uint64_t anchor_shortness = 0;
  std::vector<std::size_t> uncovered;  // per color

  /// Regularized rho1 at t over all pairs: min product distance among pairs
  /// at distance >= t; nullopt when no such pair exists.
  std::optional<Rational> rho1_at(const Rational& t, bool interior_only = false) const;
  std::uint64_t frontier_pairs() const noexcept { return all.pairs - interior.pairs; }
};

DistortionReport distortion_report(const CoverTower& tower, const std::vector<ScaleTree>& trees,
                                   const Embedding& embedding, unsigned workers = 1);

}  // namespace coarse
