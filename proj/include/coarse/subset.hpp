#pragma once

#include "coarse/metric_space.hpp"

#include <boost/dynamic_bitset.hpp>

#include <initializer_list>
#include <span>
#include <vector>

namespace coarse {

/// A subset of a FiniteMetricSpace: sorted member list plus a membership
/// bitmap over the whole space.
class Subset {
public:
  Subset() = default;
  explicit Subset(SpacePtr space);
  Subset(SpacePtr space, std::vector<PointId> members);
  Subset(SpacePtr space, boost::dynamic_bitset<> bits);

  static Subset all(SpacePtr space);
  /// Members given by label.
  static Subset of_labels(SpacePtr space, std::initializer_list<std::string_view> labels);

  const SpacePtr& space() const noexcept { return space_; }
  const FiniteMetricSpace& metric() const { return *space_; }

  bool contains(PointId p) const { return p < bits_.size() && bits_.test(p); }
  std::size_t size() const noexcept { return members_.size(); }
  bool empty() const noexcept { return members_.empty(); }
  std::span<const PointId> members() const noexcept { return members_; }
  auto begin() const noexcept { return members_.begin(); }
  auto end() const noexcept { return members_.end(); }
  const boost::dynamic_bitset<>& bits() const noexcept { return bits_; }

  bool is_subset_of(const Subset& other) const;
  bool intersects(const Subset& other) const;
  bool is_everything() const noexcept { return space_ && members_.size() == space_->size(); }

  Subset complement() const;
  Subset minus(const Subset& other) const;
  Subset united(const Subset& other) const;

  friend bool operator==(const Subset& a, const Subset& b) { return a.bits_ == b.bits_; }

private:
  SpacePtr space_;
  boost::dynamic_bitset<> bits_;
  std::vector<PointId> members_;
};

}  // namespace coarse
