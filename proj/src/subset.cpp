#include "coarse/subset.hpp"

#include "coarse/error.hpp"

#include <algorithm>

namespace coarse {

Subset::Subset(SpacePtr space) : space_(std::move(space)), bits_(space_->size()) {}

Subset::Subset(SpacePtr space, std::vector<PointId> members) : space_(std::move(space)), bits_(space_->size()) {
  for (PointId p : members) {
    if (p >= bits_.size()) throw Error(ErrorCode::InvalidArgument, "subset member out of range");
    bits_.set(p);
  }
  members_.reserve(bits_.count());
  for (auto i = bits_.find_first(); i != boost::dynamic_bitset<>::npos; i = bits_.find_next(i))
    members_.push_back(static_cast<PointId>(i));
}

Subset::Subset(SpacePtr space, boost::dynamic_bitset<> bits) : space_(std::move(space)), bits_(std::move(bits)) {
  if (bits_.size() != space_->size()) throw Error(ErrorCode::InvalidArgument, "bitmap size mismatch");
  members_.reserve(bits_.count());
  for (auto i = bits_.find_first(); i != boost::dynamic_bitset<>::npos; i = bits_.find_next(i))
    members_.push_back(static_cast<PointId>(i));
}

Subset Subset::all(SpacePtr space) {
  boost::dynamic_bitset<> bits(space->size());
  bits.set();
  return Subset(std::move(space), std::move(bits));
}

Subset Subset::of_labels(SpacePtr space, std::initializer_list<std::string_view> labels) {
  std::vector<PointId> ids;
  for (auto l : labels) ids.push_back(space->index_of(l));
  return Subset(std::move(space), std::move(ids));
}

bool Subset::is_subset_of(const Subset& other) const { return bits_.is_subset_of(other.bits_); }

bool Subset::intersects(const Subset& other) const { return bits_.intersects(other.bits_); }

Subset Subset::complement() const { return Subset(space_, ~bits_); }

Subset Subset::minus(const Subset& other) const { return Subset(space_, bits_ - other.bits_); }

Subset Subset::united(const Subset& other) const { return Subset(space_, bits_ | other.bits_); }

}  // namespace coarse
