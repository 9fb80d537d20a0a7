#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <utility>
#include <vector>

namespace oclep {

using ItemId = std::uint32_t;

// A set of item identifiers, stored as a sorted unique vector. Used both for
// itemized instances (one item per attribute) and for mined patterns.
class ItemSet {
 public:
  ItemSet() = default;

  explicit ItemSet(std::vector<ItemId> ids) : ids_(std::move(ids)) {
    std::sort(ids_.begin(), ids_.end());
    ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
  }

  ItemSet(std::initializer_list<ItemId> ids) : ItemSet(std::vector<ItemId>(ids)) {}

  // Precondition: ids already strictly increasing.
  static ItemSet from_sorted(std::vector<ItemId> ids) {
    ItemSet s;
    s.ids_ = std::move(ids);
    return s;
  }

  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }

  bool contains(ItemId id) const {
    return std::binary_search(ids_.begin(), ids_.end(), id);
  }

  bool is_subset_of(const ItemSet& other) const {
    return std::includes(other.ids_.begin(), other.ids_.end(), ids_.begin(), ids_.end());
  }

  bool intersects(const ItemSet& other) const {
    auto a = ids_.begin();
    auto b = other.ids_.begin();
    while (a != ids_.end() && b != other.ids_.end()) {
      if (*a < *b) {
        ++a;
      } else if (*b < *a) {
        ++b;
      } else {
        return true;
      }
    }
    return false;
  }

  const std::vector<ItemId>& ids() const { return ids_; }
  auto begin() const { return ids_.begin(); }
  auto end() const { return ids_.end(); }

  friend ItemSet set_difference(const ItemSet& a, const ItemSet& b) {
    std::vector<ItemId> out;
    out.reserve(a.size());
    std::set_difference(a.ids_.begin(), a.ids_.end(), b.ids_.begin(), b.ids_.end(),
                        std::back_inserter(out));
    return ItemSet::from_sorted(std::move(out));
  }

  bool operator==(const ItemSet&) const = default;

  // Lexicographic on the sorted ids; used only for canonical output ordering.
  bool operator<(const ItemSet& other) const { return ids_ < other.ids_; }

 private:
  std::vector<ItemId> ids_;
};

// A pattern is a set of single-attribute conditions; its length is the number
// of conditions.
using Pattern = ItemSet;

}  // namespace oclep
