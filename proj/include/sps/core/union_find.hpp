#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

namespace sps {

/// Disjoint-set forest with path halving. merge() keeps an explicit
/// survivor so callers control which id absorbs which.
class UnionFind {
 public:
  explicit UnionFind(size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), size_t{0});
  }

  size_t find(size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  /// Attaches the root of `child` under the root of `keep`.
  /// Returns the surviving root.
  size_t merge_into(size_t child, size_t keep) {
    const size_t rc = find(child), rk = find(keep);
    if (rc != rk) parent_[rc] = rk;
    return rk;
  }

 private:
  std::vector<size_t> parent_;
};

}  // namespace sps
