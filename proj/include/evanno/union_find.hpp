#pragma once

#include <cstddef>
#include <numeric>
#include <vector>

namespace evanno {

// Disjoint-set forest with path halving and union by size.
class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) noexcept {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  // Returns false if x and y were already connected.
  bool unite(std::size_t x, std::size_t y) noexcept {
    x = find(x);
    y = find(y);
    if (x == y) return false;
    if (size_[x] < size_[y]) std::swap(x, y);
    parent_[y] = x;
    size_[x] += size_[y];
    return true;
  }

  bool connected(std::size_t x, std::size_t y) noexcept { return find(x) == find(y); }

  std::size_t size() const noexcept { return parent_.size(); }

  // Components as index lists. Each list is ascending and the lists are
  // ordered by their smallest element.
  std::vector<std::vector<std::size_t>> components() {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> slot(parent_.size(), npos);
    for (std::size_t i = 0; i < parent_.size(); ++i) {
      const auto r = find(i);
      if (slot[r] == npos) {
        slot[r] = out.size();
        out.emplace_back();
      }
      out[slot[r]].push_back(i);
    }
    return out;
  }

 private:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

}  // namespace evanno
