#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <vector>

#include "hjb/types.hpp"

namespace hjb {

enum class MergeNorm { Euclidean, Max };

inline double merge_distance(MergeNorm norm, const double* a, const double* b, int dim) {
  if (norm == MergeNorm::Euclidean) {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) {
      const double d = a[i] - b[i];
      s += d * d;
    }
    return std::sqrt(s);
  }
  double m = 0.0;
  for (int i = 0; i < dim; ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Uniform spatial hash over the points of one tree level, cell size equal
/// to the merge radius. Query returns the lowest-index point within radius,
/// matching a brute-force first-match scan; radius == 0 degenerates to
/// exact-duplicate detection keyed on coordinate bit patterns.
///
/// Flat table with intrusive chains: buckets are head indices into a next[]
/// array, so inserting the millions of nodes of a large level allocates
/// nothing per node. Distinct cells falling into one bucket only add
/// distance checks, never wrong results.
class SpatialHash {
 public:
  SpatialHash(int dim, double radius, MergeNorm norm, std::int64_t expected = 64)
      : dim_(dim), radius_(radius), norm_(norm) {
    std::size_t cap = 64;
    while (cap < static_cast<std::size_t>(2 * expected)) cap <<= 1;
    heads_.assign(cap, -1);
    mask_ = cap - 1;
  }

  /// Points must be inserted with dense indices 0, 1, 2, ...
  void insert(const double* x, std::int32_t index) {
    if (next_.size() <= static_cast<std::size_t>(index)) {
      next_.resize(static_cast<std::size_t>(index) + 1, -1);
      keys_.resize(static_cast<std::size_t>(index) + 1, 0);
    }
    if (2 * (count_ + 1) > heads_.size()) grow();
    const std::uint64_t key = key_of(x);
    keys_[static_cast<std::size_t>(index)] = key;
    const std::size_t slot = key & mask_;
    next_[static_cast<std::size_t>(index)] = heads_[slot];
    heads_[slot] = index;
    count_ = std::max(count_, static_cast<std::size_t>(index) + 1);
  }

  /// Lowest index within radius of x among inserted points; coords gives
  /// random access to point i as coords + i*dim. Returns -1 if none.
  std::int32_t find_first_within(const double* x, const double* coords) const {
    std::int32_t best = -1;
    if (radius_ == 0.0) {
      scan_chain(key_of(x), x, coords, best);
      return best;
    }
    std::int64_t cell[kMaxDim];
    for (int i = 0; i < dim_; ++i) cell[i] = cell_index(x[i]);
    std::int64_t probe[kMaxDim];
    scan_neighbors(0, cell, probe, x, coords, best);
    return best;
  }

 private:
  std::int64_t cell_index(double v) const {
    const double c = std::floor(v / radius_);
    if (c >= 9.2e18) return std::numeric_limits<std::int64_t>::max();
    if (c <= -9.2e18) return std::numeric_limits<std::int64_t>::min();
    return static_cast<std::int64_t>(c);
  }

  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  std::uint64_t key_of(const double* x) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ull;
    for (int i = 0; i < dim_; ++i) {
      std::uint64_t k;
      if (radius_ == 0.0) {
        const double v = x[i] == 0.0 ? 0.0 : x[i];  // collapse -0.0 and +0.0
        std::memcpy(&k, &v, sizeof(k));
      } else {
        k = static_cast<std::uint64_t>(cell_index(x[i]));
      }
      h ^= mix(k) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }

  std::uint64_t key_of_cell(const std::int64_t* cell) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ull;
    for (int i = 0; i < dim_; ++i) {
      h ^= mix(static_cast<std::uint64_t>(cell[i])) + 0x9e3779b97f4a7c15ull + (h << 6) +
           (h >> 2);
    }
    return h;
  }

  void scan_chain(std::uint64_t key, const double* x, const double* coords,
                  std::int32_t& best) const {
    for (std::int32_t idx = heads_[key & mask_]; idx >= 0;
         idx = next_[static_cast<std::size_t>(idx)]) {
      if (best >= 0 && idx >= best) continue;
      const double* y = coords + static_cast<std::size_t>(idx) * dim_;
      if (radius_ == 0.0) {
        bool eq = true;
        for (int i = 0; i < dim_ && eq; ++i) eq = x[i] == y[i];
        if (eq) best = idx;
      } else if (merge_distance(norm_, x, y, dim_) <= radius_) {
        best = idx;
      }
    }
  }

  void scan_neighbors(int axis, const std::int64_t* cell, std::int64_t* probe, const double* x,
                      const double* coords, std::int32_t& best) const {
    if (axis == dim_) {
      scan_chain(key_of_cell(probe), x, coords, best);
      return;
    }
    for (std::int64_t d = -1; d <= 1; ++d) {
      probe[axis] = cell[axis] + d;
      scan_neighbors(axis + 1, cell, probe, x, coords, best);
    }
  }

  void grow() {
    heads_.assign(heads_.size() * 2, -1);
    mask_ = heads_.size() - 1;
    // re-chain from the stored keys; chain order changes but the min-index
    // scan is order-independent
    for (std::size_t i = 0; i < count_; ++i) {
      const std::size_t slot = keys_[i] & mask_;
      next_[i] = heads_[slot];
      heads_[slot] = static_cast<std::int32_t>(i);
    }
  }

  int dim_;
  double radius_;
  MergeNorm norm_;
  std::size_t mask_ = 0;
  std::size_t count_ = 0;
  std::vector<std::int32_t> heads_;
  std::vector<std::int32_t> next_;
  std::vector<std::uint64_t> keys_;
};

}  // namespace hjb
