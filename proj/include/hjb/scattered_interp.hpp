#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "hjb/delaunay.hpp"
#include "hjb/types.hpp"

namespace hjb {

enum class InterpMethod { DelaunayLinear, InverseDistance, Nearest };

/// Interpolation operator over a scattered site set (one tree level).
///
/// DelaunayLinear (d=2): barycentric-linear value on the containing
/// triangle, inverse-distance fallback outside the hull. InverseDistance:
/// Shepard weights dist^-power over the k nearest sites. Nearest: value of
/// the closest site. Exact duplicates collapse onto the first occurrence,
/// and a query exactly at a site always returns that site's value.
class ScatteredInterpolant {
 public:
  static ScatteredInterpolant delaunay_linear(const std::vector<double>& coords, int dim,
                                              const std::vector<double>& values) {
    if (dim != 2)
      throw std::invalid_argument("ScatteredInterpolant: DelaunayLinear requires d == 2");
    ScatteredInterpolant s(coords, dim, values, InterpMethod::DelaunayLinear, dim + 1, 2.0);
    s.triangulation_ = std::make_shared<delaunay::Triangulation>(s.coords_);
    return s;
  }

  static ScatteredInterpolant inverse_distance(const std::vector<double>& coords, int dim,
                                               const std::vector<double>& values, int neighbors,
                                               double power) {
    if (neighbors < 1)
      throw std::invalid_argument("ScatteredInterpolant: needs at least one neighbor");
    if (!(power > 0.0)) throw std::invalid_argument("ScatteredInterpolant: power must be > 0");
    return ScatteredInterpolant(coords, dim, values, InterpMethod::InverseDistance, neighbors,
                                power);
  }

  static ScatteredInterpolant nearest(const std::vector<double>& coords, int dim,
                                      const std::vector<double>& values) {
    return ScatteredInterpolant(coords, dim, values, InterpMethod::Nearest, 1, 2.0);
  }

  InterpMethod method() const { return method_; }
  std::int64_t n_sites() const { return static_cast<std::int64_t>(values_.size()); }
  int dim() const { return dim_; }

  double eval(const Vec& x) const {
    if (x.size() != dim_)
      throw std::invalid_argument("ScatteredInterpolant: query dimension mismatch");
    if (auto hit = exact_site(x.data())) return *hit;
    switch (method_) {
      case InterpMethod::DelaunayLinear: {
        const auto tri = triangulation_->locate_sites(x[0], x[1]);
        if (tri) {
          if (auto v = barycentric(*tri, x)) return *v;
        }
        return idw(x);
      }
      case InterpMethod::InverseDistance:
        return idw(x);
      case InterpMethod::Nearest: {
        std::int64_t best = 0;
        double best_d = dist2(0, x);
        for (std::int64_t i = 1; i < n_sites(); ++i) {
          const double d = dist2(i, x);
          if (d < best_d) {
            best_d = d;
            best = i;
          }
        }
        return values_[static_cast<std::size_t>(best)];
      }
    }
    return 0.0;  // unreachable
  }

 private:
  ScatteredInterpolant(const std::vector<double>& coords, int dim,
                       const std::vector<double>& values, InterpMethod method, int neighbors,
                       double power)
      : dim_(dim), method_(method), neighbors_(neighbors), power_(power) {
    if (dim < 1) throw std::invalid_argument("ScatteredInterpolant: dim must be >= 1");
    const std::size_t n = values.size();
    if (n == 0 || coords.size() != n * static_cast<std::size_t>(dim))
      throw std::invalid_argument("ScatteredInterpolant: sites/values size mismatch");
    coords_.reserve(coords.size());
    values_.reserve(n);
    site_lookup_.reserve(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
      const double* p = coords.data() + i * static_cast<std::size_t>(dim);
      const std::uint64_t key = hash_coords(p);
      bool dup = false;
      auto range = site_lookup_.equal_range(key);
      for (auto it = range.first; it != range.second && !dup; ++it)
        dup = coords_equal(p, it->second);
      if (dup) continue;
      const std::int64_t idx = static_cast<std::int64_t>(values_.size());
      coords_.insert(coords_.end(), p, p + dim);
      values_.push_back(values[i]);
      site_lookup_.emplace(key, idx);
    }
  }

  std::uint64_t hash_coords(const double* p) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ull;
    for (int k = 0; k < dim_; ++k) {
      std::uint64_t bits;
      const double v = p[k] == 0.0 ? 0.0 : p[k];
      std::memcpy(&bits, &v, sizeof(bits));
      bits = (bits ^ (bits >> 30)) * 0xbf58476d1ce4e5b9ull;
      h ^= bits + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }

  bool coords_equal(const double* p, std::int64_t site) const {
    const double* q = coords_.data() + static_cast<std::size_t>(site) * dim_;
    for (int k = 0; k < dim_; ++k)
      if (p[k] != q[k]) return false;
    return true;
  }

  std::optional<double> exact_site(const double* p) const {
    auto range = site_lookup_.equal_range(hash_coords(p));
    for (auto it = range.first; it != range.second; ++it)
      if (coords_equal(p, it->second)) return values_[static_cast<std::size_t>(it->second)];
    return std::nullopt;
  }

  double dist2(std::int64_t site, const Vec& x) const {
    const double* q = coords_.data() + static_cast<std::size_t>(site) * dim_;
    double s = 0.0;
    for (int k = 0; k < dim_; ++k) {
      const double d = x[k] - q[k];
      s += d * d;
    }
    return s;
  }

  /// Weights computed from the exact double coordinates of the located
  /// triangle; affine data is reproduced to machine precision even when the
  /// located triangle is off by one snapping cell.
  std::optional<double> barycentric(const std::array<std::int32_t, 3>& tri, const Vec& x) const {
    const double* p0 = coords_.data() + static_cast<std::size_t>(tri[0]) * 2;
    const double* p1 = coords_.data() + static_cast<std::size_t>(tri[1]) * 2;
    const double* p2 = coords_.data() + static_cast<std::size_t>(tri[2]) * 2;
    const double ax = p1[0] - p0[0], ay = p1[1] - p0[1];
    const double bx = p2[0] - p0[0], by = p2[1] - p0[1];
    const double det = ax * by - ay * bx;
    if (det == 0.0) return std::nullopt;
    const double qx = x[0] - p0[0], qy = x[1] - p0[1];
    const double w1 = (qx * by - qy * bx) / det;
    const double w2 = (ax * qy - ay * qx) / det;
    const double w0 = 1.0 - w1 - w2;
    return w0 * values_[static_cast<std::size_t>(tri[0])] +
           w1 * values_[static_cast<std::size_t>(tri[1])] +
           w2 * values_[static_cast<std::size_t>(tri[2])];
  }

  double idw(const Vec& x) const {
    const std::int64_t n = n_sites();
    const int k = static_cast<int>(std::min<std::int64_t>(neighbors_, n));
    std::vector<std::pair<double, std::int64_t>> scratch;
    scratch.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) scratch.push_back({dist2(i, x), i});
    std::partial_sort(scratch.begin(), scratch.begin() + k, scratch.end());
    double wsum = 0.0, vsum = 0.0;
    for (int i = 0; i < k; ++i) {
      const auto [d2, idx] = scratch[static_cast<std::size_t>(i)];
      const double d = std::sqrt(d2);
      if (d < 1e-300) return values_[static_cast<std::size_t>(idx)];
      const double w = std::pow(d, -power_);
      wsum += w;
      vsum += w * values_[static_cast<std::size_t>(idx)];
    }
    return vsum / wsum;
  }

  int dim_;
  InterpMethod method_;
  int neighbors_;
  double power_;
  std::vector<double> coords_;
  std::vector<double> values_;
  std::unordered_multimap<std::uint64_t, std::int64_t> site_lookup_;
  std::shared_ptr<const delaunay::Triangulation> triangulation_;
};

/// Preferred interpolant for a site set: triangulation-based for planar
/// data, inverse-distance when that is degenerate or d != 2.
inline ScatteredInterpolant make_interpolant(const std::vector<double>& coords, int dim,
                                             const std::vector<double>& values) {
  if (dim == 2) {
    try {
      return ScatteredInterpolant::delaunay_linear(coords, dim, values);
    } catch (const delaunay::DegenerateSites&) {
      // fall through to IDW
    }
  }
  return ScatteredInterpolant::inverse_distance(coords, dim, values, dim + 1, 2.0);
}

}  // namespace hjb
