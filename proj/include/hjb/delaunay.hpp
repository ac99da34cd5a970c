#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "hjb/types.hpp"

namespace hjb::delaunay {

/// Thrown when the site set admits no triangle (fewer than 3 distinct
/// points, or all collinear).
class DegenerateSites : public SolverError {
 public:
  explicit DegenerateSites(const std::string& what)
      : SolverError(what + " (use the inverse-distance method instead)") {}
};

namespace detail {

struct IPoint {
  std::int64_t x = 0;
  std::int64_t y = 0;
};

inline int sign_of(__int128 v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

/// Sign of the cross product (b-a) x (c-a); exact for |coords| < 2^30.
inline int orient(const IPoint& a, const IPoint& b, const IPoint& c) {
  const __int128 det = static_cast<__int128>(b.x - a.x) * (c.y - a.y) -
                       static_cast<__int128>(b.y - a.y) * (c.x - a.x);
  return sign_of(det);
}

/// Positive iff d lies strictly inside the circumcircle of the CCW triangle
/// (a,b,c); exact for |coords| <= 3*2^26.
inline int incircle(const IPoint& a, const IPoint& b, const IPoint& c, const IPoint& d) {
  const __int128 adx = a.x - d.x, ady = a.y - d.y;
  const __int128 bdx = b.x - d.x, bdy = b.y - d.y;
  const __int128 cdx = c.x - d.x, cdy = c.y - d.y;
  const __int128 alift = adx * adx + ady * ady;
  const __int128 blift = bdx * bdx + bdy * bdy;
  const __int128 clift = cdx * cdx + cdy * cdy;
  const __int128 det = alift * (bdx * cdy - cdx * bdy) + blift * (cdx * ady - adx * cdy) +
                       clift * (adx * bdy - bdx * ady);
  return sign_of(det);
}

/// 50-bit Morton code used to spatially sort the insertion order.
inline std::uint64_t morton(std::int64_t x, std::int64_t y) {
  const std::uint64_t a = static_cast<std::uint64_t>(x + (1ll << 24));
  const std::uint64_t b = static_cast<std::uint64_t>(y + (1ll << 24));
  std::uint64_t out = 0;
  for (int i = 0; i < 25; ++i) {
    out |= ((a >> i) & 1ull) << (2 * i);
    out |= ((b >> i) & 1ull) << (2 * i + 1);
  }
  return out;
}

}  // namespace detail

/// Incremental Delaunay triangulation of a 2-d point set.
///
/// Input coordinates are snapped onto a 2^24-wide integer lattice spanning
/// the bounding box, and every orientation / in-circle decision is made with
/// exact 128-bit integer arithmetic. That keeps the structure valid on the
/// highly degenerate (cocircular, collinear) point sets produced by lattice
/// dynamics, where naive floating-point predicates fail.
class Triangulation {
 public:
  /// pts: 2-strided (x0,y0,x1,y1,...). Snap-coincident points collapse onto
  /// the first occurrence.
  explicit Triangulation(const std::vector<double>& pts) {
    const std::size_t n = pts.size() / 2;
    if (n < 3) throw DegenerateSites("delaunay: need at least 3 sites");
    double lo_x = pts[0], hi_x = pts[0], lo_y = pts[1], hi_y = pts[1];
    for (std::size_t i = 0; i < n; ++i) {
      lo_x = std::min(lo_x, pts[2 * i]);
      hi_x = std::max(hi_x, pts[2 * i]);
      lo_y = std::min(lo_y, pts[2 * i + 1]);
      hi_y = std::max(hi_y, pts[2 * i + 1]);
    }
    if (!std::isfinite(lo_x) || !std::isfinite(hi_x) || !std::isfinite(lo_y) ||
        !std::isfinite(hi_y))
      throw DegenerateSites("delaunay: non-finite site coordinates");
    center_x_ = 0.5 * (lo_x + hi_x);
    center_y_ = 0.5 * (lo_y + hi_y);
    const double extent = std::max(hi_x - lo_x, hi_y - lo_y);
    scale_ = extent > 0.0 ? (static_cast<double>(1ll << 23) / extent) : 1.0;

    // Snap and collapse coincident lattice points.
    std::unordered_map<std::uint64_t, std::int32_t> seen;
    seen.reserve(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
      const detail::IPoint q = snap(pts[2 * i], pts[2 * i + 1]);
      const std::uint64_t key = pack(q);
      auto [it, inserted] = seen.emplace(key, static_cast<std::int32_t>(verts_.size()));
      if (inserted) {
        verts_.push_back(q);
        site_of_vertex_.push_back(static_cast<std::int32_t>(i));
      }
      vertex_of_site_.push_back(it->second);
    }
    n_real_ = static_cast<std::int32_t>(verts_.size());
    if (n_real_ < 3) throw DegenerateSites("delaunay: fewer than 3 distinct sites");

    // Enclosing triangle; real points live in [-2^23, 2^23]^2.
    const std::int64_t big = 3ll << 26;
    verts_.push_back({0, big});
    verts_.push_back({-big, -big});
    verts_.push_back({big, -big});
    tris_.push_back(Tri{{n_real_, n_real_ + 1, n_real_ + 2}, {-1, -1, -1}});

    // Morton-sorted insertion keeps walks short and flip counts bounded.
    std::vector<std::int32_t> order(static_cast<std::size_t>(n_real_));
    for (std::int32_t i = 0; i < n_real_; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
      return detail::morton(verts_[static_cast<std::size_t>(a)].x,
                            verts_[static_cast<std::size_t>(a)].y) <
             detail::morton(verts_[static_cast<std::size_t>(b)].x,
                            verts_[static_cast<std::size_t>(b)].y);
    });
    std::int32_t hint = 0;
    for (std::int32_t v : order) hint = insert(v, hint);

    bool any_real = false;
    for (std::size_t t = 0; t < tris_.size(); ++t)
      if (!is_super(static_cast<std::int32_t>(t))) {
        any_real = true;
        break;
      }
    if (!any_real) throw DegenerateSites("delaunay: all sites collinear");
  }

  /// Site indices (into the original input) of the triangle containing q, or
  /// nullopt when q lies outside the convex hull of the sites.
  std::optional<std::array<std::int32_t, 3>> locate_sites(double qx, double qy) const {
    const detail::IPoint q = snap_clamped(qx, qy);
    std::int32_t t = walk(q, 0);
    if (t >= 0 && is_super(t)) {
      // the walk may stop in an outer flank when q sits exactly on a hull
      // edge; hand such queries to the interior neighbor
      t = hull_edge_rescue(t, q);
    }
    if (t < 0 || is_super(t)) return std::nullopt;
    const Tri& tri = tris_[static_cast<std::size_t>(t)];
    return std::array<std::int32_t, 3>{site_of_vertex_[static_cast<std::size_t>(tri.v[0])],
                                       site_of_vertex_[static_cast<std::size_t>(tri.v[1])],
                                       site_of_vertex_[static_cast<std::size_t>(tri.v[2])]};
  }

  /// All triangles as site-index triples (supertriangle excluded).
  std::vector<std::array<std::int32_t, 3>> triangles() const {
    std::vector<std::array<std::int32_t, 3>> out;
    for (std::size_t t = 0; t < tris_.size(); ++t) {
      if (is_super(static_cast<std::int32_t>(t))) continue;
      const Tri& tri = tris_[t];
      out.push_back({site_of_vertex_[static_cast<std::size_t>(tri.v[0])],
                     site_of_vertex_[static_cast<std::size_t>(tri.v[1])],
                     site_of_vertex_[static_cast<std::size_t>(tri.v[2])]});
    }
    return out;
  }

  std::int32_t distinct_sites() const { return n_real_; }

 private:
  struct Tri {
    std::int32_t v[3];  // CCW vertices
    std::int32_t n[3];  // n[i]: triangle across the edge opposite v[i]
  };

  static std::uint64_t pack(const detail::IPoint& p) {
    return (static_cast<std::uint64_t>(p.x + (1ll << 24)) << 26) ^
           static_cast<std::uint64_t>(p.y + (1ll << 24));
  }

  detail::IPoint snap(double x, double y) const {
    return {static_cast<std::int64_t>(std::llround((x - center_x_) * scale_)),
            static_cast<std::int64_t>(std::llround((y - center_y_) * scale_))};
  }

  detail::IPoint snap_clamped(double x, double y) const {
    const double lim = static_cast<double>(1ll << 24);
    const double sx = std::clamp((x - center_x_) * scale_, -lim, lim);
    const double sy = std::clamp((y - center_y_) * scale_, -lim, lim);
    return {static_cast<std::int64_t>(std::llround(sx)),
            static_cast<std::int64_t>(std::llround(sy))};
  }

  bool is_super(std::int32_t t) const {
    const Tri& tri = tris_[static_cast<std::size_t>(t)];
    return tri.v[0] >= n_real_ || tri.v[1] >= n_real_ || tri.v[2] >= n_real_;
  }

  const detail::IPoint& vp(std::int32_t v) const { return verts_[static_cast<std::size_t>(v)]; }

  bool is_super_vertex(std::int32_t v) const { return v >= n_real_; }

  /// Should the edge opposite p in the CCW triangle (p, a, b) flip toward
  /// the neighbor apex q? The three enclosing-triangle vertices act as
  /// points at infinity: a finite circumcircle never contains them, and a
  /// "circumcircle" through one of them degenerates to the halfplane left
  /// of its two finite vertices. That keeps hull triangles intact no matter
  /// how large a near-collinear circumcircle gets.
  bool flip_test(std::int32_t p, std::int32_t a, std::int32_t b, std::int32_t q) const {
    const int supers = static_cast<int>(is_super_vertex(p)) + is_super_vertex(a) +
                       is_super_vertex(b);
    if (supers == 0) {
      if (is_super_vertex(q)) return false;
      return detail::incircle(vp(p), vp(a), vp(b), vp(q)) > 0;
    }
    if (supers == 1) {
      // finite pair in cyclic order, the infinite vertex third
      std::int32_t u, v;
      if (is_super_vertex(p)) {
        u = a;
        v = b;
      } else if (is_super_vertex(a)) {
        u = b;
        v = p;
      } else {
        u = p;
        v = a;
      }
      return detail::orient(vp(u), vp(v), vp(q)) > 0;
    }
    return false;  // two infinite vertices: the outer scaffold never flips
  }

  /// Visibility walk from `start` to the triangle containing q. Exact
  /// predicates make the walk deterministic; a step cap guards against the
  /// (never observed) pathological cycle, falling back to a full scan.
  std::int32_t walk(const detail::IPoint& q, std::int32_t start) const {
    std::int32_t t = start;
    const std::size_t cap = 4 * tris_.size() + 64;
    for (std::size_t steps = 0; steps < cap; ++steps) {
      const Tri& tri = tris_[static_cast<std::size_t>(t)];
      std::int32_t next = -1;
      for (int k = 0; k < 3; ++k) {
        const int e = static_cast<int>((steps + static_cast<std::size_t>(k)) % 3);
        const std::int32_t a = tri.v[(e + 1) % 3];
        const std::int32_t b = tri.v[(e + 2) % 3];
        if (detail::orient(vp(a), vp(b), q) < 0) {
          next = tri.n[e];
          break;
        }
      }
      if (next < 0) return t;
      t = next;
    }
    for (std::size_t t2 = 0; t2 < tris_.size(); ++t2) {
      const Tri& tri = tris_[t2];
      bool inside = true;
      for (int e = 0; e < 3 && inside; ++e)
        inside = detail::orient(vp(tri.v[(e + 1) % 3]), vp(tri.v[(e + 2) % 3]), q) >= 0;
      if (inside) return static_cast<std::int32_t>(t2);
    }
    return -1;
  }

  /// If q lies on the finite edge of the flank triangle t, returns the real
  /// triangle across that edge; -1 otherwise.
  std::int32_t hull_edge_rescue(std::int32_t t, const detail::IPoint& q) const {
    const Tri& tri = tris_[static_cast<std::size_t>(t)];
    for (int e = 0; e < 3; ++e) {
      const std::int32_t u = tri.v[(e + 1) % 3];
      const std::int32_t v = tri.v[(e + 2) % 3];
      if (u >= n_real_ || v >= n_real_) continue;
      if (detail::orient(vp(u), vp(v), q) != 0) continue;
      const __int128 dx = vp(v).x - vp(u).x, dy = vp(v).y - vp(u).y;
      const __int128 proj = dx * (q.x - vp(u).x) + dy * (q.y - vp(u).y);
      if (proj < 0 || proj > dx * dx + dy * dy) continue;  // beyond the segment
      return tri.n[e];
    }
    return -1;
  }

  int edge_in(std::int32_t t, std::int32_t other) const {
    const Tri& tri = tris_[static_cast<std::size_t>(t)];
    for (int e = 0; e < 3; ++e)
      if (tri.n[e] == other) return e;
    throw SolverError("delaunay: broken adjacency");
  }

  void set_neighbor(std::int32_t t, std::int32_t was, std::int32_t now) {
    if (t < 0) return;
    tris_[static_cast<std::size_t>(t)].n[edge_in(t, was)] = now;
  }

  /// Inserts vertex v; returns a triangle incident to it (walk hint).
  std::int32_t insert(std::int32_t v, std::int32_t hint) {
    const detail::IPoint& p = vp(v);
    const std::int32_t t = walk(p, hint);
    const Tri tri = tris_[static_cast<std::size_t>(t)];

    int on_edge = -1;
    int zeros = 0;
    for (int e = 0; e < 3; ++e) {
      if (detail::orient(vp(tri.v[(e + 1) % 3]), vp(tri.v[(e + 2) % 3]), p) == 0) {
        on_edge = e;
        ++zeros;
      }
    }
    if (zeros >= 2) return t;  // coincident with an existing vertex; deduped earlier

    if (on_edge < 0) {
      split_interior(t, v);
    } else {
      split_edge(t, on_edge, v);
    }
    return t;  // slot t ends up incident to v in both split paths
  }

  void split_interior(std::int32_t t, std::int32_t p) {
    const Tri old = tris_[static_cast<std::size_t>(t)];
    const std::int32_t tb = static_cast<std::int32_t>(tris_.size());
    const std::int32_t tc = tb + 1;
    // A reuses slot t: (p, v1, v2); B: (p, v2, v0); C: (p, v0, v1).
    tris_[static_cast<std::size_t>(t)] = Tri{{p, old.v[1], old.v[2]}, {old.n[0], tb, tc}};
    tris_.push_back(Tri{{p, old.v[2], old.v[0]}, {old.n[1], tc, t}});
    tris_.push_back(Tri{{p, old.v[0], old.v[1]}, {old.n[2], t, tb}});
    set_neighbor(old.n[1], t, tb);
    set_neighbor(old.n[2], t, tc);
    legalize(t, 0);
    legalize(tb, 0);
    legalize(tc, 0);
  }

  void split_edge(std::int32_t t, int e, std::int32_t p) {
    const Tri old = tris_[static_cast<std::size_t>(t)];
    const std::int32_t t2 = old.n[e];
    if (t2 < 0) throw SolverError("delaunay: point on boundary of the enclosing triangle");
    const int e2 = edge_in(t2, t);
    const Tri old2 = tris_[static_cast<std::size_t>(t2)];
    const std::int32_t c = old.v[e];
    const std::int32_t a = old.v[(e + 1) % 3];
    const std::int32_t b = old.v[(e + 2) % 3];
    const std::int32_t d = old2.v[e2];

    const std::int32_t p2 = static_cast<std::int32_t>(tris_.size());
    const std::int32_t p4 = p2 + 1;
    // P1 (slot t): (c, a, p); P2: (c, p, b); P3 (slot t2): (d, b, p); P4: (d, p, a).
    tris_[static_cast<std::size_t>(t)] = Tri{{c, a, p}, {p4, p2, old.n[(e + 2) % 3]}};
    tris_.push_back(Tri{{c, p, b}, {t2, old.n[(e + 1) % 3], t}});
    tris_[static_cast<std::size_t>(t2)] = Tri{{d, b, p}, {p2, p4, old2.n[(e2 + 2) % 3]}};
    tris_.push_back(Tri{{d, p, a}, {t, old2.n[(e2 + 1) % 3], t2}});
    set_neighbor(old.n[(e + 1) % 3], t, p2);
    set_neighbor(old2.n[(e2 + 1) % 3], t2, p4);
    legalize(t, 2);
    legalize(p2, 1);
    legalize(t2, 2);
    legalize(p4, 1);
  }

  /// Lawson legalization of the edge opposite vertex e of t (which holds the
  /// freshly inserted point). Strict in-circle keeps cocircular ties stable.
  /// Iterative with an explicit stack; cascades on large lattice levels can
  /// run deep.
  void legalize(std::int32_t t0, int e0) {
    legalize_stack_.clear();
    legalize_stack_.push_back({t0, e0});
    while (!legalize_stack_.empty()) {
      const auto [t, e] = legalize_stack_.back();
      legalize_stack_.pop_back();
      const std::int32_t to = tris_[static_cast<std::size_t>(t)].n[e];
      if (to < 0) continue;
      const int eo = edge_in(to, t);
      const Tri tri = tris_[static_cast<std::size_t>(t)];
      const Tri trio = tris_[static_cast<std::size_t>(to)];
      const std::int32_t p = tri.v[e];
      const std::int32_t a = tri.v[(e + 1) % 3];
      const std::int32_t b = tri.v[(e + 2) % 3];
      const std::int32_t q = trio.v[eo];
      if (!flip_test(p, a, b, q)) continue;

      const std::int32_t n_pa = tri.n[(e + 2) % 3];
      const std::int32_t n_bp = tri.n[(e + 1) % 3];
      const std::int32_t n_aq = trio.n[(eo + 1) % 3];  // edge (a,q) is opposite b in `to`
      const std::int32_t n_qb = trio.n[(eo + 2) % 3];  // edge (q,b) is opposite a in `to`

      tris_[static_cast<std::size_t>(t)] = Tri{{p, a, q}, {n_aq, to, n_pa}};
      tris_[static_cast<std::size_t>(to)] = Tri{{p, q, b}, {n_qb, n_bp, t}};
      set_neighbor(n_aq, to, t);
      set_neighbor(n_bp, t, to);
      legalize_stack_.push_back({t, 0});
      legalize_stack_.push_back({to, 0});
    }
  }

  double center_x_ = 0.0, center_y_ = 0.0, scale_ = 1.0;
  std::vector<std::pair<std::int32_t, int>> legalize_stack_;
  std::vector<detail::IPoint> verts_;
  std::vector<std::int32_t> site_of_vertex_;
  std::vector<std::int32_t> vertex_of_site_;
  std::int32_t n_real_ = 0;
  std::vector<Tri> tris_;
};

}  // namespace hjb::delaunay
