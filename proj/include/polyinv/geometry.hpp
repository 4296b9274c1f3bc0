#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "polyinv/cone_min_norm.hpp"
#include "polyinv/errors.hpp"
#include "polyinv/linalg.hpp"
#include "polyinv/polytope.hpp"
#include "polyinv/special.hpp"

namespace polyinv {

inline constexpr std::size_t kMinDim = 2;
inline constexpr std::size_t kMaxDim = 8;

/// {x : ||x||_inf <= 1}; vertices in binary-counting sign order.
inline Polytope unit_box(std::size_t n) {
  if (n < kMinDim || n > kMaxDim) throw ArgumentError("unit_box: dimension must be in [2, 8]");
  std::vector<Vec> verts;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    Vec v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = (mask >> (n - 1 - i)) & 1 ? 1.0 : -1.0;
    verts.push_back(v);
  }
  std::vector<Vec> facets;
  for (std::size_t i = 0; i < n; ++i) {
    Vec h(n, 0.0);
    h[i] = 1.0;
    facets.push_back(h);
    h[i] = -1.0;
    facets.push_back(h);
  }
  return Polytope::from_representation(n, std::move(verts), std::move(facets));
}

/// Minkowski gauge: max(0, max_f h_f^T x).
inline double gauge(const Polytope& s, std::span<const double> x) {
  if (x.size() != s.dim()) throw ArgumentError("gauge: dimension mismatch");
  double g = 0.0;
  for (const Vec& h : s.facets()) g = std::max(g, dot(h, x));
  return g;
}

/// factor * S.
inline Polytope scale_polytope(const Polytope& s, double factor) {
  if (!(factor > 0.0)) throw ArgumentError("scale_polytope: factor must be positive");
  std::vector<Vec> v, f;
  for (const Vec& x : s.vertices()) v.push_back(scaled(x, factor));
  for (const Vec& h : s.facets()) f.push_back(scaled(h, 1.0 / factor));
  return Polytope::from_representation(s.dim(), std::move(v), std::move(f), s.tags());
}

/// conv(S u points). `tags` (optional, parallel to points) label the vertices
/// the points create.
inline Polytope convex_hull_add(const Polytope& s, std::span<const Vec> points,
                                std::span<const std::int64_t> tags = {}) {
  if (!tags.empty() && tags.size() != points.size())
    throw ArgumentError("convex_hull_add: tag count mismatch");
  std::vector<std::size_t> outside;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != s.dim()) throw ArgumentError("convex_hull_add: dimension mismatch");
    if (!all_finite(points[i])) throw ArgumentError("convex_hull_add: non-finite point");
    if (gauge(s, points[i]) > 1.0 + 1e-12) outside.push_back(i);
  }
  if (outside.empty()) return s;
  detail::HullBuilder b(s);
  for (std::size_t i : outside) b.insert(points[i], tags.empty() ? kNoTag : tags[i]);
  return b.finish();
}

/// gauge(S, p) <= factor for every p (with 1e-12 slack).
inline bool contains_scaled(const Polytope& s, std::span<const Vec> points, double factor) {
  if (!(factor >= 1.0)) throw ArgumentError("contains_scaled: factor must be >= 1");
  return std::all_of(points.begin(), points.end(),
                     [&](const Vec& p) { return gauge(s, p) <= factor + 1e-12; });
}

/// Largest lambda with lambda * outer contained in inner.
inline double inclusion_ratio(const Polytope& inner, const Polytope& outer) {
  if (inner.dim() != outer.dim()) throw ArgumentError("inclusion_ratio: dimension mismatch");
  double worst = 0.0;
  for (const Vec& v : outer.vertices()) worst = std::max(worst, gauge(inner, v));
  return 1.0 / worst;
}

/// Every vertex of `inner` has gauge <= 1 + tol with respect to `outer`.
inline bool polytope_subset(const Polytope& inner, const Polytope& outer, double tol = 1e-9) {
  return std::all_of(inner.vertices().begin(), inner.vertices().end(),
                     [&](const Vec& v) { return gauge(outer, v) <= 1.0 + tol; });
}

/// Vertex sets equal up to `tol` (greedy nearest matching).
inline bool same_vertex_set(const Polytope& a, const Polytope& b, double tol = 1e-9) {
  if (a.dim() != b.dim() || a.vertex_count() != b.vertex_count()) return false;
  std::vector<char> used(b.vertex_count(), 0);
  for (const Vec& v : a.vertices()) {
    std::size_t best = b.vertex_count();
    double bd = tol;
    for (std::size_t j = 0; j < b.vertex_count(); ++j) {
      if (used[j]) continue;
      const double d = distance(v, b.vertices()[j]);
      if (d <= bd) {
        bd = d;
        best = j;
      }
    }
    if (best == b.vertex_count()) return false;
    used[best] = 1;
  }
  return true;
}

/// Direction u and half-angle theta of the cone {x : u^T x >= ||x|| ||u|| cos(theta)}.
struct ConeSpec {
  Vec direction;
  double angle = 0.0;

  ConeSpec(Vec u, double theta) : direction(std::move(u)), angle(theta) {
    if (!(theta >= 0.0 && theta <= std::numbers::pi / 2))
      throw ArgumentError("ConeSpec: angle outside [0, pi/2]");
    if (!all_finite(direction) || !(norm2(direction) > 0.0))
      throw ArgumentError("ConeSpec: direction must be finite and nonzero");
  }

  bool contains(std::span<const double> x) const {
    return dot(direction, x) >= std::cos(angle) * norm2(direction) * norm2(x) - 1e-12;
  }
};

/// Facet f of S as an equality plus the bounding inequalities of its neighbors.
inline FacetPiece facet_piece(const Polytope& s, std::size_t f,
                              const std::vector<std::size_t>& neighbors) {
  FacetPiece piece;
  piece.normal = s.facets()[f];
  piece.offset = 1.0;
  piece.bounds = Matrix(neighbors.size(), s.dim());
  piece.bounds_rhs.assign(neighbors.size(), 1.0);
  for (std::size_t r = 0; r < neighbors.size(); ++r)
    for (std::size_t j = 0; j < s.dim(); ++j) piece.bounds(r, j) = s.facets()[neighbors[r]][j];
  return piece;
}

inline FacetPiece facet_piece(const Polytope& s, std::size_t f) {
  return facet_piece(s, f, s.facet_neighbors(f));
}

/// Indices of the facets of S that meet the cone. A facet with a vertex in
/// the cone qualifies at once; the rest are decided with the same
/// cutting-plane lift as the cone-constrained minimum-norm solver.
inline std::vector<std::size_t> facets_in_cone(const Polytope& s, const ConeSpec& cone) {
  if (cone.direction.size() != s.dim()) throw ArgumentError("facets_in_cone: dimension mismatch");
  std::vector<std::size_t> out;
  const double delta = std::cos(cone.angle);
  for (std::size_t f = 0; f < s.facet_count(); ++f) {
    bool hit = false;
    for (std::size_t v : s.facet_vertices()[f])
      if (cone.contains(s.vertices()[v])) {
        hit = true;
        break;
      }
    if (!hit) {
      const ConeMinNormOutcome o = cone_min_norm_solve(facet_piece(s, f), cone.direction, delta);
      hit = o.status != ConeMinNormStatus::infeasible;
    }
    if (hit) out.push_back(f);
  }
  return out;
}

/// Normalized measure of a spherical cap of half-angle theta on S^{n-1}.
inline double cap_measure(double theta, std::size_t n) {
  if (!(theta >= 0.0 && theta <= std::numbers::pi / 2))
    throw ArgumentError("cap_measure: angle outside [0, pi/2]");
  if (n < 2) throw ArgumentError("cap_measure: dimension must be at least 2");
  const double s = std::sin(theta);
  return 0.5 * reg_inc_beta(std::min(1.0, s * s), 0.5 * static_cast<double>(n - 1), 0.5);
}

/// True when the vertex list is closed under negation (within tol).
inline bool is_centrally_symmetric(const Polytope& s, double tol = 1e-9) {
  for (const Vec& v : s.vertices()) {
    const Vec w = negated(v);
    const bool found = std::any_of(s.vertices().begin(), s.vertices().end(),
                                   [&](const Vec& x) { return distance(x, w) <= tol; });
    if (!found) return false;
  }
  return true;
}

}  // namespace polyinv
