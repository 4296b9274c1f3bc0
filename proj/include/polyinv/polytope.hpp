#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "polyinv/errors.hpp"
#include "polyinv/linalg.hpp"

namespace polyinv {

/// Relative tolerance of every geometric predicate (facet side tests,
/// incidence, ranks).
inline constexpr double kGeomTol = 1e-9;
/// Hull insertion counts a point as inside while its gauge exceeds 1 by at
/// most this much.
inline constexpr double kNearOutside = 5e-9;
/// Points closer than this to an existing vertex are merged into it.
inline constexpr double kMergeDistance = 1e-10;
/// Tag of vertices that did not come from a tagged insertion.
inline constexpr std::int64_t kNoTag = -1;

namespace detail {
class HullBuilder;
}

/// Convex polytope in R^n with the origin strictly inside, stored both as a
/// vertex list and as facets h^T x <= 1. facet_vertices()[f] lists the
/// vertices tight on facet f (ascending). Each vertex carries an integer tag
/// recording where it came from.
///
/// Values are immutable; hull updates build a new Polytope.
class Polytope {
public:
  Polytope() = default;

  std::size_t dim() const noexcept { return n_; }
  const std::vector<Vec>& vertices() const noexcept { return vertices_; }
  const std::vector<Vec>& facets() const noexcept { return facets_; }
  const std::vector<std::vector<std::size_t>>& facet_vertices() const noexcept {
    return incidence_;
  }
  const std::vector<std::int64_t>& tags() const noexcept { return tags_; }
  std::size_t vertex_count() const noexcept { return vertices_.size(); }
  std::size_t facet_count() const noexcept { return facets_.size(); }

  /// Builds a polytope from both representations. Incidence is recomputed
  /// numerically; throws ValidationError when the two do not describe the
  /// same C-polytope.
  static Polytope from_representation(std::size_t n, std::vector<Vec> vertices,
                                      std::vector<Vec> facets,
                                      std::vector<std::int64_t> tags = {});

  /// conv(points). The origin must lie strictly inside the hull.
  static Polytope from_points(std::size_t n, std::span<const Vec> points,
                              std::span<const std::int64_t> tags = {});

  /// Facets sharing at least n-1 vertices with facet f (superset of the
  /// ridge-adjacent facets).
  std::vector<std::size_t> facet_neighbors(std::size_t f) const;

  /// Empty string when all structural invariants hold, else a description.
  std::string check_invariants() const;

private:
  friend class detail::HullBuilder;

  std::size_t n_ = 0;
  std::vector<Vec> vertices_;
  std::vector<std::int64_t> tags_;
  std::vector<Vec> facets_;
  std::vector<std::vector<std::size_t>> incidence_;
};

namespace detail {

inline bool sorted_contains(const std::vector<std::size_t>& v, std::size_t x) {
  return std::binary_search(v.begin(), v.end(), x);
}

// Incremental hull update in the polar: facets of conv(V) are the vertices
// of {h : v^T h <= 1 for v in V}, so inserting a point adds one constraint
// to the polar and each step is a double-description update. Facets cut off
// by the point die; every ridge between a dying facet and a surviving one
// spawns a facet through the point; facets passing through the point keep
// it as an extra incident vertex. Ridge adjacency uses the rank test
// (shared vertices span an (n-1)-dimensional linear space), which stays
// correct for non-simplicial facets.
class HullBuilder {
public:
  explicit HullBuilder(const Polytope& s) : n_(s.n_) {
    verts_ = s.vertices_;
    tags_ = s.tags_;
    valive_.assign(verts_.size(), 1);
    vfac_.resize(verts_.size());
    for (std::size_t f = 0; f < s.facets_.size(); ++f) {
      facets_.push_back({s.facets_[f], s.incidence_[f], true});
      for (std::size_t v : s.incidence_[f]) vfac_[v].push_back(f);
    }
  }

  /// Inserts p. Returns false when p is already inside (no facet sees it
  /// beyond kNearOutside) or coincides with an existing vertex.
  bool insert(std::span<const double> p, std::int64_t tag) {
    if (p.size() != n_) throw ArgumentError("hull insert: dimension mismatch");
    if (!all_finite(p)) throw ArgumentError("hull insert: non-finite point");

    const std::size_t nf = facets_.size();
    std::vector<char> state(nf, kDead);
    std::vector<double> side(nf, 0.0);
    std::vector<std::size_t> visible, tight;
    for (std::size_t f = 0; f < nf; ++f) {
      if (!facets_[f].alive) continue;
      side[f] = dot(facets_[f].h, p) - 1.0;
      if (side[f] > kGeomTol) {
        state[f] = kVisible;
        visible.push_back(f);
      } else if (side[f] >= -kGeomTol) {
        state[f] = kTight;
        tight.push_back(f);
      } else {
        state[f] = kKept;
      }
    }
    if (visible.empty()) return false;
    for (std::size_t v = 0; v < verts_.size(); ++v)
      if (valive_[v] && distance(verts_[v], p) <= kMergeDistance) return false;

    // Points within kNearOutside of the boundary are counted as inside: the
    // tolerance bands of neighbouring facets can disagree about them, and
    // the outcome would hinge on the insertion history.
    double reach = 0.0;
    for (std::size_t f : visible) reach = std::max(reach, side[f]);
    if (reach <= kNearOutside) return false;
    apply(p, tag, state, side, visible, tight);
    return true;
  }

  /// True when no surviving vertex has a tag matching pred.
  template <class Pred>
  bool vertices_with_tag_gone(Pred pred) const {
    for (std::size_t v = 0; v < verts_.size(); ++v)
      if (valive_[v] && pred(tags_[v])) return false;
    return true;
  }

  Polytope finish() const {
    Polytope out;
    out.n_ = n_;
    std::vector<std::size_t> remap(verts_.size(), SIZE_MAX);
    for (std::size_t v = 0; v < verts_.size(); ++v) {
      if (!valive_[v]) continue;
      remap[v] = out.vertices_.size();
      out.vertices_.push_back(verts_[v]);
      out.tags_.push_back(tags_[v]);
    }
    for (const Facet& f : facets_) {
      if (!f.alive) continue;
      out.facets_.push_back(f.h);
      std::vector<std::size_t> inc;
      inc.reserve(f.inc.size());
      for (std::size_t v : f.inc) inc.push_back(remap[v]);
      out.incidence_.push_back(std::move(inc));
    }
    return out;
  }

private:
  enum : char { kDead, kKept, kVisible, kTight };

  void apply(std::span<const double> p, std::int64_t tag, const std::vector<char>& state,
             const std::vector<double>& side, const std::vector<std::size_t>& visible,
             const std::vector<std::size_t>& tight) {
    const std::size_t nf = facets_.size();
    const std::size_t q = verts_.size();
    verts_.emplace_back(p.begin(), p.end());
    tags_.push_back(tag);
    valive_.push_back(1);
    vfac_.emplace_back();

    std::vector<Facet> created;
    std::vector<std::size_t> count(nf, 0), touched;
    for (std::size_t f : visible) {
      touched.clear();
      for (std::size_t v : facets_[f].inc)
        for (std::size_t g : vfac_[v])
          if (state[g] == kKept && count[g]++ == 0) touched.push_back(g);
      std::sort(touched.begin(), touched.end());
      for (std::size_t g : touched) {
        if (count[g] + 1 >= n_) {
          std::vector<std::size_t> common;
          std::set_intersection(facets_[f].inc.begin(), facets_[f].inc.end(),
                                facets_[g].inc.begin(), facets_[g].inc.end(),
                                std::back_inserter(common));
          if (common.size() + 1 >= n_ && ridge_rank(common) + 1 == n_)
            created.push_back(spawn(f, g, side[f], side[g], std::move(common), q));
        }
        count[g] = 0;
      }
    }

    std::vector<std::size_t> affected;
    for (std::size_t f : visible) {
      facets_[f].alive = false;
      for (std::size_t v : facets_[f].inc) {
        auto& lst = vfac_[v];
        lst.erase(std::remove(lst.begin(), lst.end(), f), lst.end());
        affected.push_back(v);
      }
      facets_[f].inc.clear();
    }
    for (std::size_t f : tight) {
      facets_[f].inc.push_back(q);
      vfac_[q].push_back(f);
    }
    for (Facet& nfct : created) {
      const std::size_t id = facets_.size();
      for (std::size_t v : nfct.inc) vfac_[v].push_back(id);
      facets_.push_back(std::move(nfct));
    }

    std::sort(affected.begin(), affected.end());
    affected.erase(std::unique(affected.begin(), affected.end()), affected.end());
    affected.push_back(q);
    for (std::size_t v : affected) {
      if (!valive_[v]) continue;
      if (vfac_[v].empty() || normal_rank(vfac_[v]) < n_) {
        if (v == q) throw DegeneracyError("hull insert: new point is not a vertex");
        kill_vertex(v);
      }
    }
    for (const Facet& f : facets_)
      if (f.alive && f.inc.size() < n_)
        throw DegeneracyError("hull insert: facet lost its defining vertices");
  }

  struct Facet {
    Vec h;
    std::vector<std::size_t> inc;
    bool alive = true;
  };

  std::size_t ridge_rank(const std::vector<std::size_t>& ids) const {
    std::vector<Vec> rows;
    rows.reserve(ids.size());
    for (std::size_t v : ids) rows.push_back(verts_[v]);
    return rank_of_rows(std::move(rows), kGeomTol);
  }

  std::size_t normal_rank(const std::vector<std::size_t>& fids) const {
    std::vector<Vec> rows;
    rows.reserve(fids.size());
    for (std::size_t f : fids) rows.push_back(facets_[f].h);
    return rank_of_rows(std::move(rows), kGeomTol);
  }

  Facet spawn(std::size_t f, std::size_t g, double sf, double sg,
              std::vector<std::size_t> common, std::size_t q) const {
    const double t = -sg / (sf - sg);
    Vec h(n_);
    for (std::size_t j = 0; j < n_; ++j)
      h[j] = facets_[g].h[j] + t * (facets_[f].h[j] - facets_[g].h[j]);
    common.push_back(q);
    // Refit the normal to its incident vertices; the interpolated one
    // accumulates rounding over many updates.
    try {
      Matrix a(common.size(), n_);
      for (std::size_t r = 0; r < common.size(); ++r)
        for (std::size_t j = 0; j < n_; ++j) a(r, j) = verts_[common[r]][j];
      Vec fit = least_squares(std::move(a), Vec(common.size(), 1.0));
      if (distance(fit, h) <= 1e-6 * norm2(h)) h = std::move(fit);
    } catch (const NumericalFailure&) {
    }
    return {std::move(h), std::move(common), true};
  }

  void kill_vertex(std::size_t v) {
    valive_[v] = 0;
    for (std::size_t f : vfac_[v]) {
      auto& inc = facets_[f].inc;
      inc.erase(std::remove(inc.begin(), inc.end(), v), inc.end());
    }
    vfac_[v].clear();
  }

  std::size_t n_;
  std::vector<Vec> verts_;
  std::vector<std::int64_t> tags_;
  std::vector<char> valive_;
  std::vector<std::vector<std::size_t>> vfac_;
  std::vector<Facet> facets_;
};

}  // namespace detail

inline Polytope Polytope::from_representation(std::size_t n, std::vector<Vec> vertices,
                                              std::vector<Vec> facets,
                                              std::vector<std::int64_t> tags) {
  if (n < 1) throw ValidationError("polytope: dimension must be positive");
  for (const Vec& v : vertices)
    if (v.size() != n || !all_finite(v)) throw ValidationError("polytope: bad vertex");
  for (const Vec& h : facets)
    if (h.size() != n || !all_finite(h)) throw ValidationError("polytope: bad facet normal");
  if (tags.empty()) tags.assign(vertices.size(), kNoTag);
  if (tags.size() != vertices.size()) throw ValidationError("polytope: tag count mismatch");

  Polytope p;
  p.n_ = n;
  p.vertices_ = std::move(vertices);
  p.facets_ = std::move(facets);
  p.tags_ = std::move(tags);
  p.incidence_.resize(p.facets_.size());
  for (std::size_t f = 0; f < p.facets_.size(); ++f)
    for (std::size_t v = 0; v < p.vertices_.size(); ++v)
      if (std::abs(dot(p.facets_[f], p.vertices_[v]) - 1.0) <= kGeomTol)
        p.incidence_[f].push_back(v);
  if (std::string err = p.check_invariants(); !err.empty()) throw ValidationError("polytope: " + err);
  return p;
}

inline Polytope Polytope::from_points(std::size_t n, std::span<const Vec> points,
                                      std::span<const std::int64_t> tags) {
  if (n < 2) throw ArgumentError("polytope: dimension must be at least 2");
  if (!tags.empty() && tags.size() != points.size())
    throw ArgumentError("polytope: tag count mismatch");
  double scale = 0.0;
  for (const Vec& v : points) {
    if (v.size() != n) throw ArgumentError("polytope: point dimension mismatch");
    scale = std::max(scale, norm2(v));
  }
  if (!(scale > 0.0)) throw ArgumentError("polytope: origin is not interior to the hull");

  // Seed with a tiny cross-polytope around the origin; once the real points
  // are in, its vertices must all have been swallowed.
  constexpr std::int64_t kSeed = std::numeric_limits<std::int64_t>::min();
  const double r = 1e-6 * scale;
  std::vector<Vec> seed_v;
  std::vector<Vec> seed_f;
  for (std::size_t i = 0; i < n; ++i) {
    Vec e(n, 0.0);
    e[i] = r;
    seed_v.push_back(e);
    e[i] = -r;
    seed_v.push_back(e);
  }
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    Vec h(n);
    for (std::size_t i = 0; i < n; ++i) h[i] = ((mask >> i) & 1 ? -1.0 : 1.0) / r;
    seed_f.push_back(h);
  }
  Polytope seed = from_representation(n, seed_v, seed_f, std::vector<std::int64_t>(2 * n, kSeed));

  // Insert extreme points along each axis first so the hull gets fat early.
  std::vector<std::size_t> order;
  std::vector<char> used(points.size(), 0);
  for (std::size_t i = 0; i < n && !points.empty(); ++i)
    for (double sgn : {1.0, -1.0}) {
      std::size_t best = 0;
      for (std::size_t k = 1; k < points.size(); ++k)
        if (sgn * points[k][i] > sgn * points[best][i]) best = k;
      if (!used[best]) {
        used[best] = 1;
        order.push_back(best);
      }
    }
  for (std::size_t k = 0; k < points.size(); ++k)
    if (!used[k]) order.push_back(k);

  detail::HullBuilder b(seed);
  for (std::size_t k : order) b.insert(points[k], tags.empty() ? kNoTag : tags[k]);
  if (!b.vertices_with_tag_gone([](std::int64_t t) { return t == kSeed; }))
    throw ArgumentError("polytope: origin is not strictly interior to the hull");
  return b.finish();
}

inline std::vector<std::size_t> Polytope::facet_neighbors(std::size_t f) const {
  std::vector<std::vector<std::size_t>> vfac(vertices_.size());
  for (std::size_t g = 0; g < facets_.size(); ++g)
    for (std::size_t v : incidence_[g]) vfac[v].push_back(g);
  std::vector<std::size_t> count(facets_.size(), 0);
  for (std::size_t v : incidence_[f])
    for (std::size_t g : vfac[v]) ++count[g];
  std::vector<std::size_t> out;
  for (std::size_t g = 0; g < facets_.size(); ++g)
    if (g != f && count[g] + 1 >= n_) out.push_back(g);
  return out;
}

inline std::string Polytope::check_invariants() const {
  if (vertices_.size() < n_ + 1) return "fewer than n+1 vertices";
  if (facets_.size() < n_ + 1) return "fewer than n+1 facets";
  std::vector<std::vector<std::size_t>> vfac(vertices_.size());
  for (std::size_t f = 0; f < facets_.size(); ++f) {
    if (incidence_[f].size() < n_) return "facet with fewer than n vertices";
    for (std::size_t v : incidence_[f]) vfac[v].push_back(f);
  }
  for (std::size_t v = 0; v < vertices_.size(); ++v) {
    for (const Vec& h : facets_)
      if (dot(h, vertices_[v]) > 1.0 + kGeomTol) return "vertex violates a facet";
    std::vector<Vec> rows;
    for (std::size_t f : vfac[v]) rows.push_back(facets_[f]);
    if (rank_of_rows(rows, kGeomTol) < n_) return "vertex tight on fewer than n independent facets";
  }
  for (std::size_t f = 0; f < facets_.size(); ++f) {
    std::vector<Vec> rows;
    for (std::size_t v : incidence_[f]) rows.push_back(vertices_[v]);
    if (rank_of_rows(rows, kGeomTol) < n_) return "facet spanned by fewer than n independent vertices";
  }
  return {};
}

}  // namespace polyinv
