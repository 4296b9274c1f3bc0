#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "polyinv/errors.hpp"
#include "polyinv/linalg.hpp"
#include "polyinv/lp.hpp"
#include "polyinv/random.hpp"

namespace polyinv {

/// Uniform point on the unit sphere in R^n (normalized Gaussian vector).
inline Vec sample_unit_sphere(std::size_t n, RandomSource& rng) {
  if (n < 2) throw ArgumentError("sample_unit_sphere: dimension must be at least 2");
  Vec v(n);
  for (;;) {
    for (double& c : v) c = rng.normal();
    const double r = norm2(v);
    if (r > 1e-150) {
      for (double& c : v) c /= r;
      return v;
    }
  }
}

/// A polytope piece {x : normal^T x = offset, bounds x <= bounds_rhs}.
struct FacetPiece {
  Vec normal;
  double offset = 1.0;
  Matrix bounds;
  Vec bounds_rhs;
};

struct ConeMinNormOptions {
  std::size_t max_iterations = 500;
  double cut_tolerance = 1e-9;
};

/// `stalled`: the LP lost accuracy before the cut tolerance was met; the
/// previous relaxation value is returned and is still a valid lower bound.
enum class ConeMinNormStatus { converged, infeasible, iteration_cap, stalled };

struct ConeMinNormOutcome {
  ConeMinNormStatus status = ConeMinNormStatus::infeasible;
  /// Relaxation value; always a lower bound on the true minimum when the
  /// piece meets the cone.
  double lower_bound = 0.0;
  Vec point;
  std::size_t iterations = 0;
};

/// Cutting-plane solve of
///   min t  s.t.  ||x|| <= t,  x in piece,  u^T x >= delta ||u|| ||x||.
/// With a = u^T x / ||u|| and w the part of x orthogonal to u, the cone reads
/// ||w|| <= tan(theta) a. Both second-order constraints are replaced by
/// linear cuts (g^T x <= t for the norm, g^T w <= tan(theta) a for the cone)
/// and refined at each LP solution until both gaps drop below cut_tolerance.
/// Every LP is a relaxation, so t* is always a lower bound.
inline ConeMinNormOutcome cone_min_norm_solve(const FacetPiece& piece, std::span<const double> u,
                                              double delta, const ConeMinNormOptions& opt = {}) {
  const std::size_t n = u.size();
  if (piece.normal.size() != n) throw ArgumentError("cone_min_norm: dimension mismatch");
  if (piece.bounds_rhs.size() > 0 && piece.bounds.cols() != n)
    throw ArgumentError("cone_min_norm: bound matrix dimension mismatch");
  const double unorm = norm2(u);
  if (!(unorm > 0.0)) throw ArgumentError("cone_min_norm: zero cone direction");
  if (!(delta > 0.0 && delta <= 1.0)) throw ArgumentError("cone_min_norm: delta outside (0, 1]");
  const Vec uhat = scaled(u, 1.0 / unorm);
  const double tan_theta = std::sqrt(std::max(0.0, 1.0 - delta * delta)) / delta;

  auto orthogonal_part = [&](const Vec& x) {
    Vec w = x;
    const double a = dot(uhat, x);
    for (std::size_t j = 0; j < n; ++j) w[j] -= a * uhat[j];
    return w;
  };

  std::vector<Vec> norm_cuts;
  for (std::size_t i = 0; i < n; ++i) {
    Vec e(n, 0.0);
    e[i] = 1.0;
    norm_cuts.push_back(e);
    e[i] = -1.0;
    norm_cuts.push_back(e);
  }
  norm_cuts.push_back(uhat);

  // Cone cuts are unit vectors orthogonal to u; start from +-(projected axes).
  std::vector<Vec> cone_cuts;
  for (std::size_t i = 0; i < n; ++i) {
    Vec e(n, 0.0);
    e[i] = 1.0;
    Vec g = orthogonal_part(e);
    const double gn = norm2(g);
    if (gn < 1e-8) continue;
    g = scaled(g, 1.0 / gn);
    cone_cuts.push_back(g);
    cone_cuts.push_back(negated(g));
  }

  const std::size_t nb = piece.bounds_rhs.size();
  const std::size_t base_norm = norm_cuts.size(), base_cone = cone_cuts.size();
  double last_gap = std::numeric_limits<double>::infinity();
  double last_t = -1.0;
  ConeMinNormOutcome out;
  for (std::size_t it = 1; it <= opt.max_iterations; ++it) {
    out.iterations = it;
    // Variables: x (free) then t (>= 0).
    LinearProgram lp;
    lp.objective.assign(n + 1, 0.0);
    lp.objective[n] = 1.0;
    lp.lower.assign(n + 1, -std::numeric_limits<double>::infinity());
    lp.lower[n] = 0.0;
    lp.a_eq = Matrix(1, n + 1);
    for (std::size_t j = 0; j < n; ++j) lp.a_eq(0, j) = piece.normal[j];
    lp.b_eq = {piece.offset};
    const std::size_t rows = nb + norm_cuts.size() + cone_cuts.size() + 1;
    lp.a_ub = Matrix(rows, n + 1);
    lp.b_ub.assign(rows, 0.0);
    std::size_t r = 0;
    for (; r < nb; ++r) {
      for (std::size_t j = 0; j < n; ++j) lp.a_ub(r, j) = piece.bounds(r, j);
      lp.b_ub[r] = piece.bounds_rhs[r];
    }
    for (const Vec& g : norm_cuts) {
      for (std::size_t j = 0; j < n; ++j) lp.a_ub(r, j) = g[j];
      lp.a_ub(r, n) = -1.0;
      ++r;
    }
    for (const Vec& g : cone_cuts) {
      for (std::size_t j = 0; j < n; ++j) lp.a_ub(r, j) = g[j] - tan_theta * uhat[j];
      ++r;
    }
    // a >= 0 (the cone is one-sided).
    for (std::size_t j = 0; j < n; ++j) lp.a_ub(r, j) = -uhat[j];

    LpResult res;
    try {
      res = solve_lp(lp);
    } catch (const NumericalFailure&) {
      if (it == 1) throw;
      out.status = ConeMinNormStatus::stalled;
      return out;
    }
    if (res.status == LpStatus::infeasible) {
      // Cuts are valid, so a relaxation that turns infeasible after a nearly
      // feasible iterate has lost accuracy rather than proven emptiness.
      out.status = it > 1 && last_gap <= 1e-6 ? ConeMinNormStatus::stalled : ConeMinNormStatus::infeasible;
      return out;
    }
    if (res.status == LpStatus::unbounded)
      throw NumericalFailure("cone_min_norm: relaxation unbounded");
    Vec x(res.x.begin(), res.x.begin() + static_cast<std::ptrdiff_t>(n));
    const double t = res.x[n];
    const double rx = norm2(x);
    const Vec w = orthogonal_part(x);
    const double wn = norm2(w);
    const double a = dot(uhat, x);
    out.lower_bound = t;
    out.point = x;
    const double tol = opt.cut_tolerance * std::max(1.0, rx);
    const bool norm_ok = rx - t <= tol;
    const bool cone_ok = wn - tan_theta * a <= tol;
    if (norm_ok && cone_ok) {
      out.status = ConeMinNormStatus::converged;
      return out;
    }
    last_gap = std::max(rx - t, wn - tan_theta * a) / std::max(1.0, rx);
    // Added cuts slack at the optimum do not support it; dropping them keeps
    // the optimum and the LP small. Pruning only after the bound has risen
    // rules out cycling.
    const bool rose = t > last_t + 1e-12 * std::max(1.0, t);
    last_t = t;
    const double slack_tol = 1e-7 * std::max(1.0, rx);
    auto prune = [](std::vector<Vec>& cuts, std::size_t keep, auto slack) {
      cuts.erase(std::remove_if(cuts.begin() + static_cast<std::ptrdiff_t>(keep), cuts.end(), slack), cuts.end());
    };
    if (rose) prune(norm_cuts, base_norm, [&](const Vec& g) { return t - dot(g, x) > slack_tol; });
    if (rose) prune(cone_cuts, base_cone, [&](const Vec& g) { return tan_theta * a - dot(g, w) > slack_tol; });
    if (!norm_ok) norm_cuts.push_back(scaled(x, 1.0 / rx));
    if (!cone_ok) cone_cuts.push_back(scaled(w, 1.0 / wn));
  }
  out.status = ConeMinNormStatus::iteration_cap;
  return out;
}

/// min ||x|| over the piece intersected with the cone {x : u^T x >= delta ||u|| ||x||}.
/// Returns nullopt when the piece misses the cone.
inline std::optional<double> min_norm_on_facet_in_cone(const FacetPiece& piece,
                                                       std::span<const double> u, double delta,
                                                       const ConeMinNormOptions& opt = {}) {
  if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("min_norm_on_facet_in_cone: delta outside (0, 1)");
  const ConeMinNormOutcome o = cone_min_norm_solve(piece, u, delta, opt);
  switch (o.status) {
    case ConeMinNormStatus::converged: return o.lower_bound;
    case ConeMinNormStatus::infeasible: return std::nullopt;
    case ConeMinNormStatus::stalled:
      if (norm2(o.point) - o.lower_bound <= 1e-6 * std::max(1.0, norm2(o.point))) return o.lower_bound;
      break;
    case ConeMinNormStatus::iteration_cap: break;
  }
  throw NumericalFailure("min_norm_on_facet_in_cone: cutting planes did not converge");
}

}  // namespace polyinv
