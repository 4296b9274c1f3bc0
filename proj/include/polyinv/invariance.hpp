#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "polyinv/errors.hpp"
#include "polyinv/geometry.hpp"
#include "polyinv/system.hpp"

namespace polyinv {

struct IterationConfig {
  double tolerance = 1e-8;
  std::size_t max_iterations = 200;
};

enum class Termination { converged, max_iter, degeneracy };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::max_iter: return "max_iter";
    case Termination::degeneracy: return "degeneracy";
  }
  return "unknown";
}

struct IterationRecord {
  std::size_t k = 0;
  std::size_t vertices = 0;
  std::size_t facets = 0;
  /// Largest gauge of the candidate points against the current set.
  double max_gauge = 0.0;
  double ms = 0.0;
};

struct IterationTrace {
  std::vector<IterationRecord> records;
  Termination termination = Termination::converged;

  /// Number of hull updates performed.
  std::size_t updates() const { return records.empty() ? 0 : records.back().k; }

  std::string to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "k,vertices,facets,max_gauge,ms\n";
    for (const auto& r : records)
      os << r.k << ',' << r.vertices << ',' << r.facets << ',' << r.max_gauge << ',' << r.ms << '\n';
    return os.str();
  }
};

/// Iteration cap reached; carries the trace so far.
class NonConvergence : public std::runtime_error {
public:
  NonConvergence(const std::string& what, IterationTrace trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const IterationTrace& trace() const noexcept { return trace_; }

private:
  IterationTrace trace_;
};

/// Hull degeneracy during an iteration; carries the trace so far.
class IterationDegeneracy : public DegeneracyError {
public:
  IterationDegeneracy(const std::string& what, IterationTrace trace)
      : DegeneracyError(what), trace_(std::move(trace)) {}
  const IterationTrace& trace() const noexcept { return trace_; }

private:
  IterationTrace trace_;
};

struct InvariantSetResult {
  Polytope set;
  IterationTrace trace;
};

/// Called with (k, R_k) for every iterate, R_0 included.
using IterateObserver = std::function<void(std::size_t, const Polytope&)>;

/// Vertex tag of the signed copy of sample pair i: 2i for +y, 2i+1 for -y.
constexpr std::int64_t sample_tag(std::size_t pair, bool negative) {
  return static_cast<std::int64_t>(2 * pair + (negative ? 1 : 0));
}
constexpr std::size_t pair_of_tag(std::int64_t tag) { return static_cast<std::size_t>(tag / 2); }

namespace detail {

using Clock = std::chrono::steady_clock;

inline double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Hull insertion order: farthest first (by gauge), then original index.
inline std::vector<std::size_t> outside_by_gauge(const Polytope& r, const std::vector<Vec>& pts,
                                                 std::vector<double>& g) {
  g.resize(pts.size());
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    g[i] = gauge(r, pts[i]);
    if (g[i] > 1.0 + 1e-12) idx.push_back(i);
  }
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return g[a] > g[b]; });
  return idx;
}

struct DataDrivenRun {
  const SampleSet& samples;
  const IterationConfig& cfg;
  /// Pairs with a nonzero entry are left out (leave-one-out reruns).
  const std::vector<char>* excluded = nullptr;
  const IterateObserver* observer = nullptr;

  InvariantSetResult run(Polytope r, std::size_t k0) const {
    IterationTrace trace;
    for (std::size_t k = k0;; ++k) {
      const auto t0 = Clock::now();
      if (observer && *observer) (*observer)(k, r);

      // Omega_k: both signed copies of every successor, scaled by the gauge
      // of the matching initial state in the current set.
      std::vector<Vec> omega;
      std::vector<std::int64_t> tags;
      omega.reserve(2 * samples.size());
      tags.reserve(2 * samples.size());
      for (std::size_t i = 0; i < samples.size(); ++i) {
        if (excluded && (*excluded)[i]) continue;
        const SamplePair& p = samples.pairs[i];
        const double gp = gauge(r, p.x);
        const double gm = gauge(r, negated(p.x));
        omega.push_back(scaled(p.y, 1.0 / gp));
        tags.push_back(sample_tag(i, false));
        omega.push_back(scaled(p.y, -1.0 / gm));
        tags.push_back(sample_tag(i, true));
      }
      std::vector<double> g;
      const std::vector<std::size_t> order = outside_by_gauge(r, omega, g);
      const double max_g = g.empty() ? 0.0 : *std::max_element(g.begin(), g.end());
      trace.records.push_back({k, r.vertex_count(), r.facet_count(), max_g, 0.0});

      if (max_g <= 1.0 + cfg.tolerance + 1e-12) {
        trace.records.back().ms = ms_since(t0);
        trace.termination = Termination::converged;
        return {std::move(r), std::move(trace)};
      }
      if (k >= cfg.max_iterations) {
        trace.records.back().ms = ms_since(t0);
        trace.termination = Termination::max_iter;
        throw NonConvergence("data-driven iteration: max_iterations reached", std::move(trace));
      }
      std::vector<Vec> pts;
      std::vector<std::int64_t> pt_tags;
      pts.reserve(order.size());
      for (std::size_t i : order) {
        pts.push_back(std::move(omega[i]));
        pt_tags.push_back(tags[i]);
      }
      try {
        r = convex_hull_add(r, pts, pt_tags);
      } catch (const DegeneracyError& e) {
        trace.records.back().ms = ms_since(t0);
        trace.termination = Termination::degeneracy;
        throw IterationDegeneracy(e.what(), std::move(trace));
      }
      trace.records.back().ms = ms_since(t0);
    }
  }
};

}  // namespace detail

/// Model-based set iteration R_{k+1} = conv(R_k u A_1 V(R_k) u ... u A_M V(R_k))
/// from R_0 = X, stopping once every mapped vertex has gauge <= 1 + tolerance.
/// Needs the true matrices, so it serves as the reference oracle.
inline InvariantSetResult model_based_invariant_set(const SwitchedLinearSystem& sys,
                                                    const Polytope& x, const IterationConfig& cfg = {},
                                                    const IterateObserver& observer = {}) {
  if (x.dim() != sys.dim()) throw ArgumentError("model_based_invariant_set: dimension mismatch");
  if (!(cfg.tolerance > 0.0)) throw ArgumentError("IterationConfig: tolerance must be positive");
  Polytope r = x;
  IterationTrace trace;
  for (std::size_t k = 0;; ++k) {
    const auto t0 = detail::Clock::now();
    if (observer) observer(k, r);
    std::vector<Vec> images;
    for (const Matrix& a : sys.matrices())
      for (const Vec& v : r.vertices()) images.push_back(a.apply(v));
    std::vector<double> g;
    const std::vector<std::size_t> order = detail::outside_by_gauge(r, images, g);
    const double max_g = g.empty() ? 0.0 : *std::max_element(g.begin(), g.end());
    trace.records.push_back({k, r.vertex_count(), r.facet_count(), max_g, 0.0});
    if (max_g <= 1.0 + cfg.tolerance + 1e-12) {
      trace.records.back().ms = detail::ms_since(t0);
      trace.termination = Termination::converged;
      return {std::move(r), std::move(trace)};
    }
    if (k >= cfg.max_iterations) {
      trace.records.back().ms = detail::ms_since(t0);
      trace.termination = Termination::max_iter;
      throw NonConvergence("model-based iteration: max_iterations reached", std::move(trace));
    }
    std::vector<Vec> pts;
    for (std::size_t i : order) pts.push_back(images[i]);
    try {
      r = convex_hull_add(r, pts);
    } catch (const DegeneracyError& e) {
      trace.records.back().ms = detail::ms_since(t0);
      trace.termination = Termination::degeneracy;
      throw IterationDegeneracy(e.what(), std::move(trace));
    }
    trace.records.back().ms = detail::ms_since(t0);
  }
}

/// Data-driven set iteration from observations only. Each vertex of the
/// result is tagged with the sample pair and sign copy that created it
/// (see sample_tag); vertices of X keep kNoTag.
inline InvariantSetResult data_driven_invariant_set(const SampleSet& samples, const Polytope& x,
                                                    const IterationConfig& cfg = {},
                                                    const IterateObserver& observer = {}) {
  if (samples.pairs.empty()) throw ArgumentError("data_driven_invariant_set: empty sample set");
  if (x.dim() != samples.n) throw ArgumentError("data_driven_invariant_set: dimension mismatch");
  if (!(cfg.tolerance > 0.0)) throw ArgumentError("IterationConfig: tolerance must be positive");
  return detail::DataDrivenRun{samples, cfg, nullptr, &observer}.run(x, 0);
}

/// max over pairs of gauge(S, y) / gauge(S, x) - 1, clamped at 0.
inline double feasibility_residual(const Polytope& s, const SampleSet& samples) {
  double worst = 0.0;
  for (const SamplePair& p : samples.pairs) {
    const double gx = gauge(s, p.x);
    if (!(gx > 0.0)) throw ArgumentError("feasibility_residual: zero initial state");
    worst = std::max(worst, gauge(s, p.y) / gx - 1.0);
  }
  return worst;
}

}  // namespace polyinv
