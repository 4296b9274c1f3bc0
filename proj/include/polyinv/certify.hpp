#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "polyinv/cone_min_norm.hpp"
#include "polyinv/errors.hpp"
#include "polyinv/geometry.hpp"
#include "polyinv/invariance.hpp"
#include "polyinv/parallel.hpp"
#include "polyinv/special.hpp"
#include "polyinv/system.hpp"

namespace polyinv {

namespace detail {

inline void require_epsilon(double eps, const char* who) {
  if (!(eps > 0.0 && eps < 0.5)) throw ArgumentError(std::string(who) + ": epsilon must be in (0, 1/2)");
}

inline void require_dim(std::size_t n, const char* who) {
  if (n < 2) throw ArgumentError(std::string(who) + ": dimension must be at least 2");
}

}  // namespace detail

struct DeltaTheta {
  double delta = 1.0;
  double theta = 0.0;
};

/// Cap half-angle theta whose normalized measure is epsilon, and delta = cos(theta).
inline DeltaTheta delta_theta(double eps, std::size_t n) {
  detail::require_epsilon(eps, "delta_theta");
  detail::require_dim(n, "delta_theta");
  const double y = reg_inc_beta_inv(2.0 * eps, 0.5 * static_cast<double>(n - 1), 0.5);
  const double delta = std::sqrt(std::max(0.0, 1.0 - y));
  return {delta, std::acos(std::min(1.0, delta))};
}

/// Upper bound on the number of disjoint caps of half-angle theta(eps)/2.
inline double packing_bound(double eps, std::size_t n) {
  const double half = 0.5 * delta_theta(eps, n).theta;
  const double s = std::sin(half);
  return 2.0 / reg_inc_beta(s * s, 0.5 * static_cast<double>(n - 1), 0.5);
}

/// ln of M (1 - eps/M)^N * packing_bound(eps, n).
inline double log_confidence_B(double eps, std::uint64_t big_n, std::size_t modes, std::size_t n) {
  if (big_n < 1) throw ArgumentError("confidence_B: N must be at least 1");
  if (modes < 1) throw ArgumentError("confidence_B: M must be at least 1");
  const double m = static_cast<double>(modes);
  return std::log(m) + static_cast<double>(big_n) * std::log1p(-eps / m) + std::log(packing_bound(eps, n));
}

/// Failure-probability bound of the a-priori contraction certificate; values
/// above 1 are vacuous. Returns +inf rather than overflowing.
inline double confidence_B(double eps, std::uint64_t big_n, std::size_t modes, std::size_t n) {
  const double l = log_confidence_B(eps, big_n, modes, n);
  return l >= std::log(std::numeric_limits<double>::max()) ? std::numeric_limits<double>::infinity()
                                                            : std::exp(l);
}

/// Smallest N with confidence_B(eps, N, M, n) <= beta.
inline std::uint64_t solve_N_for_confidence(double eps, double beta, std::size_t modes, std::size_t n) {
  if (!(beta > 0.0 && beta < 1.0)) throw ArgumentError("solve_N_for_confidence: beta must be in (0, 1)");
  const double lb = std::log(beta);
  const double l1 = log_confidence_B(eps, 1, modes, n);
  if (l1 <= lb) return 1;
  const double per_sample = std::log1p(-eps / static_cast<double>(modes));
  // l(N) = l(1) + (N - 1) per_sample is linear in N; start from the root and
  // fix any rounding by stepping.
  auto guess = static_cast<std::uint64_t>(std::max(1.0, std::ceil(1.0 + (lb - l1) / per_sample)));
  while (guess > 1 && log_confidence_B(eps, guess - 1, modes, n) <= lb) --guess;
  while (log_confidence_B(eps, guess, modes, n) > lb) ++guess;
  return guess;
}

struct VertexGamma {
  Vec vertex;
  double d_min = 0.0;
  double gamma = 0.0;
  /// Facet attaining d_min.
  std::size_t facet = 0;
  /// True if some facet solve ended before the cut tolerance (iteration cap
  /// or numerical stall) and its relaxation bound was used.
  bool approximate = false;
};

struct GammaLower {
  double epsilon = 0.0;
  double delta = 1.0;
  double theta = 0.0;
  double value = 0.0;
  std::vector<VertexGamma> per_vertex;
};

/// min over vertices u of delta * d_min(u) / ||u||, where d_min(u) is the
/// smallest norm of a boundary point of S inside the cone of half-angle
/// theta(eps) around u, found facet by facet. Where a facet solve stops
/// early its relaxation bound is used, which can only lower the result.
inline GammaLower gamma_lower(const Polytope& s, double eps, const ConeMinNormOptions& opt = {},
                              std::size_t threads = 1) {
  const DeltaTheta dt = delta_theta(eps, s.dim());
  GammaLower out;
  out.epsilon = eps;
  out.delta = dt.delta;
  out.theta = dt.theta;

  const std::size_t nf = s.facet_count();
  std::vector<FacetPiece> pieces(nf);
  std::vector<double> plane_dist(nf);
  std::vector<std::size_t> by_dist(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    pieces[f] = facet_piece(s, f);
    plane_dist[f] = 1.0 / norm2(s.facets()[f]);
    by_dist[f] = f;
  }
  std::stable_sort(by_dist.begin(), by_dist.end(),
                   [&](std::size_t a, std::size_t b) { return plane_dist[a] < plane_dist[b]; });

  out.per_vertex.resize(s.vertex_count());
  parallel_for(
      s.vertex_count(),
      [&](std::size_t v) {
        const Vec& u = s.vertices()[v];
        VertexGamma& g = out.per_vertex[v];
        g.vertex = u;
        // u itself is a boundary point on the cone axis.
        double best = norm2(u);
        g.facet = nf;
        for (std::size_t f = 0; f < nf; ++f)
          if (std::abs(dot(s.facets()[f], u) - 1.0) <= kGeomTol) {
            g.facet = f;
            break;
          }
        for (std::size_t f : by_dist) {
          if (plane_dist[f] >= best) break;
          const ConeMinNormOutcome o = cone_min_norm_solve(pieces[f], u, dt.delta, opt);
          if (o.status == ConeMinNormStatus::infeasible) continue;
          if (o.status == ConeMinNormStatus::iteration_cap || o.status == ConeMinNormStatus::stalled)
            g.approximate = true;
          if (o.lower_bound < best) {
            best = o.lower_bound;
            g.facet = f;
          }
        }
        if (!(best > 0.0)) throw NumericalFailure("gamma_lower: nonpositive boundary distance");
        g.d_min = best;
        g.gamma = dt.delta * best / norm2(u);
      },
      threads);

  out.value = std::numeric_limits<double>::infinity();
  for (const VertexGamma& g : out.per_vertex) out.value = std::min(out.value, g.gamma);
  return out;
}

struct ContractionCertificate {
  double epsilon = 0.0;
  std::size_t n = 0;
  std::uint64_t samples = 0;
  std::size_t modes = 0;
  double delta = 1.0;
  double theta = 0.0;
  double confidence_bound = 0.0;
  /// Measure of a cap of half-angle 2 theta(eps).
  double effective_violation = 0.0;
  bool conclusive = false;
  /// "certified" or a reason the rate could not be claimed.
  std::string status;
  double gamma_lower = 0.0;
  double lambda = std::numeric_limits<double>::infinity();
  std::vector<VertexGamma> per_vertex;
};

/// A-priori certificate: with probability at least 1 - confidence_bound over
/// the draw of N samples, S is lambda-contractive. Inconclusive when the
/// doubled cap angle exceeds pi/2.
inline ContractionCertificate contraction_certificate(const Polytope& s, double eps, std::uint64_t big_n,
                                                      std::size_t modes, const ConeMinNormOptions& opt = {},
                                                      std::size_t threads = 1) {
  const std::size_t n = s.dim();
  const DeltaTheta dt = delta_theta(eps, n);
  ContractionCertificate c;
  c.epsilon = eps;
  c.n = n;
  c.samples = big_n;
  c.modes = modes;
  c.delta = dt.delta;
  c.theta = dt.theta;
  c.confidence_bound = confidence_B(eps, big_n, modes, n);
  if (2.0 * dt.theta > std::numbers::pi / 2) {
    c.status = "inconclusive: doubled cap angle exceeds pi/2";
    c.effective_violation = 0.5;
    return c;
  }
  c.effective_violation = cap_measure(2.0 * dt.theta, n);
  if (!(c.effective_violation < 0.5)) {
    c.status = "inconclusive: effective violation level reaches 1/2";
    return c;
  }
  const GammaLower g = gamma_lower(s, c.effective_violation, opt, threads);
  c.conclusive = true;
  c.status = "certified";
  c.gamma_lower = g.value;
  c.lambda = 1.0 / g.value;
  c.per_vertex = g.per_vertex;
  return c;
}

/// Violation level for k supporting points out of N at confidence beta:
/// 1 for k = N, else 1 - (beta / (N C(N, k)))^(1 / (N - k)).
inline double scenario_epsilon(std::uint64_t k, std::uint64_t big_n, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw ArgumentError("scenario_epsilon: beta must be in (0, 1)");
  if (big_n < 1 || k > big_n) throw ArgumentError("scenario_epsilon: need 0 <= k <= N, N >= 1");
  if (k == big_n) return 1.0;
  const double e = (std::log(beta) - std::log(static_cast<double>(big_n)) - log_binomial(big_n, k)) /
                   static_cast<double>(big_n - k);
  return std::clamp(-std::expm1(e), 0.0, 1.0);
}

/// A data-driven run together with every iterate R_0, R_1, ...
struct RecordedRun {
  InvariantSetResult result;
  std::vector<Polytope> iterates;
};

inline RecordedRun record_data_driven(const SampleSet& samples, const Polytope& x,
                                      const IterationConfig& cfg = {}) {
  RecordedRun rec;
  rec.result = data_driven_invariant_set(samples, x, cfg, [&](std::size_t, const Polytope& r) {
    rec.iterates.push_back(r);
  });
  return rec;
}

struct SupportResult {
  std::vector<std::size_t> indices;
  /// Pairs that were rerun.
  std::size_t candidates = 0;
  std::size_t count() const noexcept { return indices.size(); }
};

/// Pairs whose removal changes the final set. Only pairs that created a
/// vertex of some iterate can matter; every other point was interior to the
/// hull it was offered to, so dropping it leaves all iterates unchanged.
/// Each candidate is rerun from the last iterate before its first vertex.
inline SupportResult count_supporting_points(const SampleSet& samples, const RecordedRun& run,
                                             const IterationConfig& cfg = {}, std::size_t threads = 1) {
  const std::size_t big_n = samples.size();
  constexpr std::size_t kNever = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> first_k(big_n, kNever);
  for (std::size_t k = 1; k < run.iterates.size(); ++k)
    for (std::int64_t t : run.iterates[k].tags()) {
      if (t < 0) continue;
      const std::size_t p = pair_of_tag(t);
      if (p < big_n) first_k[p] = std::min(first_k[p], k);
    }
  std::vector<std::size_t> cand;
  for (std::size_t p = 0; p < big_n; ++p)
    if (first_k[p] != kNever) cand.push_back(p);

  std::vector<char> supporting(cand.size(), 0);
  parallel_for(
      cand.size(),
      [&](std::size_t c) {
        const std::size_t p = cand[c];
        std::vector<char> excluded(big_n, 0);
        excluded[p] = 1;
        const std::size_t k0 = first_k[p] - 1;
        const InvariantSetResult r =
            detail::DataDrivenRun{samples, cfg, &excluded, nullptr}.run(run.iterates[k0], k0);
        supporting[c] = !same_vertex_set(r.set, run.result.set, 1e-9);
      },
      threads);

  SupportResult out;
  out.candidates = cand.size();
  for (std::size_t c = 0; c < cand.size(); ++c)
    if (supporting[c]) out.indices.push_back(cand[c]);
  return out;
}

inline SupportResult count_supporting_points(const SampleSet& samples, const Polytope& x,
                                             const IterationConfig& cfg = {}, std::size_t threads = 1) {
  return count_supporting_points(samples, record_data_driven(samples, x, cfg), cfg, threads);
}

struct ScenarioCertificate {
  double beta = 0.0;
  std::uint64_t samples = 0;
  std::size_t modes = 0;
  std::vector<std::size_t> support_indices;
  std::size_t candidates = 0;
  double epsilon_of_s = 1.0;
  /// min(1, M * epsilon_of_s).
  double almost_invariance_level = 1.0;
  /// Level >= 1/2: no contraction rate can be derived from it.
  bool vacuous = true;
  Polytope set;
  IterationTrace trace;

  std::size_t support_count() const noexcept { return support_indices.size(); }
};

/// A-posteriori certificate: with confidence 1 - beta, the synthesized set is
/// almost invariant at level M * epsilon(s).
inline ScenarioCertificate scenario_certificate(const SampleSet& samples, const RecordedRun& run, double beta,
                                                const IterationConfig& cfg = {}, std::size_t threads = 1) {
  if (!(beta > 0.0 && beta < 1.0)) throw ArgumentError("scenario_certificate: beta must be in (0, 1)");
  const SupportResult sup = count_supporting_points(samples, run, cfg, threads);
  ScenarioCertificate c;
  c.beta = beta;
  c.samples = samples.size();
  c.modes = samples.modes;
  c.support_indices = sup.indices;
  c.candidates = sup.candidates;
  c.epsilon_of_s = scenario_epsilon(sup.count(), samples.size(), beta);
  c.almost_invariance_level = std::min(1.0, static_cast<double>(samples.modes) * c.epsilon_of_s);
  c.vacuous = c.almost_invariance_level >= 0.5;
  c.set = run.result.set;
  c.trace = run.result.trace;
  return c;
}

inline ScenarioCertificate scenario_certificate(const SampleSet& samples, const Polytope& x, double beta,
                                                const IterationConfig& cfg = {}, std::size_t threads = 1) {
  return scenario_certificate(samples, record_data_driven(samples, x, cfg), beta, cfg, threads);
}

/// 1 / gamma_lower(S, level), or nothing when level is outside (0, 1/2).
inline std::optional<double> lambda_epsilon(const Polytope& s, double level, const ConeMinNormOptions& opt = {},
                                            std::size_t threads = 1) {
  if (!(level > 0.0 && level < 0.5)) return std::nullopt;
  return 1.0 / gamma_lower(s, level, opt, threads).value;
}

inline constexpr std::size_t kDefaultProbes = 100000;

struct ViolationEstimate {
  double estimate = 0.0;
  /// 95% normal-approximation half-width of the binomial proportion.
  double half_width = 0.0;
  std::size_t violations = 0;
  std::size_t probes = 0;
};

/// Monte-Carlo measure of the sphere points x where some mode increases the
/// gauge. Reads the true matrices, so it is for validation only.
inline ViolationEstimate empirical_violation(const Polytope& s, const SwitchedLinearSystem& sys,
                                             std::size_t probes, RandomSource& rng) {
  if (sys.dim() != s.dim()) throw ArgumentError("empirical_violation: dimension mismatch");
  if (probes < 1) throw ArgumentError("empirical_violation: probes must be at least 1");
  ViolationEstimate est;
  est.probes = probes;
  for (std::size_t i = 0; i < probes; ++i) {
    const Vec x = sample_unit_sphere(s.dim(), rng);
    const double gx = gauge(s, x);
    for (const Matrix& a : sys.matrices())
      if (gauge(s, a.apply(x)) > gx * (1.0 + 1e-12)) {
        ++est.violations;
        break;
      }
  }
  const double p = static_cast<double>(est.violations) / static_cast<double>(probes);
  est.estimate = p;
  est.half_width = 1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(probes));
  return est;
}

/// Fraction of boundary probes x (sphere points scaled onto the boundary of S)
/// with max over modes of gauge(S, A x) > lambda + 1e-9. Validation only.
inline double contraction_check(const Polytope& s, const SwitchedLinearSystem& sys, double lambda,
                                std::size_t probes, RandomSource& rng) {
  if (sys.dim() != s.dim()) throw ArgumentError("contraction_check: dimension mismatch");
  if (probes < 1) throw ArgumentError("contraction_check: probes must be at least 1");
  std::size_t bad = 0;
  for (std::size_t i = 0; i < probes; ++i) {
    const Vec p = sample_unit_sphere(s.dim(), rng);
    const Vec x = scaled(p, 1.0 / gauge(s, p));
    for (const Matrix& a : sys.matrices())
      if (gauge(s, a.apply(x)) > lambda + 1e-9) {
        ++bad;
        break;
      }
  }
  return static_cast<double>(bad) / static_cast<double>(probes);
}

}  // namespace polyinv
