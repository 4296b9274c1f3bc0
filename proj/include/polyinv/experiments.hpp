#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "polyinv/certify.hpp"
#include "polyinv/geometry.hpp"
#include "polyinv/invariance.hpp"
#include "polyinv/parallel.hpp"
#include "polyinv/system.hpp"

namespace polyinv {

struct BenchRow {
  std::size_t n = 0;
  std::size_t modes = 0;
  std::size_t k_tilde = 0;
  std::size_t v_tilde = 0;
  std::size_t k_star = 0;
  std::size_t v_star = 0;
  /// Largest lambda with lambda * R_inf inside the data-driven set.
  double lambda_star = 0.0;
  double ms = 0.0;
  /// Empty on success.
  std::string error;
};

struct BenchConfig {
  std::size_t samples = 10000;
  double decay = 0.95;
  std::uint64_t seed = 1;
  IterationConfig iteration;
  std::size_t threads = 1;
};

/// One row: fresh system and samples from `rng`, both iterations from the
/// unit box, lambda* from the two limits.
inline BenchRow bench_row(std::size_t n, std::size_t modes, const BenchConfig& cfg, RandomSource rng) {
  BenchRow row;
  row.n = n;
  row.modes = modes;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const SwitchedLinearSystem sys = generate_stable_system(n, modes, cfg.decay, rng);
    const SampleSet samples = sample_observations(sys, cfg.samples, rng);
    const Polytope x = unit_box(n);
    const InvariantSetResult dd = data_driven_invariant_set(samples, x, cfg.iteration);
    const InvariantSetResult mb = model_based_invariant_set(sys, x, cfg.iteration);
    row.k_tilde = dd.trace.updates();
    row.v_tilde = dd.set.vertex_count();
    row.k_star = mb.trace.updates();
    row.v_star = mb.set.vertex_count();
    row.lambda_star = inclusion_ratio(dd.set, mb.set);
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  row.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

/// Rows for every (n, M) pair; row i uses child stream i of the seed.
inline std::vector<BenchRow> bench_table(const std::vector<std::size_t>& dims, const std::vector<std::size_t>& modes,
                                         const BenchConfig& cfg) {
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  for (std::size_t n : dims)
    for (std::size_t m : modes) cells.emplace_back(n, m);
  std::vector<BenchRow> rows(cells.size());
  const RandomSource root(cfg.seed);
  parallel_for(
      cells.size(), [&](std::size_t i) { rows[i] = bench_row(cells[i].first, cells[i].second, cfg, root.child(i)); },
      cfg.threads);
  return rows;
}

inline std::string bench_csv(const std::vector<BenchRow>& rows, bool with_time = true) {
  std::ostringstream os;
  os.precision(17);
  os << "n,M,k_tilde,V_tilde,k_star,V_star,lambda_star,ms\n";
  for (const BenchRow& r : rows) {
    os << r.n << ',' << r.modes << ',';
    if (r.error.empty())
      os << r.k_tilde << ',' << r.v_tilde << ',' << r.k_star << ',' << r.v_star << ',' << r.lambda_star << ',';
    else
      os << ",,,,,";
    if (with_time) os << r.ms;
    os << '\n';
  }
  return os.str();
}

/// Smallest eps in (0, 1/2) with B(eps; N) <= beta, by bisection (B falls
/// as eps grows). Nothing when even eps -> 1/2 is not enough.
inline std::optional<double> solve_epsilon_for_confidence(std::uint64_t big_n, double beta, std::size_t modes,
                                                          std::size_t n) {
  if (!(beta > 0.0 && beta < 1.0)) throw ArgumentError("solve_epsilon_for_confidence: beta must be in (0, 1)");
  const double target = std::log(beta);
  double hi = 0.5 - 1e-12;
  if (log_confidence_B(hi, big_n, modes, n) > target) return std::nullopt;
  double lo = 1e-12;
  if (log_confidence_B(lo, big_n, modes, n) <= target) return lo;
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    (log_confidence_B(mid, big_n, modes, n) <= target ? hi : lo) = mid;
  }
  return hi;
}

struct CurvePoint {
  /// "lambda_B" or "lambda_eps".
  std::string curve;
  std::uint64_t samples = 0;
  /// Empty when the certificate is vacuous or inconclusive at this N.
  std::optional<double> value;
  /// eps for lambda_B, M * eps(s) for lambda_eps.
  double level = 0.0;
  std::size_t support = 0;
  std::string error;
};

struct CurveConfig {
  std::size_t n = 3;
  std::size_t modes = 4;
  double beta = 0.001;
  double decay = 0.95;
  std::uint64_t seed = 1;
  IterationConfig iteration;
  std::size_t threads = 1;
};

/// Default eps grid for the bound curves, coarse to fine.
inline const std::vector<double> kDefaultEpsGrid{0.12, 0.1, 0.08, 0.06, 0.05, 0.04, 0.03, 0.02};

struct BoundCurves {
  /// Shared sample-count grid, ascending.
  std::vector<std::uint64_t> grid;
  /// eps paired with each grid point for the a-priori certificate.
  std::vector<double> epsilons;
  std::vector<CurvePoint> lambda_b;
  std::vector<CurvePoint> lambda_eps;
};

namespace detail {

inline BoundCurves run_curves(std::vector<std::uint64_t> grid, std::vector<double> eps, const CurveConfig& cfg) {
  if (grid.empty()) throw ArgumentError("bound curves: empty grid");
  // Ascending N; eps follows its grid point.
  std::vector<std::size_t> order(grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return grid[a] < grid[b]; });
  BoundCurves out;
  for (std::size_t i : order) {
    out.grid.push_back(grid[i]);
    out.epsilons.push_back(eps[i]);
  }

  const RandomSource root(cfg.seed);
  RandomSource sys_rng = root.child(0);
  const SwitchedLinearSystem sys = generate_stable_system(cfg.n, cfg.modes, cfg.decay, sys_rng);
  // Nested data: every grid point uses a prefix of one sample stream.
  RandomSource data_rng = root.child(1);
  const SampleSet all = sample_observations(sys, static_cast<std::size_t>(out.grid.back()), data_rng);
  const Polytope x = unit_box(cfg.n);

  const std::size_t g = out.grid.size();
  out.lambda_b.resize(g);
  out.lambda_eps.resize(g);
  parallel_for(
      g,
      [&](std::size_t i) {
        const std::uint64_t big_n = out.grid[i];
        CurvePoint& pb = out.lambda_b[i];
        CurvePoint& pe = out.lambda_eps[i];
        pb.curve = "lambda_B";
        pe.curve = "lambda_eps";
        pb.samples = pe.samples = big_n;
        pb.level = out.epsilons[i];
        SampleSet s = all;
        s.pairs.resize(static_cast<std::size_t>(big_n));
        RecordedRun run;
        try {
          run = record_data_driven(s, x, cfg.iteration);
        } catch (const std::exception& e) {
          pb.error = pe.error = e.what();
          return;
        }
        try {
          if (pb.level > 0.0 && pb.level < 0.5) {
            const ContractionCertificate c = contraction_certificate(run.result.set, pb.level, big_n, cfg.modes);
            if (c.conclusive) pb.value = c.lambda;
          }
        } catch (const std::exception& e) {
          pb.error = e.what();
        }
        try {
          const ScenarioCertificate sc = scenario_certificate(s, run, cfg.beta, cfg.iteration);
          pe.level = sc.almost_invariance_level;
          pe.support = sc.support_count();
          pe.value = lambda_epsilon(run.result.set, pe.level);
        } catch (const std::exception& e) {
          pe.error = e.what();
        }
      },
      cfg.threads);
  return out;
}

}  // namespace detail

/// Curves over an eps grid: each eps gives N = solve_N_for_confidence, and
/// both certificates are evaluated at that N.
inline BoundCurves bound_curves_from_eps(const std::vector<double>& eps_grid, const CurveConfig& cfg) {
  if (eps_grid.empty()) throw ArgumentError("bound curves: empty eps grid");
  std::vector<std::uint64_t> grid;
  for (double e : eps_grid) grid.push_back(solve_N_for_confidence(e, cfg.beta, cfg.modes, cfg.n));
  return detail::run_curves(std::move(grid), eps_grid, cfg);
}

/// Curves over an N grid: the a-priori certificate uses the smallest eps
/// whose bound B(eps; N) reaches beta.
inline BoundCurves bound_curves_from_n(const std::vector<std::uint64_t>& n_grid, const CurveConfig& cfg) {
  if (n_grid.empty()) throw ArgumentError("bound curves: empty N grid");
  std::vector<double> eps;
  for (std::uint64_t big_n : n_grid) {
    if (big_n < 1) throw ArgumentError("bound curves: N must be positive");
    eps.push_back(solve_epsilon_for_confidence(big_n, cfg.beta, cfg.modes, cfg.n).value_or(0.5));
  }
  return detail::run_curves(n_grid, std::move(eps), cfg);
}

inline std::string curves_csv(const BoundCurves& c) {
  std::ostringstream os;
  os.precision(17);
  os << "curve,N,value\n";
  for (const auto* curve : {&c.lambda_b, &c.lambda_eps})
    for (const CurvePoint& p : *curve) {
      os << p.curve << ',' << p.samples << ',';
      if (p.value) os << *p.value;
      os << '\n';
    }
  return os.str();
}

}  // namespace polyinv
