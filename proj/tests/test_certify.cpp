#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "polyinv/certify.hpp"

using namespace polyinv;

namespace {

SwitchedLinearSystem half_identity(std::size_t n = 2) {
  Matrix a = Matrix::identity(n);
  a *= 0.5;
  return SwitchedLinearSystem(n, {a});
}

SampleSet without_pair(const SampleSet& s, std::size_t i) {
  SampleSet out = s;
  out.pairs.erase(out.pairs.begin() + static_cast<std::ptrdiff_t>(i));
  return out;
}

// Leave-one-out over every pair, each rerun from scratch.
std::vector<std::size_t> exhaustive_support(const SampleSet& s, const Polytope& x) {
  const Polytope full = data_driven_invariant_set(s, x).set;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.size() == 1) {
      if (!same_vertex_set(x, full)) out.push_back(i);
      continue;
    }
    if (!same_vertex_set(data_driven_invariant_set(without_pair(s, i), x).set, full)) out.push_back(i);
  }
  return out;
}

}  // namespace

TEST(DeltaTheta, PlanarClosedForm) {
  for (double eps = 0.01; eps < 0.5; eps += 0.02) {
    const DeltaTheta dt = delta_theta(eps, 2);
    EXPECT_NEAR(dt.theta, std::numbers::pi * eps, 1e-9);
    EXPECT_NEAR(dt.delta, std::cos(std::numbers::pi * eps), 1e-9);
  }
}

TEST(DeltaTheta, SmallEpsilonLimit) {
  for (std::size_t n = 2; n <= 8; ++n) {
    const DeltaTheta dt = delta_theta(1e-10, n);
    EXPECT_LT(dt.theta, 0.05);
    EXPECT_GT(dt.delta, 0.998);
  }
}

TEST(DeltaTheta, CapMeasureRoundTrip) {
  for (std::size_t n = 2; n <= 8; ++n)
    for (double eps : {1e-4, 0.001, 0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.49}) {
      const DeltaTheta dt = delta_theta(eps, n);
      EXPECT_NEAR(cap_measure(dt.theta, n), eps, 1e-9) << "n=" << n << " eps=" << eps;
      EXPECT_NEAR(dt.delta, std::cos(dt.theta), 1e-12);
    }
}

TEST(DeltaTheta, RejectsEpsilon) {
  EXPECT_THROW(delta_theta(0.0, 2), ArgumentError);
  EXPECT_THROW(delta_theta(0.5, 2), ArgumentError);
  EXPECT_THROW(delta_theta(-0.1, 3), ArgumentError);
}

TEST(PackingBound, PlanarClosedForm) {
  for (double eps = 0.01; eps < 0.5; eps += 0.03) EXPECT_NEAR(packing_bound(eps, 2) * eps / 2.0, 1.0, 1e-9);
}

TEST(PackingBound, AtLeastTwoAndDecreasing) {
  for (std::size_t n = 2; n <= 8; ++n) {
    double prev = std::numeric_limits<double>::infinity();
    for (double eps = 0.005; eps < 0.5; eps += 0.005) {
      const double p = packing_bound(eps, n);
      EXPECT_GE(p, 2.0);
      EXPECT_LT(p, prev);
      prev = p;
    }
  }
}

TEST(ConfidenceB, PlanarExample) {
  const double expected = 40.0 * std::exp(200.0 * std::log(0.95));
  EXPECT_NEAR(confidence_B(0.1, 200, 2, 2) / expected, 1.0, 1e-6);
  EXPECT_NEAR(expected, 1.40e-3, 0.01e-3);
}

TEST(ConfidenceB, MatchesFactoredForm) {
  for (std::size_t n : {2u, 3u, 5u})
    for (std::size_t m : {1u, 4u})
      for (std::uint64_t big_n : {10u, 1000u}) {
        const double eps = 0.07;
        const double direct = m * std::pow(1.0 - eps / m, static_cast<double>(big_n)) * packing_bound(eps, n);
        EXPECT_NEAR(confidence_B(eps, big_n, m, n) / direct, 1.0, 1e-12);
      }
}

TEST(ConfidenceB, Limits) {
  EXPECT_EQ(confidence_B(0.1, 10000000, 2, 3), 0.0);
  EXPECT_LT(confidence_B(0.1, 100000, 2, 3), 1e-100);
  EXPECT_GT(confidence_B(1e-9, 10, 2, 3), 1e6);
  EXPECT_TRUE(std::isfinite(confidence_B(1e-12, 1, 16, 8)) || std::isinf(confidence_B(1e-12, 1, 16, 8)));
  EXPECT_THROW(confidence_B(0.1, 0, 2, 3), ArgumentError);
}

TEST(SolveN, MinimalAndExample) {
  const std::uint64_t n200 = solve_N_for_confidence(0.1, 1.40e-3, 2, 2);
  EXPECT_NEAR(static_cast<double>(n200), 200.0, 1.0);
  for (std::size_t n : {2u, 3u, 4u})
    for (double eps : {0.02, 0.1, 0.3})
      for (double beta : {1e-3, 0.05}) {
        const std::uint64_t big_n = solve_N_for_confidence(eps, beta, 4, n);
        EXPECT_LE(confidence_B(eps, big_n, 4, n), beta);
        if (big_n > 1) {
          EXPECT_GT(confidence_B(eps, big_n - 1, 4, n), beta);
        }
      }
}

TEST(SolveN, MoreModesNeedMoreSamples) {
  for (std::size_t n : {2u, 3u}) {
    std::uint64_t prev = 0;
    for (std::size_t m : {1u, 2u, 4u, 8u}) {
      const std::uint64_t big_n = solve_N_for_confidence(0.05, 1e-3, m, n);
      EXPECT_GT(big_n, prev);
      prev = big_n;
    }
  }
}

TEST(GammaLower, UnitSquareClosedForm) {
  const double eps = 0.05;
  const double expected = std::cos(0.05 * std::numbers::pi) *
                          std::hypot(1.0, std::tan(std::numbers::pi / 4 - 0.05 * std::numbers::pi)) /
                          std::sqrt(2.0);
  EXPECT_NEAR(expected, 0.8632, 1e-4);
  const GammaLower g = gamma_lower(unit_box(2), eps);
  ASSERT_EQ(g.per_vertex.size(), 4u);
  for (const VertexGamma& v : g.per_vertex) EXPECT_NEAR(v.gamma, expected, 1e-8);
  EXPECT_NEAR(g.value, expected, 1e-8);
  EXPECT_NEAR(1.0 / g.value, 1.0 / expected, 1e-8);
  EXPECT_NEAR(1.0 / g.value, 1.1585, 2e-4);
}

TEST(GammaLower, TendsToOneAndMonotone) {
  RandomSource rng(1);
  for (std::size_t n = 2; n <= 3; ++n) {
    const Polytope s = oracle::random_polytope(n, 8, rng);
    double prev = 1.0 + 1e-12;
    for (double eps : {1e-7, 1e-4, 0.01, 0.05, 0.1, 0.2, 0.3}) {
      const double g = gamma_lower(s, eps).value;
      EXPECT_LE(g, prev + 1e-9);
      prev = g;
    }
    EXPECT_GT(gamma_lower(s, 1e-9).value, 0.999);
  }
}

TEST(GammaLower, BelowPlanarGammaMin) {
  RandomSource rng(2);
  for (int rep = 0; rep < 20; ++rep) {
    const Polytope s = oracle::random_polytope(2, 4 + rep % 6, rng, rep % 2 == 0);
    for (double eps : {0.01, 0.05, 0.1, 0.2, 0.3}) {
      const double lower = gamma_lower(s, eps).value;
      EXPECT_LE(lower, oracle::gamma_min_2d(s, eps) + 1e-9) << rep << " " << eps;
    }
  }
}

TEST(GammaLower, FacetwiseMatchesClosedFormDmin) {
  RandomSource rng(3);
  for (std::size_t n = 2; n <= 4; ++n)
    for (int rep = 0; rep < 4; ++rep) {
      const Polytope s = oracle::random_polytope(n, 6 + 2 * n, rng);
      for (double eps : {0.02, 0.15, 0.35}) {
        const GammaLower g = gamma_lower(s, eps);
        for (const VertexGamma& v : g.per_vertex) {
          EXPECT_NEAR(v.d_min, oracle::dmin_closed_form(s, v.vertex, g.theta), 1e-7);
        }
      }
    }
}

TEST(GammaLower, FacetwiseMatchesDenseSearch) {
  RandomSource rng(4);
  for (std::size_t n = 2; n <= 3; ++n) {
    const Polytope s = oracle::random_polytope(n, 8, rng);
    const GammaLower g = gamma_lower(s, 0.1);
    for (std::size_t v = 0; v < std::min<std::size_t>(4, g.per_vertex.size()); ++v)
      EXPECT_NEAR(g.per_vertex[v].d_min, oracle::dmin_dense(s, g.per_vertex[v].vertex, g.theta), 1e-4);
  }
}

TEST(ContractionCertificate, PlanarEffectiveLevel) {
  const Polytope s = unit_box(2);
  const ContractionCertificate c = contraction_certificate(s, 0.05, 500, 2);
  ASSERT_TRUE(c.conclusive);
  EXPECT_NEAR(c.effective_violation, 0.1, 1e-9);
  EXPECT_NEAR(c.lambda, 1.0 / gamma_lower(s, 0.1).value, 1e-9);
  EXPECT_NEAR(c.delta, std::cos(c.theta), 1e-12);
  EXPECT_DOUBLE_EQ(c.confidence_bound, confidence_B(0.05, 500, 2, 2));
  EXPECT_NEAR(c.lambda * c.gamma_lower, 1.0, 1e-12);
}

TEST(ContractionCertificate, InconclusiveGuard) {
  const ContractionCertificate c = contraction_certificate(unit_box(2), 0.3, 100, 2);
  EXPECT_FALSE(c.conclusive);
  EXPECT_NE(c.status.find("inconclusive"), std::string::npos);
  EXPECT_FALSE(contraction_certificate(unit_box(4), 0.4, 100, 2).conclusive);
  EXPECT_TRUE(contraction_certificate(unit_box(2), 0.2, 100, 2).conclusive);
}

TEST(ScenarioEpsilon, Examples) {
  EXPECT_EQ(scenario_epsilon(100, 100, 0.001), 1.0);
  EXPECT_EQ(scenario_epsilon(7, 7, 0.5), 1.0);
  EXPECT_NEAR(scenario_epsilon(10, 100, 0.001), 0.373, 1e-3);
  EXPECT_THROW(scenario_epsilon(11, 10, 0.001), ArgumentError);
  EXPECT_THROW(scenario_epsilon(1, 10, 1.0), ArgumentError);
}

TEST(ScenarioEpsilon, HighPrecisionOracle) {
  // ln C(100, 10) from the exact integer 17310309456440.
  const double log_c = std::log(17310309456440.0);
  const double expected = 1.0 - std::exp((std::log(0.001) - std::log(100.0) - log_c) / 90.0);
  EXPECT_NEAR(scenario_epsilon(10, 100, 0.001), expected, 1e-12);
}

TEST(ScenarioEpsilon, Monotone) {
  for (std::uint64_t big_n : {10u, 200u, 5000u}) {
    double prev = 0.0;
    for (std::uint64_t k = 0; k <= big_n; ++k) {
      const double e = scenario_epsilon(k, big_n, 0.001);
      ASSERT_GE(e, prev);
      ASSERT_LE(e, 1.0);
      prev = e;
    }
  }
  for (std::uint64_t k : {0u, 5u, 50u})
    EXPECT_GE(scenario_epsilon(k, 100, 1e-6), scenario_epsilon(k, 100, 1e-2));
  const double big = scenario_epsilon(500, 100000, 0.001);
  EXPECT_TRUE(std::isfinite(big));
  EXPECT_GT(big, 0.0);
  EXPECT_LT(big, 0.05);
}

TEST(SupportingPoints, HalfIdentityHasNone) {
  RandomSource rng(1);
  const SampleSet s = sample_observations(half_identity(), 50, rng);
  const SupportResult r = count_supporting_points(s, unit_box(2));
  EXPECT_EQ(r.count(), 0u);
  EXPECT_EQ(r.candidates, 0u);
}

TEST(SupportingPoints, SingleExteriorPairSupports) {
  SampleSet s;
  s.n = 2;
  s.modes = 1;
  s.pairs.push_back({{1, 0}, 1, {0.5, 1.5}});
  const SupportResult r = count_supporting_points(s, unit_box(2));
  ASSERT_EQ(r.count(), 1u);
  EXPECT_EQ(r.indices[0], 0u);
}

TEST(SupportingPoints, FilteredEqualsLeaveOneOut) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    RandomSource rng(seed);
    const std::size_t n = seed <= 4 ? 2 : 3;
    const auto sys = generate_stable_system(n, 2 + seed % 3, 0.95, rng);
    const SampleSet s = sample_observations(sys, 40 + 25 * seed, rng);
    const SupportResult r = count_supporting_points(s, unit_box(n));
    EXPECT_EQ(r.indices, exhaustive_support(s, unit_box(n))) << "seed " << seed;
  }
}

TEST(ScenarioCertificate, HalfIdentityLevel) {
  RandomSource rng(2);
  const SampleSet s = sample_observations(half_identity(), 1000, rng);
  const ScenarioCertificate c = scenario_certificate(s, unit_box(2), 0.001);
  EXPECT_EQ(c.support_count(), 0u);
  EXPECT_NEAR(c.almost_invariance_level, 1.0 - std::pow(1e-6, 0.001), 1e-12);
  EXPECT_NEAR(c.almost_invariance_level, 0.0137, 1e-4);
  EXPECT_FALSE(c.vacuous);
}

TEST(ScenarioCertificate, ZeroSupportFormula) {
  RandomSource rng(3);
  Matrix a = Matrix::identity(2);
  a *= 0.3;
  const SampleSet s = sample_observations(SwitchedLinearSystem(2, {a, a, a}), 300, rng);
  const ScenarioCertificate c = scenario_certificate(s, unit_box(2), 0.01);
  EXPECT_NEAR(c.almost_invariance_level, 3.0 * (1.0 - std::pow(0.01 / 300.0, 1.0 / 300.0)), 1e-12);
}

TEST(EmpiricalViolation, TrueInvariantSetHasNone) {
  RandomSource rng(4);
  const auto sys = generate_stable_system(2, 3, 0.95, rng);
  const Polytope r = model_based_invariant_set(sys, unit_box(2)).set;
  const std::size_t probes = 20000;
  const ViolationEstimate e = empirical_violation(r, sys, probes, rng);
  EXPECT_LE(e.estimate, 3.0 / probes);
  EXPECT_EQ(e.probes, probes);
}

TEST(EmpiricalViolation, NonInvariantSetViolates) {
  bool seen = false;
  for (std::uint64_t seed = 1; seed <= 5 && !seen; ++seed) {
    RandomSource rng(seed);
    const auto sys = generate_stable_system(2, 4, 0.95, rng);
    if (model_based_invariant_set(sys, unit_box(2)).trace.updates() == 0) continue;
    const ViolationEstimate e = empirical_violation(unit_box(2), sys, 20000, rng);
    seen = e.estimate > 0.0;
    EXPECT_GT(e.half_width, 0.0);
  }
  EXPECT_TRUE(seen);
}

TEST(EmpiricalViolation, IndicatorEvenOnSymmetricSets) {
  RandomSource rng(5);
  const auto sys = generate_stable_system(3, 2, 0.95, rng);
  const Polytope s = unit_box(3);
  auto violates = [&](const Vec& x) {
    for (const Matrix& a : sys.matrices())
      if (gauge(s, a.apply(x)) > gauge(s, x) * (1.0 + 1e-12)) return true;
    return false;
  };
  for (int i = 0; i < 2000; ++i) {
    const Vec x = sample_unit_sphere(3, rng);
    EXPECT_EQ(violates(x), violates(negated(x)));
  }
}

TEST(ContractionCheck, HalfIdentity) {
  RandomSource rng(6);
  EXPECT_EQ(contraction_check(unit_box(2), half_identity(), 0.5, 5000, rng), 0.0);
  EXPECT_EQ(contraction_check(unit_box(2), half_identity(), 0.49, 5000, rng), 1.0);
}

TEST(Parallel, SameResultAnyThreadCount) {
  RandomSource rng(7);
  const auto sys = generate_stable_system(2, 3, 0.95, rng);
  const SampleSet s = sample_observations(sys, 120, rng);
  const auto a = count_supporting_points(s, unit_box(2), {}, 1);
  const auto b = count_supporting_points(s, unit_box(2), {}, 3);
  EXPECT_EQ(a.indices, b.indices);
  const Polytope r = data_driven_invariant_set(s, unit_box(2)).set;
  EXPECT_EQ(gamma_lower(r, 0.1, {}, 1).value, gamma_lower(r, 0.1, {}, 3).value);
}
