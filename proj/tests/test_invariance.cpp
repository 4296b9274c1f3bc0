#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "polyinv/invariance.hpp"

using namespace polyinv;

namespace {

SwitchedLinearSystem half_identity() {
  Matrix a = Matrix::identity(2);
  a *= 0.5;
  return SwitchedLinearSystem(2, {a});
}

SwitchedLinearSystem scaled_rotation() {
  Matrix a(2, 2);
  a(0, 1) = -0.9;
  a(1, 0) = 0.9;
  return SwitchedLinearSystem(2, {a});
}

double invariance_residual(const Polytope& r, const SwitchedLinearSystem& sys) {
  double worst = 0.0;
  for (const Matrix& a : sys.matrices())
    for (const Vec& v : r.vertices()) worst = std::max(worst, gauge(r, a.apply(v)) - 1.0);
  return worst;
}

}  // namespace

TEST(ModelBased, HalfIdentityKeepsBox) {
  const auto res = model_based_invariant_set(half_identity(), unit_box(2));
  EXPECT_TRUE(same_vertex_set(res.set, unit_box(2)));
  EXPECT_EQ(res.trace.updates(), 0u);
  EXPECT_EQ(res.trace.termination, Termination::converged);
}

TEST(ModelBased, RotationKeepsBox) {
  const auto res = model_based_invariant_set(scaled_rotation(), unit_box(2));
  EXPECT_TRUE(same_vertex_set(res.set, unit_box(2)));
  const SwitchedLinearSystem rot = scaled_rotation();
  const Polytope box = unit_box(2);
  for (const Vec& v : box.vertices()) EXPECT_NEAR(gauge(box, rot.mode(1).apply(v)), 0.9, 1e-15);
}

TEST(ModelBased, GeneratedSystemIsInvariant) {
  RandomSource rng(1);
  const auto sys = generate_stable_system(2, 4, 0.95, rng);
  const IterationConfig cfg;
  const auto res = model_based_invariant_set(sys, unit_box(2), cfg);
  EXPECT_LE(invariance_residual(res.set, sys), cfg.tolerance);
  EXPECT_TRUE(polytope_subset(unit_box(2), res.set));
}

TEST(ModelBased, TerminatesForDecayPointNine) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    RandomSource rng(seed);
    const auto sys = generate_stable_system(2, 4, 0.9, rng);
    const auto res = model_based_invariant_set(sys, unit_box(2));
    EXPECT_EQ(res.trace.termination, Termination::converged);
  }
}

TEST(ModelBased, CapThrowsWithTrace) {
  RandomSource rng(1);
  const auto sys = generate_stable_system(3, 4, 0.99, rng);
  IterationConfig cfg;
  cfg.max_iterations = 1;
  try {
    model_based_invariant_set(sys, unit_box(3), cfg);
    FAIL() << "expected NonConvergence";
  } catch (const NonConvergence& e) {
    EXPECT_EQ(e.trace().termination, Termination::max_iter);
    EXPECT_EQ(e.trace().records.size(), 2u);
  }
}

TEST(DataDriven, HalfIdentityStopsImmediately) {
  RandomSource rng(2);
  const SampleSet s = sample_observations(half_identity(), 100, rng);
  const auto res = data_driven_invariant_set(s, unit_box(2));
  EXPECT_TRUE(same_vertex_set(res.set, unit_box(2)));
  EXPECT_EQ(res.trace.records.size(), 1u);
  EXPECT_EQ(res.trace.updates(), 0u);
}

TEST(DataDriven, SymmetricIterates) {
  RandomSource rng(3);
  const auto sys = generate_stable_system(3, 3, 0.95, rng);
  const SampleSet s = sample_observations(sys, 150, rng);
  std::size_t seen = 0;
  const auto res = data_driven_invariant_set(s, unit_box(3), {}, [&](std::size_t, const Polytope& r) {
    EXPECT_TRUE(is_centrally_symmetric(r));
    ++seen;
  });
  EXPECT_EQ(seen, res.trace.records.size());
  EXPECT_TRUE(is_centrally_symmetric(res.set));
}

TEST(DataDriven, IteratesInsideModelBasedIterates) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    RandomSource rng(seed);
    const std::size_t n = seed <= 2 ? 2 : 3;
    const auto sys = generate_stable_system(n, 3, 0.9, rng);
    const SampleSet s = sample_observations(sys, 200, rng);
    std::map<std::size_t, Polytope> model;
    const auto mres = model_based_invariant_set(sys, unit_box(n), {},
                                                [&](std::size_t k, const Polytope& r) { model.emplace(k, r); });
    const auto dres =
        data_driven_invariant_set(s, unit_box(n), {}, [&](std::size_t k, const Polytope& r) {
          const Polytope& outer = model.count(k) ? model.at(k) : mres.set;
          EXPECT_TRUE(polytope_subset(r, outer, 1e-9)) << "seed " << seed << " k " << k;
        });
    EXPECT_TRUE(polytope_subset(dres.set, mres.set, 1e-9));
  }
}

TEST(DataDriven, SampledFeasibility) {
  RandomSource rng(4);
  const auto sys = generate_stable_system(3, 4, 0.95, rng);
  const SampleSet s = sample_observations(sys, 300, rng);
  const IterationConfig cfg;
  const auto res = data_driven_invariant_set(s, unit_box(3), cfg);
  EXPECT_LE(feasibility_residual(res.set, s), cfg.tolerance + 1e-12);
  for (const SamplePair& p : s.pairs)
    EXPECT_LE(gauge(res.set, p.y), (1 + cfg.tolerance) * gauge(res.set, p.x) + 1e-12);
}

TEST(DataDriven, TagsNameSamplePairs) {
  RandomSource rng(5);
  const auto sys = generate_stable_system(2, 2, 0.95, rng);
  const SampleSet s = sample_observations(sys, 80, rng);
  const auto res = data_driven_invariant_set(s, unit_box(2));
  for (std::size_t i = 0; i < res.set.vertex_count(); ++i) {
    const std::int64_t t = res.set.tags()[i];
    if (t == kNoTag) continue;
    ASSERT_GE(t, 0);
    ASSERT_LT(pair_of_tag(t), s.size());
    // The vertex lies on the ray through the signed successor.
    Vec y = s.pairs[pair_of_tag(t)].y;
    if (t % 2) y = negated(y);
    const Vec& v = res.set.vertices()[i];
    EXPECT_NEAR(dot(v, y), norm2(v) * norm2(y), 1e-9 * norm2(v) * norm2(y));
  }
}

TEST(DataDriven, TraceCsvAndCounts) {
  RandomSource rng(6);
  const auto sys = generate_stable_system(2, 3, 0.95, rng);
  const SampleSet s = sample_observations(sys, 60, rng);
  const auto res = data_driven_invariant_set(s, unit_box(2));
  const std::string csv = res.trace.to_csv();
  EXPECT_EQ(csv.rfind("k,vertices,facets,max_gauge,ms\n", 0), 0u);
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), res.trace.records.size() + 1);
  EXPECT_LE(res.trace.records.back().max_gauge, 1 + 1e-8 + 1e-12);
}

TEST(DataDriven, RejectsBadInput) {
  SampleSet empty;
  empty.n = 2;
  EXPECT_THROW(data_driven_invariant_set(empty, unit_box(2)), ArgumentError);
  RandomSource rng(7);
  const SampleSet s = sample_observations(half_identity(), 5, rng);
  EXPECT_THROW(data_driven_invariant_set(s, unit_box(3)), ArgumentError);
  IterationConfig cfg;
  cfg.tolerance = 0.0;
  EXPECT_THROW(data_driven_invariant_set(s, unit_box(2), cfg), ArgumentError);
}

TEST(FeasibilityResidual, Examples) {
  SampleSet s;
  s.n = 2;
  s.modes = 1;
  s.pairs.push_back({{1, 0}, 1, {2, 0}});
  EXPECT_DOUBLE_EQ(feasibility_residual(unit_box(2), s), 1.0);
  s.pairs[0].y = {0.3, 0.3};
  EXPECT_DOUBLE_EQ(feasibility_residual(unit_box(2), s), 0.0);
}
