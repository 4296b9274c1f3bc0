#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "polyinv/system.hpp"

using namespace polyinv;

namespace {

Matrix scaled_identity(std::size_t n, double s) {
  Matrix a = Matrix::identity(n);
  a *= s;
  return a;
}

}  // namespace

TEST(System, Validation) {
  EXPECT_THROW(SwitchedLinearSystem(2, {}), ValidationError);
  EXPECT_THROW(SwitchedLinearSystem(2, {Matrix(2, 3)}), ValidationError);
  Matrix bad(2, 2);
  bad(0, 0) = std::nan("");
  EXPECT_THROW(SwitchedLinearSystem(2, {bad}), ValidationError);
  const SwitchedLinearSystem sys(2, {Matrix::identity(2)});
  EXPECT_THROW(sys.mode(0), ArgumentError);
  EXPECT_THROW(sys.mode(2), ArgumentError);
}

TEST(Generator, SingleModeBound) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    RandomSource rng(seed);
    const auto sys = generate_stable_system(3, 1, 0.8, rng);
    EXPECT_EQ(sys.mode_count(), 1u);
    EXPECT_LE(spectral_norm(sys.mode(1) * sys.mode(1) * sys.mode(1)), 0.8 * 0.8 * 0.8 + 1e-9);
  }
}

TEST(Generator, LengthThreeProductsBounded) {
  RandomSource rng(2);
  for (std::size_t n : {2u, 3u, 5u})
    for (std::size_t m : {2u, 4u}) {
      const double decay = 0.9;
      const auto sys = generate_stable_system(n, m, decay, rng);
      double worst = 0.0;
      for (std::size_t i = 1; i <= m; ++i)
        for (std::size_t j = 1; j <= m; ++j)
          for (std::size_t k = 1; k <= m; ++k)
            worst = std::max(worst, spectral_norm(sys.mode(i) * sys.mode(j) * sys.mode(k)));
      EXPECT_LE(worst, decay * decay * decay + 1e-9);
      EXPECT_GT(worst, decay * decay * decay - 1e-9);
    }
}

TEST(Generator, RejectsArguments) {
  RandomSource rng(3);
  EXPECT_THROW(generate_stable_system(1, 2, 0.5, rng), ArgumentError);
  EXPECT_THROW(generate_stable_system(9, 2, 0.5, rng), ArgumentError);
  EXPECT_THROW(generate_stable_system(2, 0, 0.5, rng), ArgumentError);
  EXPECT_THROW(generate_stable_system(2, 17, 0.5, rng), ArgumentError);
  EXPECT_THROW(generate_stable_system(2, 2, 1.0, rng), ArgumentError);
  EXPECT_THROW(generate_stable_system(2, 2, 0.0, rng), ArgumentError);
}

TEST(Generator, Deterministic) {
  RandomSource a(99), b(99);
  EXPECT_EQ(generate_stable_system(4, 3, 0.9, a), generate_stable_system(4, 3, 0.9, b));
}

TEST(Sampling, SinglePair) {
  RandomSource rng(5);
  const auto sys = generate_stable_system(3, 2, 0.9, rng);
  const SampleSet s = sample_observations(sys, 1, rng);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_NEAR(norm2(s.pairs[0].x), 1.0, 1e-12);
  EXPECT_EQ(s.pairs[0].y, sys.mode(s.pairs[0].mode).apply(s.pairs[0].x));
  EXPECT_THROW(sample_observations(sys, 0, rng), ArgumentError);
}

TEST(Sampling, ModeFrequenciesUniform) {
  RandomSource rng(6);
  const std::size_t m = 4, count = 10000;
  std::vector<Matrix> mats(m, Matrix::identity(2));
  const SampleSet s = sample_observations(SwitchedLinearSystem(2, mats), count, rng);
  std::vector<int> freq(m, 0);
  for (const auto& p : s.pairs) {
    ASSERT_GE(p.mode, 1u);
    ASSERT_LE(p.mode, m);
    ++freq[p.mode - 1];
  }
  const double mean = static_cast<double>(count) / m;
  const double sd = std::sqrt(count * (1.0 / m) * (1.0 - 1.0 / m));
  for (int f : freq) EXPECT_LE(std::abs(f - mean), 3 * sd);
}

TEST(Sampling, SameSeedSameSamples) {
  RandomSource g(7);
  const auto sys = generate_stable_system(3, 3, 0.9, g);
  RandomSource a(100), b(100), c(101);
  const SampleSet sa = sample_observations(sys, 50, a);
  EXPECT_EQ(sa, sample_observations(sys, 50, b));
  EXPECT_NE(sa, sample_observations(sys, 50, c));
  EXPECT_EQ(sa.seed, 100u);
}

TEST(Trajectory, Examples) {
  const SwitchedLinearSystem half(2, {scaled_identity(2, 0.5)});
  const Vec x0{1.0, -2.0};
  const auto empty = trajectory(half, x0, {});
  ASSERT_EQ(empty.size(), 1u);
  EXPECT_EQ(empty[0], x0);
  const std::vector<std::size_t> modes{1, 1};
  const auto xs = trajectory(half, x0, modes);
  ASSERT_EQ(xs.size(), 3u);
  EXPECT_EQ(xs[1], (Vec{0.5, -1.0}));
  EXPECT_EQ(xs[2], (Vec{0.25, -0.5}));
  const std::vector<std::size_t> bad{2};
  EXPECT_THROW(trajectory(half, x0, bad), ArgumentError);
}

TEST(Trajectory, MatchesMatrixProduct) {
  RandomSource rng(8);
  const auto sys = generate_stable_system(4, 3, 0.95, rng);
  std::vector<std::size_t> modes;
  for (int i = 0; i < 12; ++i) modes.push_back(1 + rng.below(3));
  const Vec x0 = sample_unit_sphere(4, rng);
  Matrix prod = Matrix::identity(4);
  for (std::size_t s : modes) prod = sys.mode(s) * prod;
  const Vec expected = prod.apply(x0);
  const Vec end = trajectory(sys, x0, modes).back();
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(end[i], expected[i], 1e-12);
}
