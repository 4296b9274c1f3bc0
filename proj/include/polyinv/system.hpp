#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "polyinv/cone_min_norm.hpp"
#include "polyinv/errors.hpp"
#include "polyinv/linalg.hpp"
#include "polyinv/random.hpp"

namespace polyinv {

/// x(t+1) = A_{sigma(t)} x(t) with modes numbered 1..M.
class SwitchedLinearSystem {
public:
  SwitchedLinearSystem(std::size_t n, std::vector<Matrix> modes) : n_(n), modes_(std::move(modes)) {
    if (n_ < 1) throw ValidationError("system: dimension must be positive");
    if (modes_.empty()) throw ValidationError("system: at least one mode required");
    for (const Matrix& a : modes_) {
      if (a.rows() != n_ || a.cols() != n_)
        throw ValidationError("system: mode matrix is not n x n");
      if (!all_finite(a.data())) throw ValidationError("system: non-finite matrix entry");
    }
  }

  std::size_t dim() const noexcept { return n_; }
  std::size_t mode_count() const noexcept { return modes_.size(); }

  /// Ground-truth matrices. Only validation code (model-based oracle,
  /// empirical checks) may read these; the data-driven pipeline works on
  /// SampleSet alone.
  const std::vector<Matrix>& matrices() const noexcept { return modes_; }
  const Matrix& mode(std::size_t sigma) const {
    if (sigma < 1 || sigma > modes_.size()) throw ArgumentError("system: mode index out of range");
    return modes_[sigma - 1];
  }

  Vec step(std::span<const double> x, std::size_t sigma) const { return mode(sigma).apply(x); }

  bool operator==(const SwitchedLinearSystem&) const = default;

private:
  std::size_t n_;
  std::vector<Matrix> modes_;
};

/// One observation: x on the unit sphere, the active mode, and y = A_sigma x.
struct SamplePair {
  Vec x;
  std::size_t mode = 1;
  Vec y;

  bool operator==(const SamplePair&) const = default;
};

struct SampleSet {
  std::size_t n = 0;
  std::size_t modes = 0;
  std::uint64_t seed = 0;
  std::vector<SamplePair> pairs;

  std::size_t size() const noexcept { return pairs.size(); }
  bool operator==(const SampleSet&) const = default;
};

/// Max over all length-3 mode products of ||A_i A_j A_k||_2^(1/3).
inline double product_norm_bound(const SwitchedLinearSystem& sys) {
  const auto& a = sys.matrices();
  double c = 0.0;
  for (const Matrix& ai : a)
    for (const Matrix& aj : a) {
      const Matrix p2 = ai * aj;
      for (const Matrix& ak : a) c = std::max(c, spectral_norm(p2 * ak));
    }
  return std::cbrt(c);
}

/// Random system whose length-3 product norms are at most decay^3, so the
/// joint spectral radius is at most decay. Entries are drawn N(0,1) row by
/// row, mode by mode, then every matrix is scaled by decay / product_norm_bound.
inline SwitchedLinearSystem generate_stable_system(std::size_t n, std::size_t modes, double decay,
                                                   RandomSource& rng) {
  if (n < 2 || n > 8) throw ArgumentError("generate_stable_system: n must be in [2, 8]");
  if (modes < 1 || modes > 16) throw ArgumentError("generate_stable_system: M must be in [1, 16]");
  if (!(decay > 0.0 && decay < 1.0)) throw ArgumentError("generate_stable_system: decay must be in (0, 1)");
  std::vector<Matrix> mats;
  for (std::size_t m = 0; m < modes; ++m) {
    Matrix a(n, n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) a(r, c) = rng.normal();
    mats.push_back(std::move(a));
  }
  const double c = product_norm_bound(SwitchedLinearSystem(n, mats));
  for (Matrix& a : mats) a *= decay / c;
  return SwitchedLinearSystem(n, std::move(mats));
}

/// N pairs; for each, x is drawn on the sphere and then the mode uniformly.
inline SampleSet sample_observations(const SwitchedLinearSystem& sys, std::size_t count,
                                     RandomSource& rng) {
  if (count < 1) throw ArgumentError("sample_observations: N must be at least 1");
  SampleSet s;
  s.n = sys.dim();
  s.modes = sys.mode_count();
  s.seed = rng.seed();
  s.pairs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    SamplePair p;
    p.x = sample_unit_sphere(sys.dim(), rng);
    p.mode = 1 + static_cast<std::size_t>(rng.below(sys.mode_count()));
    p.y = sys.step(p.x, p.mode);
    s.pairs.push_back(std::move(p));
  }
  return s;
}

/// States x(0..k) under the given mode sequence.
inline std::vector<Vec> trajectory(const SwitchedLinearSystem& sys, std::span<const double> x0,
                                   std::span<const std::size_t> modes) {
  if (x0.size() != sys.dim()) throw ArgumentError("trajectory: dimension mismatch");
  std::vector<Vec> xs;
  xs.emplace_back(x0.begin(), x0.end());
  for (std::size_t sigma : modes) xs.push_back(sys.step(xs.back(), sigma));
  return xs;
}

}  // namespace polyinv
