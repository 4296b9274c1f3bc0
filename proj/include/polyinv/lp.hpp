#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "polyinv/errors.hpp"
#include "polyinv/linalg.hpp"

namespace polyinv {

/// minimize objective^T x
/// s.t.     a_ub x <= b_ub,  a_eq x = b_eq,  x >= lower
///
/// `lower` empty means x >= 0. An entry of -infinity makes that variable free.
/// Either constraint block may have zero rows.
struct LinearProgram {
  Vec objective;
  Matrix a_ub;
  Vec b_ub;
  Matrix a_eq;
  Vec b_eq;
  Vec lower;

  std::size_t variables() const noexcept { return objective.size(); }
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  double value = 0.0;
  Vec x;
};

namespace detail {

// Dense two-phase tableau simplex. Pricing is Dantzig's largest coefficient;
// after a streak of degenerate pivots it switches for good to Bland's rule,
// which cannot cycle.
class Tableau {
public:
  static constexpr double kPivotTol = 1e-11;
  static constexpr double kCostTol = 1e-10;
  static constexpr int kDegenerateStreak = 40;
  static constexpr std::size_t kMaxPivots = 50000;

  Tableau(std::size_t rows, std::size_t cols)
      : m_(rows), n_(cols), t_((rows + 1) * (cols + 1), 0.0), basis_(rows, 0) {}

  double& at(std::size_t r, std::size_t c) { return t_[r * (n_ + 1) + c]; }
  double at(std::size_t r, std::size_t c) const { return t_[r * (n_ + 1) + c]; }
  double& rhs(std::size_t r) { return at(r, n_); }
  double& cost(std::size_t c) { return at(m_, c); }

  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }
  std::vector<std::size_t>& basis() { return basis_; }

  void pivot(std::size_t pr, std::size_t pc) {
    const double p = at(pr, pc);
    for (std::size_t c = 0; c <= n_; ++c) at(pr, c) /= p;
    for (std::size_t r = 0; r <= m_; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c <= n_; ++c) at(r, c) -= f * at(pr, c);
      at(r, pc) = 0.0;
    }
    basis_[pr] = pc;
  }

  /// Runs simplex iterations on columns [0, active_cols). Returns false when
  /// the objective is unbounded below.
  bool optimize(std::size_t active_cols) {
    bool bland = false;
    int degenerate = 0;
    for (std::size_t it = 0; it < kMaxPivots; ++it) {
      std::size_t enter = active_cols;
      double best = -kCostTol;
      for (std::size_t c = 0; c < active_cols; ++c) {
        const double rc = cost(c);
        if (rc < best) {
          enter = c;
          if (bland) break;
          best = rc;
        }
      }
      if (enter == active_cols) return true;

      // Two-pass ratio test: find the smallest ratio, then among rows within
      // a hair of it take the largest pivot (Bland order once cycling is
      // suspected).
      double ratio = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < m_; ++r) {
        const double a = at(r, enter);
        if (a > kPivotTol) ratio = std::min(ratio, std::max(0.0, rhs(r)) / a);
      }
      std::size_t leave = m_;
      double best_pivot = 0.0;
      for (std::size_t r = 0; r < m_ && std::isfinite(ratio); ++r) {
        const double a = at(r, enter);
        if (a <= kPivotTol) continue;
        const double q = std::max(0.0, rhs(r)) / a;
        if (q > ratio + 1e-12 * std::max(1.0, ratio)) continue;
        const bool take = leave == m_ || (bland ? basis_[r] < basis_[leave] : a > best_pivot);
        if (take) {
          leave = r;
          best_pivot = a;
        }
      }
      if (leave == m_) return false;
      if (ratio <= 1e-14) {
        if (++degenerate >= kDegenerateStreak) bland = true;
      } else {
        degenerate = 0;
      }
      pivot(leave, enter);
    }
    throw NumericalFailure("simplex: pivot limit exceeded (cycling guard)");
  }

private:
  std::size_t m_, n_;
  std::vector<double> t_;
  std::vector<std::size_t> basis_;
};

}  // namespace detail

inline LpResult solve_lp(const LinearProgram& lp) {
  const std::size_t nv = lp.variables();
  const std::size_t n_ub = lp.b_ub.size();
  const std::size_t n_eq = lp.b_eq.size();
  if ((n_ub > 0 && (lp.a_ub.rows() != n_ub || lp.a_ub.cols() != nv)) ||
      (n_eq > 0 && (lp.a_eq.rows() != n_eq || lp.a_eq.cols() != nv)) ||
      (!lp.lower.empty() && lp.lower.size() != nv))
    throw ArgumentError("solve_lp: inconsistent dimensions");

  // Column map: each variable gets a shifted nonnegative column, free
  // variables get an extra negative part.
  Vec lower = lp.lower.empty() ? Vec(nv, 0.0) : lp.lower;
  std::vector<std::size_t> pos_col(nv), neg_col(nv, SIZE_MAX);
  std::size_t ncol = 0;
  for (std::size_t j = 0; j < nv; ++j) {
    pos_col[j] = ncol++;
    if (!std::isfinite(lower[j])) {
      if (lower[j] > 0) throw ArgumentError("solve_lp: lower bound +infinity");
      neg_col[j] = ncol++;
      lower[j] = 0.0;
    }
  }
  const std::size_t slack0 = ncol;
  const std::size_t structural = ncol + n_ub;
  const std::size_t m = n_ub + n_eq;
  const std::size_t total = structural + m;  // + one artificial per row

  detail::Tableau tab(m, total);
  for (std::size_t i = 0; i < m; ++i) {
    const bool ub = i < n_ub;
    std::span<const double> arow = ub ? lp.a_ub.row(i) : lp.a_eq.row(i - n_ub);
    double b = ub ? lp.b_ub[i] : lp.b_eq[i - n_ub];
    b -= dot(arow, lower);
    const double sgn = b < 0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < nv; ++j) {
      tab.at(i, pos_col[j]) = sgn * arow[j];
      if (neg_col[j] != SIZE_MAX) tab.at(i, neg_col[j]) = -sgn * arow[j];
    }
    if (ub) tab.at(i, slack0 + i) = sgn;
    tab.at(i, structural + i) = 1.0;
    tab.rhs(i) = sgn * b;
    tab.basis()[i] = structural + i;
  }

  // Original rows, kept to recompute the final basic solution.
  Matrix a0(m, total);
  Vec b0(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t c = 0; c < total; ++c) a0(i, c) = tab.at(i, c);
    b0[i] = tab.rhs(i);
  }

  // Phase 1: minimize the sum of artificials.
  for (std::size_t c = 0; c <= total; ++c) {
    if (c >= structural && c < total) continue;
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s -= tab.at(i, c);
    tab.cost(c) = s;
  }
  tab.optimize(total);
  double scale_b = 1.0;
  for (std::size_t i = 0; i < m; ++i) scale_b = std::max(scale_b, std::abs(tab.rhs(i)));
  if (-tab.cost(total) > 1e-9 * scale_b) return {LpStatus::infeasible, 0.0, {}};

  // Drive remaining artificials out of the basis; rows where that is
  // impossible are redundant and get zeroed.
  for (std::size_t i = 0; i < m; ++i) {
    if (tab.basis()[i] < structural) continue;
    std::size_t pc = structural;
    double best = 1e-9;
    for (std::size_t c = 0; c < structural; ++c)
      if (std::abs(tab.at(i, c)) > best) {
        best = std::abs(tab.at(i, c));
        pc = c;
      }
    if (pc < structural) {
      tab.pivot(i, pc);
    } else {
      for (std::size_t c = 0; c <= total; ++c) tab.at(i, c) = 0.0;
      tab.at(i, tab.basis()[i]) = 1.0;
    }
  }

  // Phase 2 objective over the structural columns.
  Vec cost(structural, 0.0);
  for (std::size_t j = 0; j < nv; ++j) {
    cost[pos_col[j]] = lp.objective[j];
    if (neg_col[j] != SIZE_MAX) cost[neg_col[j]] = -lp.objective[j];
  }
  for (std::size_t c = 0; c <= total; ++c) tab.cost(c) = 0.0;
  for (std::size_t c = 0; c < structural; ++c) tab.cost(c) = cost[c];
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t b = tab.basis()[i];
    if (b >= structural) continue;
    const double cb = cost[b];
    if (cb == 0.0) continue;
    for (std::size_t c = 0; c <= total; ++c) tab.cost(c) -= cb * tab.at(i, c);
  }
  if (!tab.optimize(structural)) return {LpStatus::unbounded, 0.0, {}};

  Vec col(structural, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (tab.basis()[i] < structural) col[tab.basis()[i]] = tab.rhs(i);
  // The tableau drifts over many pivots; re-solve B z = b on the original
  // rows for the final basis and keep it if it is at least as accurate.
  if (m > 0) {
    Matrix basis_mat(m, m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t k = 0; k < m; ++k) basis_mat(i, k) = a0(i, tab.basis()[k]);
    try {
      const Vec z = least_squares(basis_mat, b0);
      auto residual = [&](const Vec& c) {
        double worst = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          double r = -b0[i];
          for (std::size_t k = 0; k < m; ++k) {
            const std::size_t bc = tab.basis()[k];
            r += a0(i, bc) * (bc < structural ? c[bc] : 0.0);
          }
          worst = std::max(worst, std::abs(r));
        }
        return worst;
      };
      Vec refined(structural, 0.0);
      bool artificial_active = false;
      for (std::size_t k = 0; k < m; ++k) {
        if (tab.basis()[k] < structural)
          refined[tab.basis()[k]] = std::max(0.0, z[k]);
        else if (std::abs(z[k]) > 1e-12 * scale_b)
          artificial_active = true;
      }
      if (!artificial_active && residual(refined) <= residual(col)) col = std::move(refined);
    } catch (const NumericalFailure&) {
    }
  }
  Vec x(nv);
  for (std::size_t j = 0; j < nv; ++j) {
    x[j] = lower[j] + col[pos_col[j]];
    if (neg_col[j] != SIZE_MAX) x[j] -= col[neg_col[j]];
  }

  // Accuracy guard: a solution that visibly violates a constraint is reported
  // as a failure rather than returned.
  const double tol = 1e-7 * scale_b;
  for (std::size_t i = 0; i < n_ub; ++i)
    if (dot(lp.a_ub.row(i), x) - lp.b_ub[i] > tol)
      throw NumericalFailure("simplex: returned point violates an inequality");
  for (std::size_t i = 0; i < n_eq; ++i)
    if (std::abs(dot(lp.a_eq.row(i), x) - lp.b_eq[i]) > tol)
      throw NumericalFailure("simplex: returned point violates an equality");
  return {LpStatus::optimal, dot(lp.objective, x), std::move(x)};
}

}  // namespace polyinv
