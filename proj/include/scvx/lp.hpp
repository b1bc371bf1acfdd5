#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include "scvx/types.hpp"

namespace scvx {

/// Dense linear program in bounded general form
///
///   minimize    cost' x
///   subject to  row_lower <= A x <= row_upper,   lower <= x <= upper.
///
/// Any bound may be infinite; equal row bounds make an equality row.
template <typename Scalar>
struct LpProblem {
  using VectorS = Eigen::Vector<Scalar, Eigen::Dynamic>;
  using MatrixS = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  VectorS cost;
  MatrixS A;
  VectorS row_lower;
  VectorS row_upper;
  VectorS lower;
  VectorS upper;

  Eigen::Index num_variables() const { return cost.size(); }
  Eigen::Index num_rows() const { return A.rows(); }

  /// minimize cost' x subject to A x <= b and the variable bounds.
  static LpProblem from_inequalities(VectorS cost, MatrixS A, const VectorS& b,
                                     VectorS lower, VectorS upper) {
    LpProblem lp;
    lp.cost = std::move(cost);
    lp.A = std::move(A);
    lp.row_lower =
        VectorS::Constant(b.size(), -std::numeric_limits<Scalar>::infinity());
    lp.row_upper = b;
    lp.lower = std::move(lower);
    lp.upper = std::move(upper);
    return lp;
  }
};

enum class LpStatus { kOptimal, kUnbounded, kInfeasible };

template <typename Scalar>
struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  Eigen::Vector<Scalar, Eigen::Dynamic> x;
  Scalar objective = 0;
  int iterations = 0;
  bool used_bland = false;
};

template <typename Scalar>
struct LpOptions {
  /// Largest bound violation a basic variable may carry (Harris ratio test).
  Scalar feasibility_tol = Scalar(1e-12);
  Scalar optimality_tol = Scalar(1e-9);
  Scalar pivot_tol = Scalar(1e-9);
  /// Consecutive degenerate pivots after which Bland's rule takes over.
  int degenerate_limit = 50;
  /// Pivots between refactorizations of the basis.
  int refactor_interval = 64;
  /// 0 means 50 * (structural variables + rows).
  int max_iterations = 0;
  bool bland_only = false;
};

/// Raised when the simplex iteration cap is hit. Carries the best feasible
/// point found (empty if phase one never finished).
class LpIterationLimit : public Error {
 public:
  LpIterationLimit(const std::string& what, Vector best_point)
      : Error(what), best_point_(std::move(best_point)) {}
  const Vector& best_point() const { return best_point_; }

 private:
  Vector best_point_;
};

namespace detail {

/// Bounded-variable primal simplex on a dense tableau.
///
/// Internally each row gets an activity column r_i = (A x)_i carrying the row
/// bounds, so the constraints read A x - r = 0. The starting basis is a crash
/// basis of column singletons: the activity if the start point satisfies the
/// row, else a structural that appears only in that row and can absorb the
/// residual, else an artificial. Nonbasic variables sit at a bound, or at
/// zero when zero lies strictly inside their bounds. The tableau is rebuilt
/// from the original data every refactor_interval pivots.
template <typename Scalar>
class DenseSimplex {
 public:
  using VectorS = Eigen::Vector<Scalar, Eigen::Dynamic>;
  using MatrixS = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  DenseSimplex(const LpProblem<Scalar>& lp, const LpOptions<Scalar>& opts)
      : lp_(lp), opts_(opts) {}

  LpResult<Scalar> solve() {
    validate();
    setup();
    LpResult<Scalar> result;

    if (num_art_ > 0) {
      VectorS phase1_cost = VectorS::Zero(cols_);
      phase1_cost.tail(num_art_).setOnes();
      iterate(phase1_cost, /*phase_two=*/false);  // bounded below by zero
      refresh_values();
      const Scalar infeasibility = x_.tail(num_art_).sum();
      const Scalar scale =
          1 + std::max(finite_max(lp_.row_lower), finite_max(lp_.row_upper));
      if (infeasibility > opts_.feasibility_tol * scale) {
        result.status = LpStatus::kInfeasible;
        finish(result);
        return result;
      }
      for (Eigen::Index j = n_ + m_; j < cols_; ++j) {
        upper_(j) = 0;
        if (!is_basic_[j]) x_(j) = 0;
      }
    }

    VectorS phase2_cost = VectorS::Zero(cols_);
    phase2_cost.head(n_) = lp_.cost;
    result.status = iterate(phase2_cost, /*phase_two=*/true);
    refresh_values();
    finish(result);
    return result;
  }

 private:
  static constexpr Scalar kInf = std::numeric_limits<Scalar>::infinity();

  static Scalar finite_max(const VectorS& v) {
    Scalar out = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (std::isfinite(v(i))) out = std::max(out, std::abs(v(i)));
    }
    return out;
  }

  void validate() const {
    const auto n = lp_.cost.size();
    require_size(lp_.A.cols(), n, "LpProblem::A columns");
    require_size(lp_.row_lower.size(), lp_.A.rows(), "LpProblem::row_lower");
    require_size(lp_.row_upper.size(), lp_.A.rows(), "LpProblem::row_upper");
    require_size(lp_.lower.size(), n, "LpProblem::lower");
    require_size(lp_.upper.size(), n, "LpProblem::upper");
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!(lp_.lower(j) <= lp_.upper(j))) {
        throw Error("LpProblem: empty bound interval for variable " +
                    std::to_string(j));
      }
    }
    for (Eigen::Index i = 0; i < lp_.A.rows(); ++i) {
      if (!(lp_.row_lower(i) <= lp_.row_upper(i))) {
        throw Error("LpProblem: empty bound interval for row " + std::to_string(i));
      }
    }
    if (!lp_.A.allFinite() || !lp_.cost.allFinite()) {
      throw Error("LpProblem: non-finite matrix or cost entry");
    }
  }

  void setup() {
    n_ = lp_.cost.size();
    m_ = lp_.A.rows();

    VectorS x0(n_);
    for (Eigen::Index j = 0; j < n_; ++j) {
      x0(j) = std::clamp(Scalar(0), lp_.lower(j), lp_.upper(j));
    }

    // Singleton columns grouped by their row.
    std::vector<std::vector<Eigen::Index>> singletons(static_cast<std::size_t>(m_));
    for (Eigen::Index j = 0; j < n_; ++j) {
      Eigen::Index count = 0, row = -1;
      for (Eigen::Index i = 0; i < m_ && count < 2; ++i) {
        if (lp_.A(i, j) != 0) {
          ++count;
          row = i;
        }
      }
      if (count == 1) singletons[row].push_back(j);
    }

    // Crash: one basic column per row.
    std::vector<Eigen::Index> chosen(static_cast<std::size_t>(m_), -1);
    const VectorS activity = lp_.A * x0;
    VectorS r_value = activity;
    std::vector<Scalar> art_sign;
    art_rows_.clear();
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Scalar v = activity(i);
      if (v >= lp_.row_lower(i) && v <= lp_.row_upper(i)) {
        chosen[i] = n_ + i;
        continue;
      }
      const Scalar target = v < lp_.row_lower(i) ? lp_.row_lower(i) : lp_.row_upper(i);
      r_value(i) = target;
      for (Eigen::Index j : singletons[i]) {
        const Scalar value = x0(j) + (target - v) / lp_.A(i, j);
        if (value >= lp_.lower(j) && value <= lp_.upper(j)) {
          x0(j) = value;
          chosen[i] = j;
          break;
        }
      }
      if (chosen[i] < 0) {
        art_rows_.push_back(i);
        art_sign.push_back(target > v ? Scalar(1) : Scalar(-1));
      }
    }
    num_art_ = static_cast<Eigen::Index>(art_rows_.size());
    cols_ = n_ + m_ + num_art_;

    lower_.resize(cols_);
    upper_.resize(cols_);
    lower_.head(n_) = lp_.lower;
    upper_.head(n_) = lp_.upper;
    lower_.segment(n_, m_) = lp_.row_lower;
    upper_.segment(n_, m_) = lp_.row_upper;
    lower_.tail(num_art_).setZero();
    upper_.tail(num_art_).setConstant(kInf);

    full_ = MatrixS::Zero(m_, cols_);
    full_.leftCols(n_) = lp_.A;
    full_.middleCols(n_, m_) = -MatrixS::Identity(m_, m_);

    x_.resize(cols_);
    x_.head(n_) = x0;
    x_.segment(n_, m_) = r_value;
    for (Eigen::Index k = 0; k < num_art_; ++k) {
      const Eigen::Index i = art_rows_[k];
      const Eigen::Index col = n_ + m_ + k;
      full_(i, col) = art_sign[k];
      x_(col) = art_sign[k] * (r_value(i) - activity(i));
      chosen[i] = col;
    }
    basis_.assign(chosen.begin(), chosen.end());
    is_basic_.assign(static_cast<std::size_t>(cols_), false);
    for (Eigen::Index b : basis_) is_basic_[b] = true;

    max_iterations_ = opts_.max_iterations > 0
                          ? opts_.max_iterations
                          : static_cast<int>(50 * (n_ + m_));
    bland_ = opts_.bland_only;
  }

  Eigen::PartialPivLU<MatrixS> factor_basis() const {
    MatrixS basis_matrix(m_, m_);
    for (Eigen::Index i = 0; i < m_; ++i) basis_matrix.col(i) = full_.col(basis_[i]);
    return Eigen::PartialPivLU<MatrixS>(basis_matrix);
  }

  VectorS basic_values(const Eigen::PartialPivLU<MatrixS>& lu) const {
    VectorS rhs = VectorS::Zero(m_);
    for (Eigen::Index j = 0; j < cols_; ++j) {
      if (!is_basic_[j] && x_(j) != 0) rhs.noalias() -= x_(j) * full_.col(j);
    }
    return lu.solve(rhs);
  }

  // Recomputes only the basic values from the original data. Enough once
  // the basis is final.
  void refresh_values() {
    if (m_ == 0) return;
    const VectorS xb = basic_values(factor_basis());
    if (!xb.allFinite()) return;
    for (Eigen::Index i = 0; i < m_; ++i) x_(basis_[i]) = xb(i);
  }

  // Rebuilds the tableau, basic values and reduced costs from the original
  // data for the current basis.
  void refactor(const VectorS& cost) {
    since_refactor_ = 0;
    if (m_ > 0) {
      const Eigen::PartialPivLU<MatrixS> lu = factor_basis();
      MatrixS tableau = lu.solve(full_);
      const VectorS xb = basic_values(lu);
      if (tableau.allFinite() && xb.allFinite()) {
        tableau_ = std::move(tableau);
        for (Eigen::Index i = 0; i < m_; ++i) {
          x_(basis_[i]) = xb(i);
          tableau_.col(basis_[i]).setZero();
          tableau_(i, basis_[i]) = 1;
        }
      }
    } else {
      tableau_ = MatrixS::Zero(0, cols_);
    }
    reduced_ = cost.transpose();
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Scalar cb = cost(basis_[i]);
      if (cb != 0) reduced_.noalias() -= cb * tableau_.row(i);
    }
  }

  LpStatus iterate(const VectorS& cost, bool phase_two) {
    refactor(cost);
    int degenerate_run = 0;
    for (;;) {
      if (since_refactor_ >= opts_.refactor_interval) refactor(cost);
      const auto [q, dir] = choose_entering();
      if (q < 0) return LpStatus::kOptimal;

      if (++iterations_ > max_iterations_) {
        throw LpIterationLimit(
            "lp_solve: iteration limit " + std::to_string(max_iterations_) +
                " reached",
            phase_two ? Vector(x_.head(n_).template cast<double>()) : Vector());
      }

      const VectorS column = tableau_.col(q);
      const auto [leave_row, step] = ratio_test(column, dir);
      const Scalar own = dir > 0 ? upper_(q) - x_(q) : x_(q) - lower_(q);
      if (!std::isfinite(own) && leave_row < 0) return LpStatus::kUnbounded;

      if (own <= step) {
        // bound flip, basis unchanged
        x_(q) = dir > 0 ? upper_(q) : lower_(q);
        move_basics(column, dir * own);
        degenerate_run = own <= opts_.feasibility_tol ? degenerate_run + 1 : 0;
      } else {
        x_(q) += dir * step;
        move_basics(column, dir * step);
        const Eigen::Index leaving = basis_[leave_row];
        x_(leaving) = dir * column(leave_row) > 0 ? lower_(leaving) : upper_(leaving);
        pivot(leave_row, q);
        degenerate_run = step <= opts_.feasibility_tol ? degenerate_run + 1 : 0;
      }
      if (degenerate_run > opts_.degenerate_limit) bland_ = true;
    }
  }

  std::pair<Eigen::Index, Scalar> choose_entering() const {
    Eigen::Index best = -1;
    Scalar best_dir = 0;
    Scalar best_score = 0;
    for (Eigen::Index j = 0; j < cols_; ++j) {
      if (is_basic_[j] || lower_(j) == upper_(j)) continue;
      const Scalar rc = reduced_(j);
      Scalar dir = 0;
      if (rc < -opts_.optimality_tol && x_(j) < upper_(j)) {
        dir = 1;
      } else if (rc > opts_.optimality_tol && x_(j) > lower_(j)) {
        dir = -1;
      } else {
        continue;
      }
      if (bland_) return {j, dir};
      if (std::abs(rc) > best_score) {
        best = j;
        best_dir = dir;
        best_score = std::abs(rc);
      }
    }
    return {best, best_dir};
  }

  // Blocking limit of basic row i for a move in direction dir, if it blocks.
  bool row_limit(const VectorS& column, Scalar dir, Eigen::Index i, Scalar slack,
                 Scalar& limit) const {
    const Scalar alpha = dir * column(i);
    const Eigen::Index bi = basis_[i];
    if (alpha > opts_.pivot_tol && std::isfinite(lower_(bi))) {
      limit = (x_(bi) - lower_(bi) + slack) / alpha;
      return true;
    }
    if (alpha < -opts_.pivot_tol && std::isfinite(upper_(bi))) {
      limit = (upper_(bi) - x_(bi) + slack) / -alpha;
      return true;
    }
    return false;
  }

  // Two-pass (Harris) ratio test. The first pass finds the largest step that
  // keeps every basic variable within feasibility_tol of its bounds; the
  // second picks, among rows blocking before that step, the largest pivot
  // (under Bland's rule: the lowest basic index among acceptable pivots).
  // Returns the row and its own unrelaxed limit, or row -1 when nothing
  // blocks.
  std::pair<Eigen::Index, Scalar> ratio_test(const VectorS& column, Scalar dir) const {
    Scalar relaxed = kInf;
    for (Eigen::Index i = 0; i < m_; ++i) {
      Scalar limit;
      if (row_limit(column, dir, i, opts_.feasibility_tol, limit)) {
        relaxed = std::min(relaxed, limit);
      }
    }
    if (!std::isfinite(relaxed)) return {-1, kInf};

    Scalar max_alpha = 0;
    for (Eigen::Index i = 0; i < m_; ++i) {
      Scalar limit;
      if (row_limit(column, dir, i, 0, limit) && limit <= relaxed) {
        max_alpha = std::max(max_alpha, std::abs(column(i)));
      }
    }
    Eigen::Index leave_row = -1;
    Scalar leave_limit = kInf;
    for (Eigen::Index i = 0; i < m_; ++i) {
      Scalar limit;
      if (!row_limit(column, dir, i, 0, limit) || limit > relaxed) continue;
      const Scalar a = std::abs(column(i));
      const bool better =
          bland_ ? a >= Scalar(1e-3) * max_alpha &&
                       (leave_row < 0 || basis_[i] < basis_[leave_row])
                 : leave_row < 0 || a > std::abs(column(leave_row));
      if (better) {
        leave_row = i;
        leave_limit = limit;
      }
    }
    return {leave_row, std::max(leave_limit, Scalar(0))};
  }

  void move_basics(const VectorS& column, Scalar delta) {
    for (Eigen::Index i = 0; i < m_; ++i) x_(basis_[i]) -= delta * column(i);
  }

  void pivot(Eigen::Index row, Eigen::Index col) {
    const VectorS column = tableau_.col(col);
    const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> pivot_row =
        tableau_.row(row) / column(row);
    tableau_.noalias() -= column * pivot_row;
    tableau_.row(row) = pivot_row;
    reduced_.noalias() -= reduced_(col) * pivot_row;
    reduced_(col) = 0;

    is_basic_[basis_[row]] = false;
    basis_[row] = col;
    is_basic_[col] = true;
    ++since_refactor_;
  }

  void finish(LpResult<Scalar>& result) const {
    result.x = x_.head(n_);
    for (Eigen::Index j = 0; j < n_; ++j) {
      result.x(j) = std::clamp(result.x(j), lp_.lower(j), lp_.upper(j));
    }
    result.objective = lp_.cost.dot(result.x);
    result.iterations = iterations_;
    result.used_bland = bland_;
  }

  const LpProblem<Scalar>& lp_;
  LpOptions<Scalar> opts_;
  Eigen::Index n_ = 0, m_ = 0, num_art_ = 0, cols_ = 0;
  std::vector<Eigen::Index> art_rows_;
  MatrixS full_;  ///< [A | -I | artificial columns]
  MatrixS tableau_;
  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> reduced_;
  VectorS x_, lower_, upper_;
  std::vector<Eigen::Index> basis_;
  std::vector<bool> is_basic_;
  int iterations_ = 0;
  int max_iterations_ = 0;
  int since_refactor_ = 0;
  bool bland_ = false;
};

}  // namespace detail

/// Solves a dense LP with a two-phase bounded-variable simplex. Dantzig
/// pricing is used until a run of degenerate pivots is seen, after which
/// Bland's rule takes over.
template <typename Scalar>
LpResult<Scalar> lp_solve(const LpProblem<Scalar>& lp,
                          const LpOptions<Scalar>& options = {}) {
  return detail::DenseSimplex<Scalar>(lp, options).solve();
}

}  // namespace scvx
