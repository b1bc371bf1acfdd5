#pragma once

#include "scvx/composite.hpp"
#include "scvx/lp.hpp"

namespace scvx {

/// min_d L(d) subject to ||d||_inf <= radius.
///
/// With `radius_infinite` set, the radius is replaced by
/// quasi_infinite_radius(lin.base_point).
struct TrustRegionSubproblem {
  const Linearization& lin;
  double radius = 1.0;
  bool radius_infinite = false;

  double effective_radius() const;
};

/// 1e6 * (1 + ||z||_inf): large enough that any step norm of interest is far
/// inside the box.
double quasi_infinite_radius(const Vector& base_point);

enum class SubproblemStatus { kOptimal, kUnbounded };

struct SubproblemSolution {
  Vector step;
  double model_value = 0.0;
  /// J(base) - L(step); non-negative because d = 0 is feasible.
  double predicted_decrease = 0.0;
  SubproblemStatus status = SubproblemStatus::kOptimal;
};

/// Epigraph reformulation of the subproblem. Variables are laid out as
/// [d | p, q (one pair per equality) | s (one per inequality)], with rows
///   a_i' d - p_i + q_i  = -g_i      (so g_i + a_i' d = p_i - q_i),
///   a_j' d - s_j       <= -g_j,
/// bounds |d| <= radius, p, q, s >= 0, and objective
/// sum_cost (g + A d) + lambda * (sum p + sum q + sum s).
struct LpStandardForm {
  LpProblem<double> lp;
  /// Constant term dropped from the LP objective (sum of cost components of
  /// g_value).
  double objective_offset = 0.0;
  Eigen::Index num_steps = 0;
  Eigen::Index num_eq = 0;
  Eigen::Index num_ineq = 0;

  Eigen::Index eq_pos_begin() const { return num_steps; }
  Eigen::Index eq_neg_begin() const { return num_steps + num_eq; }
  Eigen::Index ineq_aux_begin() const { return num_steps + 2 * num_eq; }

  /// Extracts d from an LP variable vector.
  Vector step(const Vector& x) const { return x.head(num_steps); }
  /// The tightest feasible LP point for a given step d.
  Vector lift(const Linearization& lin, const Vector& d) const;
  /// LP objective plus offset, i.e. the model value represented by x.
  double model_value(const Vector& x) const;
};

/// Raised when the LP solve fails. `best_step()` is the best feasible step
/// the solver reached, or empty.
class SubproblemFailure : public Error {
 public:
  SubproblemFailure(const std::string& what, Vector best_step)
      : Error(what), best_step_(std::move(best_step)) {}
  const Vector& best_step() const { return best_step_; }

 private:
  Vector best_step_;
};

LpStandardForm build_lp(const TrustRegionSubproblem& sub);

SubproblemSolution solve_subproblem(const TrustRegionSubproblem& sub);

/// Among the model minimizers (to within `value_tol` of the optimum), returns
/// one of least infinity norm. Used by the small-step probe, where the argmin
/// of the plain subproblem need not be unique.
SubproblemSolution solve_min_norm_subproblem(const TrustRegionSubproblem& sub,
                                             double value_tol = 1e-9);

}  // namespace scvx
