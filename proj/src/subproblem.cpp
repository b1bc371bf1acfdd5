#include "scvx/subproblem.hpp"

#include <cmath>
#include <limits>

namespace scvx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

constexpr double kBoxEdgeFraction = 0.999;

SubproblemSolution finalize(const TrustRegionSubproblem& sub, Vector d) {
  const Linearization& lin = sub.lin;
  const double at_zero = lin.psi(lin.g_value);
  SubproblemSolution sol;
  sol.model_value = evaluate_model(lin, d);
  // The LP optimum can land a hair above L(0) through round-off; d = 0 is
  // then an equally valid minimizer.
  if (sol.model_value > at_zero) {
    d.setZero();
    sol.model_value = at_zero;
  }
  sol.predicted_decrease = at_zero - sol.model_value;
  if (sub.radius_infinite && d.size() > 0 &&
      d.lpNorm<Eigen::Infinity>() >=
          kBoxEdgeFraction * sub.effective_radius()) {
    sol.status = SubproblemStatus::kUnbounded;
  }
  sol.step = std::move(d);
  return sol;
}

Vector solve_lp_or_throw(const LpStandardForm& form) {
  try {
    const LpResult<double> res = lp_solve(form.lp);
    if (res.status == LpStatus::kInfeasible) {
      // d = 0 with consistent auxiliaries is always feasible
      throw SubproblemFailure("subproblem LP reported infeasible", Vector());
    }
    if (res.status == LpStatus::kUnbounded) {
      throw SubproblemFailure("subproblem LP reported unbounded", Vector());
    }
    return res.x;
  } catch (const LpIterationLimit& e) {
    Vector best = e.best_point().size() > 0 ? form.step(e.best_point()) : Vector();
    throw SubproblemFailure(e.what(), std::move(best));
  }
}

}  // namespace

double quasi_infinite_radius(const Vector& base_point) {
  const double scale =
      base_point.size() > 0 ? base_point.lpNorm<Eigen::Infinity>() : 0.0;
  return 1e6 * (1.0 + scale);
}

double TrustRegionSubproblem::effective_radius() const {
  return radius_infinite ? quasi_infinite_radius(lin.base_point) : radius;
}

LpStandardForm build_lp(const TrustRegionSubproblem& sub) {
  const Linearization& lin = sub.lin;
  const ConvexOuter& psi = lin.psi;
  require_size(lin.g_value.size(), psi.dim(), "Linearization g_value");
  if (lin.g_jacobian.rows() != psi.dim() ||
      lin.g_jacobian.cols() != lin.dim()) {
    throw DimensionError("build_lp: Jacobian shape does not match");
  }
  const double radius = sub.effective_radius();
  if (!(radius > 0.0)) throw Error("build_lp: radius must be positive");

  LpStandardForm form;
  form.num_steps = lin.dim();
  form.num_eq = psi.eq_range().size();
  form.num_ineq = psi.ineq_range().size();
  const Eigen::Index nd = form.num_steps;
  const Eigen::Index n = nd + 2 * form.num_eq + form.num_ineq;
  const Eigen::Index rows = form.num_eq + form.num_ineq;
  const double lambda = psi.lambda();

  const IndexRange cost = psi.cost_range();
  const IndexRange eq = psi.eq_range();
  const IndexRange ineq = psi.ineq_range();

  LpProblem<double>& lp = form.lp;
  lp.cost = Vector::Constant(n, lambda);
  lp.cost.head(nd) =
      lin.g_jacobian.middleRows(cost.begin, cost.size()).colwise().sum();
  form.objective_offset = lin.g_value.segment(cost.begin, cost.size()).sum();

  lp.A = Matrix::Zero(rows, n);
  lp.row_lower.resize(rows);
  lp.row_upper.resize(rows);
  lp.A.topLeftCorner(form.num_eq, nd) = lin.g_jacobian.middleRows(eq.begin, eq.size());
  lp.A.bottomLeftCorner(form.num_ineq, nd) =
      lin.g_jacobian.middleRows(ineq.begin, ineq.size());
  for (Eigen::Index k = 0; k < form.num_eq; ++k) {
    lp.A(k, form.eq_pos_begin() + k) = -1.0;
    lp.A(k, form.eq_neg_begin() + k) = 1.0;
    lp.row_lower(k) = lp.row_upper(k) = -lin.g_value(eq.begin + k);
  }
  for (Eigen::Index k = 0; k < form.num_ineq; ++k) {
    const Eigen::Index row = form.num_eq + k;
    lp.A(row, form.ineq_aux_begin() + k) = -1.0;
    lp.row_lower(row) = -kInf;
    lp.row_upper(row) = -lin.g_value(ineq.begin + k);
  }

  lp.lower = Vector::Zero(n);
  lp.upper = Vector::Constant(n, kInf);
  lp.lower.head(nd).setConstant(-radius);
  lp.upper.head(nd).setConstant(radius);
  return form;
}

Vector LpStandardForm::lift(const Linearization& lin, const Vector& d) const {
  require_size(d.size(), num_steps, "LpStandardForm::lift");
  const Vector c = lin.g_value + lin.g_jacobian * d;
  const Vector ce = c.segment(lin.psi.eq_range().begin, num_eq);
  Vector x(lp.num_variables());
  x.head(num_steps) = d;
  x.segment(eq_pos_begin(), num_eq) = ce.cwiseMax(0.0);
  x.segment(eq_neg_begin(), num_eq) = (-ce).cwiseMax(0.0);
  x.segment(ineq_aux_begin(), num_ineq) =
      c.segment(lin.psi.ineq_range().begin, num_ineq).cwiseMax(0.0);
  return x;
}

double LpStandardForm::model_value(const Vector& x) const {
  return lp.cost.dot(x) + objective_offset;
}

SubproblemSolution solve_subproblem(const TrustRegionSubproblem& sub) {
  const LpStandardForm form = build_lp(sub);
  const Vector x = solve_lp_or_throw(form);
  return finalize(sub, form.step(x));
}

SubproblemSolution solve_min_norm_subproblem(const TrustRegionSubproblem& sub,
                                             double value_tol) {
  const SubproblemSolution first = solve_subproblem(sub);
  if (first.step.size() == 0 || first.step.isZero(0.0)) return first;

  // Append tau >= |d_i| and a cap on the model value, then minimize tau.
  const LpStandardForm base = build_lp(sub);
  const Eigen::Index n = base.lp.num_variables();
  const Eigen::Index nd = base.num_steps;
  const Eigen::Index rows = base.lp.num_rows();
  const Eigen::Index tau = n;

  LpStandardForm form = base;
  LpProblem<double>& lp = form.lp;
  lp.cost = Vector::Zero(n + 1);
  lp.cost(tau) = 1.0;
  lp.A = Matrix::Zero(rows + 1 + 2 * nd, n + 1);
  lp.A.topLeftCorner(rows, n) = base.lp.A;
  lp.row_lower.conservativeResize(rows + 1 + 2 * nd);
  lp.row_upper.conservativeResize(rows + 1 + 2 * nd);
  lp.A.row(rows).head(n) = base.lp.cost.transpose();
  lp.row_lower(rows) = -kInf;
  lp.row_upper(rows) = first.model_value - base.objective_offset +
                       value_tol * (1.0 + std::abs(first.model_value));
  for (Eigen::Index i = 0; i < nd; ++i) {
    // d_i - tau <= 0 and d_i + tau >= 0
    lp.A(rows + 1 + 2 * i, i) = 1.0;
    lp.A(rows + 1 + 2 * i, tau) = -1.0;
    lp.row_lower(rows + 1 + 2 * i) = -kInf;
    lp.row_upper(rows + 1 + 2 * i) = 0.0;
    lp.A(rows + 2 + 2 * i, i) = 1.0;
    lp.A(rows + 2 + 2 * i, tau) = 1.0;
    lp.row_lower(rows + 2 + 2 * i) = 0.0;
    lp.row_upper(rows + 2 + 2 * i) = kInf;
  }
  lp.lower.conservativeResize(n + 1);
  lp.upper.conservativeResize(n + 1);
  lp.lower(tau) = 0.0;
  lp.upper(tau) = kInf;

  Vector x;
  try {
    x = solve_lp_or_throw(form);
  } catch (const SubproblemFailure&) {
    return first;
  }
  SubproblemSolution sol = finalize(sub, form.step(x));
  if (sol.model_value > first.model_value + value_tol * (1.0 + std::abs(first.model_value)) ||
      sol.step.lpNorm<Eigen::Infinity>() > first.step.lpNorm<Eigen::Infinity>()) {
    return first;
  }
  return sol;
}

}  // namespace scvx
