#pragma once

#include <functional>

#include "scvx/types.hpp"

namespace scvx {

/// Half-open range [begin, end) of output indices of a smooth map.
struct IndexRange {
  Eigen::Index begin = 0;
  Eigen::Index end = 0;

  Eigen::Index size() const { return end - begin; }
  bool contains(Eigen::Index i) const { return begin <= i && i < end; }
};

/// A C^1 map G : R^n -> R^m with an analytic Jacobian.
///
/// `value` and `jacobian` check dimensions and finiteness; the raw callables
/// are exposed for code (finite differencing, tests) that wants to bypass
/// those checks.
struct SmoothMap {
  Eigen::Index input_dim = 0;
  Eigen::Index output_dim = 0;
  std::function<Vector(const Vector&)> evaluate;
  std::function<Matrix(const Vector&)> jacobian;

  Vector value(const Vector& z) const;
  Matrix jacobian_at(const Vector& z) const;
};

/// The convex outer function of the exact-penalty objective,
///
///   psi(c) = sum_{i in cost} c_i + lambda * sum_{i in eq} |c_i|
///            + lambda * sum_{i in ineq} max(0, c_i).
///
/// Components are laid out contiguously as [cost | eq | ineq].
class ConvexOuter {
 public:
  ConvexOuter() = default;
  ConvexOuter(Eigen::Index n_cost, Eigen::Index n_eq, Eigen::Index n_ineq,
              double lambda);

  const IndexRange& cost_range() const { return cost_; }
  const IndexRange& eq_range() const { return eq_; }
  const IndexRange& ineq_range() const { return ineq_; }
  Eigen::Index dim() const { return ineq_.end; }
  double lambda() const { return lambda_; }

  /// Lipschitz constant of psi with respect to the 1-norm.
  double lipschitz_constant() const { return std::max(1.0, lambda_); }

  double operator()(const Vector& c) const;

  /// The smooth-cost part of psi alone.
  double smooth_cost(const Vector& c) const;
  /// lambda times the equality and inequality violations.
  double penalty(const Vector& c) const;

 private:
  IndexRange cost_;
  IndexRange eq_;
  IndexRange ineq_;
  double lambda_ = 1.0;
};

/// J(z) = psi(G(z)).
struct CompositeObjective {
  SmoothMap g;
  ConvexOuter psi;

  Eigen::Index dim() const { return g.input_dim; }
};

/// First-order model of a composite objective at `base_point`:
/// L(d) = psi(g_value + g_jacobian * d).
struct Linearization {
  Vector base_point;
  Vector g_value;
  Matrix g_jacobian;
  ConvexOuter psi;

  Eigen::Index dim() const { return base_point.size(); }
};

double evaluate_objective(const CompositeObjective& obj, const Vector& z);

Linearization linearize(const CompositeObjective& obj, const Vector& z);

double evaluate_model(const Linearization& lin, const Vector& d);

/// Largest entrywise |analytic - central difference| / (1 + |analytic|).
/// The difference step for coordinate i is step * (1 + |z_i|).
double fd_check_jacobian(const SmoothMap& map, const Vector& z,
                         double step = 1e-6);

}  // namespace scvx
