#include "scvx/composite.hpp"

#include <algorithm>
#include <cmath>

namespace scvx {

Vector SmoothMap::value(const Vector& z) const {
  require_size(z.size(), input_dim, "SmoothMap::value input");
  require_finite(z, "SmoothMap::value input");
  Vector out = evaluate(z);
  require_size(out.size(), output_dim, "SmoothMap::value output");
  require_finite(out, "SmoothMap::value output");
  return out;
}

Matrix SmoothMap::jacobian_at(const Vector& z) const {
  require_size(z.size(), input_dim, "SmoothMap::jacobian input");
  require_finite(z, "SmoothMap::jacobian input");
  Matrix jac = jacobian(z);
  if (jac.rows() != output_dim || jac.cols() != input_dim) {
    throw DimensionError("SmoothMap::jacobian: expected " +
                         std::to_string(output_dim) + "x" +
                         std::to_string(input_dim) + ", got " +
                         std::to_string(jac.rows()) + "x" +
                         std::to_string(jac.cols()));
  }
  for (Eigen::Index j = 0; j < jac.cols(); ++j) {
    for (Eigen::Index i = 0; i < jac.rows(); ++i) {
      if (!std::isfinite(jac(i, j))) {
        throw NonFiniteError("SmoothMap::jacobian: non-finite entry in column " +
                                 std::to_string(j),
                             i);
      }
    }
  }
  return jac;
}

ConvexOuter::ConvexOuter(Eigen::Index n_cost, Eigen::Index n_eq,
                         Eigen::Index n_ineq, double lambda)
    : cost_{0, n_cost},
      eq_{n_cost, n_cost + n_eq},
      ineq_{n_cost + n_eq, n_cost + n_eq + n_ineq},
      lambda_(lambda) {
  if (n_cost < 0 || n_eq < 0 || n_ineq < 0) {
    throw DimensionError("ConvexOuter: negative component count");
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw Error("ConvexOuter: penalty weight must be positive and finite");
  }
}

double ConvexOuter::smooth_cost(const Vector& c) const {
  return c.segment(cost_.begin, cost_.size()).sum();
}

double ConvexOuter::penalty(const Vector& c) const {
  const double eq = c.segment(eq_.begin, eq_.size()).cwiseAbs().sum();
  const double ineq =
      c.segment(ineq_.begin, ineq_.size()).cwiseMax(0.0).sum();
  return lambda_ * (eq + ineq);
}

double ConvexOuter::operator()(const Vector& c) const {
  require_size(c.size(), dim(), "ConvexOuter argument");
  return smooth_cost(c) + penalty(c);
}

double evaluate_objective(const CompositeObjective& obj, const Vector& z) {
  require_size(obj.g.output_dim, obj.psi.dim(), "CompositeObjective G/psi");
  return obj.psi(obj.g.value(z));
}

Linearization linearize(const CompositeObjective& obj, const Vector& z) {
  require_size(obj.g.output_dim, obj.psi.dim(), "CompositeObjective G/psi");
  return Linearization{z, obj.g.value(z), obj.g.jacobian_at(z), obj.psi};
}

double evaluate_model(const Linearization& lin, const Vector& d) {
  require_size(d.size(), lin.dim(), "evaluate_model step");
  require_finite(d, "evaluate_model step");
  return lin.psi(lin.g_value + lin.g_jacobian * d);
}

double fd_check_jacobian(const SmoothMap& map, const Vector& z, double step) {
  if (!(step > 0.0)) throw Error("fd_check_jacobian: step must be positive");
  const Matrix analytic = map.jacobian_at(z);
  double worst = 0.0;
  Vector probe = z;
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    const double h = step * (1.0 + std::abs(z(j)));
    probe(j) = z(j) + h;
    const Vector plus = map.value(probe);
    probe(j) = z(j) - h;
    const Vector minus = map.value(probe);
    probe(j) = z(j);
    // (z+h) - (z-h) is not exactly 2h in floating point
    const double width = (z(j) + h) - (z(j) - h);
    const Vector column = (plus - minus) / width;
    const Vector err = (analytic.col(j) - column).cwiseAbs().cwiseQuotient(
        (1.0 + analytic.col(j).array().abs()).matrix());
    if (err.size() > 0) worst = std::max(worst, err.maxCoeff());
  }
  return worst;
}

}  // namespace scvx
