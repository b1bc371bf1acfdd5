#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "grid_oracle.hpp"
#include "scvx/subproblem.hpp"

namespace scvx {
namespace {

// L(d) = lambda |2 + d| in one variable.
Linearization shifted_abs(double lambda = 1.0) {
  Linearization lin;
  lin.base_point = Vector::Zero(1);
  lin.g_value = Vector::Constant(1, 2.0);
  lin.g_jacobian = Matrix::Ones(1, 1);
  lin.psi = ConvexOuter(0, 1, 0, lambda);
  return lin;
}

Linearization random_model(std::mt19937_64& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Linearization lin;
  lin.base_point = Vector::Zero(n);
  lin.psi = ConvexOuter(1, 2, 2, 3.0);
  lin.g_value.resize(5);
  lin.g_jacobian.resize(5, n);
  for (int r = 0; r < 5; ++r) {
    lin.g_value(r) = unit(rng);
    for (Eigen::Index c = 0; c < n; ++c) lin.g_jacobian(r, c) = unit(rng);
  }
  return lin;
}

TEST(Subproblem, AbsoluteValueExamples) {
  const Linearization lin = shifted_abs();
  const SubproblemSolution unit = solve_subproblem({lin, 1.0});
  EXPECT_NEAR(unit.step(0), -1.0, 1e-12);
  EXPECT_NEAR(unit.model_value, 1.0, 1e-12);
  EXPECT_NEAR(unit.predicted_decrease, 1.0, 1e-12);

  const SubproblemSolution wide = solve_subproblem({lin, 5.0});
  EXPECT_NEAR(wide.step(0), -2.0, 1e-12);
  EXPECT_NEAR(wide.model_value, 0.0, 1e-12);
}

TEST(Subproblem, MatchesGridOnGridExactInstances) {
  std::mt19937_64 rng(101);
  for (int t = 0; t < 30; ++t) {
    const testing::GridExactInstance inst = testing::grid_exact_instance(rng);
    const SubproblemSolution sol = solve_subproblem({inst.lin, inst.radius});
    const testing::GridMinimum grid = testing::grid_minimum(inst.lin, inst.radius);
    EXPECT_NEAR(sol.model_value, grid.value, 1e-9) << "instance " << t;
    EXPECT_NEAR(evaluate_model(inst.lin, sol.step), sol.model_value, 1e-10);
    EXPECT_LE(sol.step.lpNorm<Eigen::Infinity>(), inst.radius * (1 + 1e-12));
  }
}

TEST(Subproblem, BracketedByGridOnGenericInstances) {
  // Off the grid the brute force can only be within Lip * h / 2 of the optimum.
  std::mt19937_64 rng(202);
  for (int t = 0; t < 30; ++t) {
    const Linearization lin = random_model(rng, 1 + t % 3);
    const double radius = 0.5;
    const SubproblemSolution sol = solve_subproblem({lin, radius});
    const testing::GridMinimum grid = testing::grid_minimum(lin, radius);
    const double h = 2 * radius / 40;
    EXPECT_LE(sol.model_value, grid.value + 1e-10);
    EXPECT_GE(sol.model_value, grid.value - testing::model_lipschitz(lin) * h / 2);
  }
}

TEST(Subproblem, TwoVariableExample) {
  // L(d) = d1 + 2 |d1 - d2 - 0.3| + 2 max(0, -d2 - 0.5) over |d| <= 1.
  Linearization lin;
  lin.base_point = Vector::Zero(2);
  lin.psi = ConvexOuter(1, 1, 1, 2.0);
  lin.g_value = Eigen::Vector3d(0.0, -0.3, -0.5);
  lin.g_jacobian.resize(3, 2);
  lin.g_jacobian << 1.0, 0.0, 1.0, -1.0, 0.0, -1.0;
  const SubproblemSolution sol = solve_subproblem({lin, 1.0});
  const testing::GridMinimum grid = testing::grid_minimum(lin, 1.0);
  EXPECT_NEAR(sol.model_value, grid.value, 1e-9);
}

TEST(Subproblem, PredictedDecreaseIsMonotoneInRadius) {
  std::mt19937_64 rng(303);
  for (int t = 0; t < 10; ++t) {
    const Linearization lin = random_model(rng, 3);
    double previous = 0.0;
    for (double r : {1e-3, 1e-2, 0.1, 0.5, 1.0, 4.0}) {
      const SubproblemSolution sol = solve_subproblem({lin, r});
      EXPECT_GE(sol.predicted_decrease, previous - 1e-12);
      EXPECT_GE(sol.predicted_decrease, 0.0);
      previous = sol.predicted_decrease;
    }
  }
}

TEST(Subproblem, ConcaveInRadius) {
  // pd(r) is concave with pd(0) = 0, so pd(r) / r is non-increasing.
  std::mt19937_64 rng(404);
  const Linearization lin = random_model(rng, 2);
  double previous = std::numeric_limits<double>::infinity();
  for (double r : {1e-3, 1e-2, 0.1, 1.0}) {
    const double ratio = solve_subproblem({lin, r}).predicted_decrease / r;
    EXPECT_LE(ratio, previous + 1e-9);
    previous = ratio;
  }
}

TEST(LpStandardForm, LiftRoundTripsTheModelValue) {
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    const Linearization lin = random_model(rng, 3);
    const TrustRegionSubproblem sub{lin, 1.0};
    const LpStandardForm form = build_lp(sub);
    EXPECT_EQ(form.num_steps, 3);
    EXPECT_EQ(form.num_eq, 2);
    EXPECT_EQ(form.num_ineq, 2);
    EXPECT_EQ(form.lp.num_variables(), 3 + 2 * 2 + 2);
    Vector d(3);
    for (int i = 0; i < 3; ++i) d(i) = unit(rng);
    const Vector x = form.lift(lin, d);
    EXPECT_EQ(form.step(x), d);
    EXPECT_NEAR(form.model_value(x), evaluate_model(lin, d), 1e-12);
    const Vector activity = form.lp.A * x;
    EXPECT_TRUE((activity.array() >= form.lp.row_lower.array() - 1e-12).all());
    EXPECT_TRUE((activity.array() <= form.lp.row_upper.array() + 1e-12).all());
  }
}

TEST(Subproblem, RejectsNonPositiveOrNonFiniteRadius) {
  const Linearization lin = shifted_abs();
  EXPECT_THROW(solve_subproblem({lin, 0.0}), Error);
  EXPECT_THROW(solve_subproblem({lin, -1.0}), Error);
  EXPECT_THROW(solve_subproblem({lin, std::nan("")}), Error);
}

TEST(Subproblem, QuasiInfiniteRadiusScalesWithBasePoint) {
  Vector z(2);
  z << 3.0, -7.0;
  EXPECT_DOUBLE_EQ(quasi_infinite_radius(z), 8e6);
  const Linearization lin = shifted_abs();
  const TrustRegionSubproblem sub{lin, 1.0, true};
  EXPECT_DOUBLE_EQ(sub.effective_radius(), 1e6);
}

TEST(MinNormSubproblem, PicksLeastNormAmongMinimizers) {
  // L(d) = |d1 - 0.25| in two variables: d2 is free, so the plain LP may
  // return any d2; the least-norm minimizer has d2 = 0.
  Linearization lin;
  lin.base_point = Vector::Zero(2);
  lin.psi = ConvexOuter(0, 1, 0, 1.0);
  lin.g_value = Vector::Constant(1, -0.25);
  lin.g_jacobian.resize(1, 2);
  lin.g_jacobian << 1.0, 0.0;
  const SubproblemSolution sol = solve_min_norm_subproblem({lin, 1.0, true});
  ASSERT_EQ(sol.status, SubproblemStatus::kOptimal);
  EXPECT_NEAR(sol.step(0), 0.25, 1e-9);
  EXPECT_NEAR(sol.step(1), 0.0, 1e-9);
  EXPECT_NEAR(sol.model_value, 0.0, 1e-9);
}

TEST(MinNormSubproblem, FlagsModelsUnboundedBelow) {
  // L(d) = d: the minimizer runs to the edge of the quasi-infinite box.
  Linearization lin;
  lin.base_point = Vector::Zero(1);
  lin.psi = ConvexOuter(1, 0, 0, 1.0);
  lin.g_value = Vector::Zero(1);
  lin.g_jacobian = Matrix::Ones(1, 1);
  const SubproblemSolution sol = solve_min_norm_subproblem({lin, 1.0, true});
  EXPECT_EQ(sol.status, SubproblemStatus::kUnbounded);
}

}  // namespace
}  // namespace scvx
