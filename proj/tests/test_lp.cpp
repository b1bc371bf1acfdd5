#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/LU>

#include "scvx/lp.hpp"

namespace scvx {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Oracle: min c'x over {E x = f, A x <= b, lower <= x <= upper} by trying every
// basis of n active constraints (equalities always active). Bounds must be
// finite so that the optimum is at a vertex.
std::optional<double> vertex_enumeration(const Vector& c, const Matrix& E,
                                         const Vector& f, const Matrix& A,
                                         const Vector& b, const Vector& lower,
                                         const Vector& upper) {
  const Eigen::Index n = c.size();
  // Inequalities as rows of G x <= h: A, x <= upper, -x <= -lower.
  Matrix G(A.rows() + 2 * n, n);
  Vector h(A.rows() + 2 * n);
  G << A, Matrix::Identity(n, n), -Matrix::Identity(n, n);
  h << b, upper, -lower;
  const Eigen::Index free = n - E.rows();
  std::optional<double> best;
  std::vector<int> pick(static_cast<std::size_t>(free));
  // all increasing index tuples of length `free`
  std::function<void(int, int)> recurse = [&](int depth, int start) {
    if (depth == free) {
      Matrix M(n, n);
      Vector rhs(n);
      M.topRows(E.rows()) = E;
      rhs.head(E.rows()) = f;
      for (int k = 0; k < free; ++k) {
        M.row(E.rows() + k) = G.row(pick[k]);
        rhs(E.rows() + k) = h(pick[k]);
      }
      const Eigen::FullPivLU<Matrix> lu(M);
      if (!lu.isInvertible()) return;
      const Vector x = lu.solve(rhs);
      if (((G * x - h).array() > 1e-9).any()) return;
      if (E.rows() > 0 && (E * x - f).cwiseAbs().maxCoeff() > 1e-9) return;
      const double v = c.dot(x);
      if (!best || v < *best) best = v;
      return;
    }
    for (int i = start; i < G.rows(); ++i) {
      pick[depth] = i;
      recurse(depth + 1, i + 1);
    }
  };
  recurse(0, 0);
  return best;
}

Vector random_vector(std::mt19937_64& rng, Eigen::Index n, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = dist(rng);
  return v;
}

TEST(Lp, BoxOnlyPicksCostSignedCorner) {
  Vector c(3), lower(3), upper(3);
  c << 1.0, -2.0, 0.0;
  lower << -1.0, -3.0, 0.5;
  upper << 4.0, 2.0, 0.7;
  const LpResult<double> res = lp_solve(LpProblem<double>::from_inequalities(
      c, Matrix::Zero(0, 3), Vector::Zero(0), lower, upper));
  ASSERT_EQ(res.status, LpStatus::kOptimal);
  EXPECT_DOUBLE_EQ(res.x(0), -1.0);
  EXPECT_DOUBLE_EQ(res.x(1), 2.0);
  EXPECT_NEAR(res.objective, -5.0, 1e-12);
}

TEST(Lp, MatchesVertexEnumerationOnRandomInequalityLps) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 200; ++t) {
    const Eigen::Index n = 1 + t % 4;
    const Eigen::Index m = 1 + t % 5;
    const Vector c = random_vector(rng, n, -1.0, 1.0);
    Matrix A(m, n);
    for (Eigen::Index i = 0; i < m; ++i) A.row(i) = random_vector(rng, n, -1.0, 1.0);
    // b > 0 keeps x = 0 feasible
    const Vector b = random_vector(rng, m, 0.1, 1.0);
    const Vector lower = random_vector(rng, n, -2.0, -0.5);
    const Vector upper = random_vector(rng, n, 0.5, 2.0);

    const LpResult<double> res =
        lp_solve(LpProblem<double>::from_inequalities(c, A, b, lower, upper));
    const auto oracle = vertex_enumeration(c, Matrix::Zero(0, n), Vector::Zero(0),
                                           A, b, lower, upper);
    ASSERT_TRUE(oracle.has_value());
    ASSERT_EQ(res.status, LpStatus::kOptimal) << "instance " << t;
    EXPECT_NEAR(res.objective, *oracle, 1e-9) << "instance " << t;
    EXPECT_LE(((A * res.x - b).array()).maxCoeff(), 1e-9);
    EXPECT_TRUE((res.x.array() >= lower.array() - 1e-12).all());
    EXPECT_TRUE((res.x.array() <= upper.array() + 1e-12).all());
  }
}

TEST(Lp, MatchesVertexEnumerationWithEqualityRowsAndInfeasibleStart) {
  std::mt19937_64 rng(23);
  int solved = 0;
  for (int t = 0; t < 150; ++t) {
    const Eigen::Index n = 2 + t % 3;
    const Eigen::Index n_eq = 1 + t % (n - 1);
    const Eigen::Index m = 2;
    const Vector c = random_vector(rng, n, -1.0, 1.0);
    Matrix E(n_eq, n), A(m, n);
    for (Eigen::Index i = 0; i < n_eq; ++i) E.row(i) = random_vector(rng, n, -1.0, 1.0);
    for (Eigen::Index i = 0; i < m; ++i) A.row(i) = random_vector(rng, n, -1.0, 1.0);
    // a feasible interior point away from the origin, so phase one has work
    const Vector x_feas = random_vector(rng, n, 0.5, 1.5);
    const Vector f = E * x_feas;
    const Vector b = A * x_feas + random_vector(rng, m, 0.1, 0.5);
    const Vector lower = Vector::Constant(n, 0.2);
    const Vector upper = Vector::Constant(n, 3.0);

    LpProblem<double> lp;
    lp.cost = c;
    lp.A.resize(n_eq + m, n);
    lp.A << E, A;
    lp.row_lower.resize(n_eq + m);
    lp.row_upper.resize(n_eq + m);
    lp.row_lower << f, Vector::Constant(m, -kInf);
    lp.row_upper << f, b;
    lp.lower = lower;
    lp.upper = upper;

    const LpResult<double> res = lp_solve(lp);
    const auto oracle = vertex_enumeration(c, E, f, A, b, lower, upper);
    ASSERT_TRUE(oracle.has_value());
    ASSERT_EQ(res.status, LpStatus::kOptimal) << "instance " << t;
    EXPECT_NEAR(res.objective, *oracle, 1e-8) << "instance " << t;
    EXPECT_LE((E * res.x - f).cwiseAbs().maxCoeff(), 1e-9);
    ++solved;
  }
  EXPECT_EQ(solved, 150);
}

TEST(Lp, DetectsInfeasibility) {
  // x1 + x2 <= -1 with x >= 0
  Matrix A(1, 2);
  A << 1.0, 1.0;
  const LpResult<double> res = lp_solve(LpProblem<double>::from_inequalities(
      Vector::Ones(2), A, Vector::Constant(1, -1.0), Vector::Zero(2),
      Vector::Constant(2, kInf)));
  EXPECT_EQ(res.status, LpStatus::kInfeasible);
}

TEST(Lp, DetectsUnboundedness) {
  // min -x1 subject to x1 - x2 <= 1, x >= 0
  Matrix A(1, 2);
  A << 1.0, -1.0;
  Vector c(2);
  c << -1.0, 0.0;
  const LpResult<double> res = lp_solve(LpProblem<double>::from_inequalities(
      c, A, Vector::Ones(1), Vector::Zero(2), Vector::Constant(2, kInf)));
  EXPECT_EQ(res.status, LpStatus::kUnbounded);
}

TEST(Lp, FreeVariablesAndRangedRows) {
  // min x1 + x2 with 1 <= x1 - x2 <= 2, -1 <= x2 <= 1, x1 free
  LpProblem<double> lp;
  lp.cost = Vector::Ones(2);
  lp.A.resize(1, 2);
  lp.A << 1.0, -1.0;
  lp.row_lower = Vector::Constant(1, 1.0);
  lp.row_upper = Vector::Constant(1, 2.0);
  lp.lower.resize(2);
  lp.upper.resize(2);
  lp.lower << -kInf, -1.0;
  lp.upper << kInf, 1.0;
  const LpResult<double> res = lp_solve(lp);
  ASSERT_EQ(res.status, LpStatus::kOptimal);
  // x2 = -1, x1 = x2 + 1 = 0
  EXPECT_NEAR(res.objective, -1.0, 1e-12);
  EXPECT_NEAR(res.x(0), 0.0, 1e-12);
}

// A degenerate LP on which textbook Dantzig pricing with the lowest-index
// ratio tie-break cycles.
LpProblem<double> cycling_lp() {
  Vector c(4);
  c << -0.75, 20.0, -0.5, 6.0;
  Matrix A(3, 4);
  A << 0.25, -8.0, -1.0, 9.0,  //
      0.5, -12.0, -0.5, 3.0,   //
      0.0, 0.0, 1.0, 0.0;
  Vector b(3);
  b << 0.0, 0.0, 1.0;
  return LpProblem<double>::from_inequalities(c, A, b, Vector::Zero(4),
                                              Vector::Constant(4, 10.0));
}

TEST(Lp, DegenerateCyclingExampleTerminatesAtOptimum) {
  const LpProblem<double> lp = cycling_lp();
  const auto oracle = vertex_enumeration(lp.cost, Matrix::Zero(0, 4), Vector::Zero(0),
                                         lp.A, lp.row_upper, lp.lower, lp.upper);
  ASSERT_TRUE(oracle.has_value());
  for (bool bland_only : {false, true}) {
    LpOptions<double> opts;
    opts.bland_only = bland_only;
    const LpResult<double> res = lp_solve(lp, opts);
    ASSERT_EQ(res.status, LpStatus::kOptimal);
    EXPECT_NEAR(res.objective, *oracle, 1e-10);
    if (bland_only) EXPECT_TRUE(res.used_bland);
  }
}

TEST(Lp, DegenerateLimitZeroSwitchesToBland) {
  LpOptions<double> opts;
  opts.degenerate_limit = 0;
  const LpResult<double> res = lp_solve(cycling_lp(), opts);
  ASSERT_EQ(res.status, LpStatus::kOptimal);
  EXPECT_TRUE(res.used_bland);
}

TEST(Lp, IterationCapRaises) {
  std::mt19937_64 rng(5);
  const Eigen::Index n = 6, m = 6;
  Matrix A(m, n);
  for (Eigen::Index i = 0; i < m; ++i) A.row(i) = random_vector(rng, n, -1.0, 1.0);
  LpOptions<double> opts;
  opts.max_iterations = 1;
  EXPECT_THROW(lp_solve(LpProblem<double>::from_inequalities(
                            -Vector::Ones(n), A, Vector::Ones(m),
                            Vector::Constant(n, -5.0), Vector::Constant(n, 5.0)),
                        opts),
               LpIterationLimit);
}

TEST(Lp, RejectsMalformedProblems) {
  LpProblem<double> lp = LpProblem<double>::from_inequalities(
      Vector::Ones(2), Matrix::Ones(1, 2), Vector::Ones(1), Vector::Zero(2),
      Vector::Ones(2));
  LpProblem<double> bad_size = lp;
  bad_size.lower = Vector::Zero(3);
  EXPECT_THROW(lp_solve(bad_size), DimensionError);
  LpProblem<double> empty_box = lp;
  empty_box.lower(0) = 2.0;
  EXPECT_THROW(lp_solve(empty_box), Error);
  LpProblem<double> nan_cost = lp;
  nan_cost.cost(1) = std::nan("");
  EXPECT_THROW(lp_solve(nan_cost), Error);
}

TEST(Lp, WorksInLongDouble) {
  using LD = long double;
  LpProblem<LD> lp;
  lp.cost = Eigen::Vector<LD, Eigen::Dynamic>::Ones(2);
  lp.A = Eigen::Matrix<LD, Eigen::Dynamic, Eigen::Dynamic>::Ones(1, 2);
  lp.row_lower = Eigen::Vector<LD, Eigen::Dynamic>::Constant(1, 1);
  lp.row_upper = Eigen::Vector<LD, Eigen::Dynamic>::Constant(1, 1);
  lp.lower = Eigen::Vector<LD, Eigen::Dynamic>::Zero(2);
  lp.upper = Eigen::Vector<LD, Eigen::Dynamic>::Ones(2);
  const LpResult<LD> res = lp_solve(lp);
  ASSERT_EQ(res.status, LpStatus::kOptimal);
  EXPECT_NEAR(static_cast<double>(res.objective), 1.0, 1e-15);
}

}  // namespace
}  // namespace scvx
