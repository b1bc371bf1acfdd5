#include <gtest/gtest.h>

#include <cmath>

#include "scvx/diagnostics.hpp"
#include "scvx/problems.hpp"

namespace scvx {
namespace {

// One-variable objective psi(G(z)) with G = (f) and the given layout.
CompositeObjective scalar_objective(std::function<double(double)> f,
                                    std::function<double(double)> df,
                                    Eigen::Index n_cost, Eigen::Index n_eq) {
  SmoothMap g;
  g.input_dim = 1;
  g.output_dim = 1;
  g.evaluate = [f](const Vector& z) { return Vector::Constant(1, f(z(0))); };
  g.jacobian = [df](const Vector& z) { return Matrix::Constant(1, 1, df(z(0))); };
  return {g, ConvexOuter(n_cost, n_eq, 1 - n_cost - n_eq, 1.0)};
}

CompositeObjective abs_objective() {
  return scalar_objective([](double z) { return z; }, [](double) { return 1.0; }, 0, 1);
}

CompositeObjective square_objective() {
  return scalar_objective([](double z) { return z * z; },
                          [](double z) { return 2.0 * z; }, 1, 0);
}

// min over a dense sweep of 0 < |z - zbar| <= delta of (J(z) - J(zbar)) / |z - zbar|
double dense_sweep_beta(const CompositeObjective& obj, double z_bar, double delta,
                        int points) {
  const double J_bar = evaluate_objective(obj, Vector::Constant(1, z_bar));
  double best = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= points; ++i) {
    const double t = delta * i / points;
    for (double z : {z_bar - t, z_bar + t}) {
      best = std::min(best, (evaluate_objective(obj, Vector::Constant(1, z)) - J_bar) / t);
    }
  }
  return best;
}

IterationRecord record(const Vector& z, double J, std::optional<double> rho = 1.0) {
  IterationRecord rec;
  rec.z = z;
  rec.J = J;
  rec.rho = rho;
  rec.accepted = true;
  return rec;
}

TEST(Norms, ValuesAndNames) {
  Vector v(3);
  v << 3.0, -4.0, 0.0;
  EXPECT_DOUBLE_EQ(norm(v, Norm::kInf), 4.0);
  EXPECT_DOUBLE_EQ(norm(v, Norm::kTwo), 5.0);
  EXPECT_DOUBLE_EQ(norm(v, Norm::kOne), 7.0);
  for (Norm n : {Norm::kInf, Norm::kTwo, Norm::kOne}) EXPECT_EQ(parse_norm(to_string(n)), n);
  EXPECT_THROW(parse_norm("frobenius"), Error);
}

TEST(ProbeDirections, AxesFirstThenUnitRandom) {
  const std::vector<Vector> dirs = probe_directions(3, 10, Norm::kTwo, 1);
  ASSERT_EQ(dirs.size(), 10u);
  EXPECT_EQ(dirs[0], Vector::Unit(3, 0));
  EXPECT_EQ(dirs[1], -Vector::Unit(3, 0));
  for (const Vector& d : dirs) EXPECT_NEAR(d.norm(), 1.0, 1e-12);
  EXPECT_EQ(dirs, probe_directions(3, 10, Norm::kTwo, 1));
}

TEST(SharpMinimum, AbsoluteValueHasUnitConstant) {
  const SharpMinimumCertificate cert =
      estimate_sharp_minimum(abs_objective(), Vector::Zero(1), 0.1, 16);
  EXPECT_NEAR(cert.beta_hat, 1.0, 1e-12);
  EXPECT_EQ(cert.beta_samples.size(), 3u * 16u);
}

TEST(SharpMinimum, ToySharp1dAgainstDenseSweep) {
  const BenchmarkInstance inst = builtin("toy-sharp-1d");
  const double delta = 0.1;
  const double oracle = dense_sweep_beta(inst.objective, 1.0, delta, 100000);
  const SharpMinimumCertificate cert =
      estimate_sharp_minimum(inst.objective, Vector::Ones(1), delta, 64);
  EXPECT_GE(cert.beta_hat, 0.9 * oracle);
  // sampled minimum over a subset can only be larger
  EXPECT_GE(cert.beta_hat, oracle - 1e-12);
}

TEST(SharpMinimum, QuadraticIsNotSharp) {
  const SharpMinimumCertificate cert =
      estimate_sharp_minimum(square_objective(), Vector::Zero(1), 1e-3, 64);
  EXPECT_LE(cert.beta_hat, 1e-2);
}

TEST(GrowthConstant, ToySharp1dModelGrowth) {
  // at z = 1 the model is 1 + 2 d + 10 |d|, so L(d) - L(0) >= 8 |d|
  const BenchmarkInstance inst = builtin("toy-sharp-1d");
  const SharpMinimumCertificate cert =
      estimate_growth_constant(inst.objective, Vector::Ones(1), 16);
  EXPECT_NEAR(cert.gamma_hat, 8.0, 1e-9);
}

TEST(SmallStep, PassesAtSharpMinimumFailsAtSmoothOne) {
  const BenchmarkInstance inst = builtin("toy-sharp-1d");
  const SmallStepReport sharp =
      find_small_step_radius(inst.objective, Vector::Ones(1), 0.05, 64, 0.1, 3, 20);
  EXPECT_TRUE(sharp.pass);
  EXPECT_EQ(sharp.probes, 64);
  EXPECT_GT(sharp.eta, 0.0);
  EXPECT_LT(sharp.max_step_norm, 0.05);

  const SmallStepReport smooth =
      check_small_step(square_objective(), Vector::Zero(1), 1e-3, 0.05, 64, 3);
  EXPECT_FALSE(smooth.pass);
}

TEST(RateEstimate, QuadraticAndLinearSequences) {
  std::vector<double> quadratic = {0.5};
  for (int i = 0; i < 5; ++i) quadratic.push_back(quadratic.back() * quadratic.back());
  const RateEstimate q2 = estimate_rate_from_errors(quadratic);
  ASSERT_EQ(q2.status, RateEstimate::Status::kEstimated);
  EXPECT_NEAR(q2.order_q, 2.0, 1e-9);
  EXPECT_TRUE(q2.superlinear_evidence);

  std::vector<double> linear;
  for (int i = 0; i < 6; ++i) linear.push_back(std::pow(0.5, i));
  const RateEstimate q1 = estimate_rate_from_errors(linear);
  EXPECT_NEAR(q1.order_q, 1.0, 1e-9);
  EXPECT_FALSE(q1.superlinear_evidence);

  EXPECT_EQ(estimate_rate_from_errors(std::vector<double>{1.0, 0.5}).status,
            RateEstimate::Status::kInsufficientData);
  EXPECT_EQ(estimate_rate_from_errors(std::vector<double>{1.0, 0.0, 0.0}).status,
            RateEstimate::Status::kZeroError);
  EXPECT_EQ(estimate_rate_from_errors(std::vector<double>{1.0, 1.0, 1.0}).status,
            RateEstimate::Status::kDegenerate);
}

TEST(RateEstimate, FromTraceUsesDistinctIterates) {
  std::vector<IterationRecord> trace;
  double e = 0.5;
  for (int k = 0; k < 7; ++k) {
    trace.push_back(record(Vector::Constant(1, e), e));
    trace.push_back(record(Vector::Constant(1, e), e));  // a rejected repeat
    e = e * e;
  }
  trace.push_back(record(Vector::Zero(1), 0.0));
  const RateEstimate est = estimate_rate(trace, Vector::Zero(1), 5);
  ASSERT_EQ(est.status, RateEstimate::Status::kEstimated);
  EXPECT_NEAR(est.order_q, 2.0, 1e-9);
}

TEST(RatioTail, TrendAndSufficiency) {
  const std::vector<double> toward_one = {0.5, 0.7, 0.9, 0.95, 0.99};
  const RatioTailReport good = check_ratio_limit(toward_one);
  EXPECT_TRUE(good.sufficient);
  EXPECT_TRUE(good.trending_to_one);
  const std::vector<double> wandering = {0.9, 0.5, 0.95, 0.3, 0.99};
  EXPECT_FALSE(check_ratio_limit(wandering).trending_to_one);
  EXPECT_FALSE(check_ratio_limit(std::vector<double>{1.0, 1.0}).sufficient);
}

TEST(StrongConvergence, MonotoneTailIsStrongOscillatingIsNot) {
  // J = |z|, converging from the right: distance equals the J gap.
  std::vector<IterationRecord> tail;
  for (double z : {0.5, 0.25, 0.1, 0.05, 0.0}) tail.push_back(record(Vector::Constant(1, z), z));
  const StrongConvergenceReport strong =
      check_strong_convergence(tail, Vector::Zero(1), 0.0, 1.0, 5);
  EXPECT_EQ(strong.label, ConvergenceLabel::kStrongConvergent);
  EXPECT_TRUE(strong.inequality_holds);

  std::vector<IterationRecord> oscillating;
  for (double z : {0.5, 0.1, 0.4, 0.05, 0.3, 0.0}) {
    oscillating.push_back(record(Vector::Constant(1, z), z));
  }
  EXPECT_EQ(check_strong_convergence(oscillating, Vector::Zero(1), 0.0, 1.0, 5).label,
            ConvergenceLabel::kInconclusive);

  // beta_hat too optimistic: |z| > J gap / beta fails the inequality
  EXPECT_EQ(check_strong_convergence(tail, Vector::Zero(1), 0.0, 10.0, 5).label,
            ConvergenceLabel::kInconclusive);
}

TEST(LevelSet, FlagsIncreaseAndBudget) {
  std::vector<IterationRecord> trace = {record(Vector::Zero(1), 1.0),
                                        record(Vector::Constant(1, 5.0), 0.5)};
  EXPECT_TRUE(check_level_set(trace, 1.0, 10.0).pass);
  const LevelSetReport budget = check_level_set(trace, 1.0, 4.0);
  EXPECT_FALSE(budget.pass);
  EXPECT_TRUE(budget.norm_budget_exceeded);
  trace.push_back(record(Vector::Zero(1), 2.0));
  const LevelSetReport up = check_level_set(trace, 1.0, 10.0);
  EXPECT_TRUE(up.J_increase);
  EXPECT_DOUBLE_EQ(up.max_J_excess, 1.0);
}

TEST(Subdifferential, AbsoluteValuePassesLinearFails) {
  EXPECT_TRUE(check_subdifferential_inequality(abs_objective(), Vector::Zero(1), 8).pass);
  const CompositeObjective linear =
      scalar_objective([](double z) { return z; }, [](double) { return 1.0; }, 1, 0);
  const SubdifferentialReport report =
      check_subdifferential_inequality(linear, Vector::Zero(1), 8);
  EXPECT_FALSE(report.pass);
  EXPECT_NEAR(report.min_estimate, -1.0, 1e-6);
}

TEST(ActiveSet, SaturatedControlsMeetThreshold) {
  const BenchmarkInstance inst = builtin("convex-lqr-box");
  const DiscretizedProblem& dp = *inst.discretized;
  const Vector z = simulate_rollout(*inst.ocp, Vector::Ones(dp.N - 1));
  const ActiveSetReport report = active_set_report(dp, z);
  EXPECT_EQ(report.threshold, dp.n_u * (dp.N - 1));
  EXPECT_EQ(report.active_ineq_count, dp.N - 1);
  EXPECT_EQ(report.relation, ActiveSetReport::Relation::kEqual);
  for (const InequalityTag& tag : report.active) {
    EXPECT_EQ(tag.kind, InequalityTag::Kind::kControlUpper);
  }
  const ActiveSetReport none = active_set_report(dp, simulate_rollout(*inst.ocp, Vector::Zero(dp.N - 1)));
  EXPECT_EQ(none.active_ineq_count, 0);
  EXPECT_EQ(none.relation, ActiveSetReport::Relation::kShortfall);
}

TEST(RunDiagnostics, ToySharp1dEndToEnd) {
  const BenchmarkInstance inst = builtin("toy-sharp-1d");
  const SolveResult result = run_scvx(inst.objective, inst.initial_guess);
  const DiagnosticsReport report = run_diagnostics(
      inst, result, evaluate_objective(inst.objective, inst.initial_guess), 1e8, {});
  EXPECT_TRUE(report.stationary);
  EXPECT_TRUE(report.subdifferential.pass);
  EXPECT_TRUE(report.weak_convergence_evidence);
  ASSERT_TRUE(report.small_step.has_value());
  EXPECT_TRUE(report.small_step->pass);
  EXPECT_TRUE(report.level_set.pass);
  EXPECT_EQ(report.strong.label, ConvergenceLabel::kStrongConvergent);
}

}  // namespace
}  // namespace scvx
