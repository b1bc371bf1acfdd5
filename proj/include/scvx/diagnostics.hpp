#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scvx/composite.hpp"
#include "scvx/problems.hpp"
#include "scvx/scvx.hpp"

namespace scvx {

/// Norm used by the sharp-minimum and growth probes. The trust region is an
/// infinity-norm box, hence the default.
enum class Norm { kInf, kTwo, kOne };

double norm(const Vector& v, Norm which);
std::string to_string(Norm which);
Norm parse_norm(const std::string& name);

/// Deterministic probe directions of unit `which`-norm: the signed coordinate
/// axes first, then seeded random directions, `count` in total.
std::vector<Vector> probe_directions(Eigen::Index dim, int count, Norm which,
                                     std::uint64_t seed);

struct RatioSample {
  Vector point;  ///< z for the beta probe, d for the gamma probe
  double distance = 0.0;
  double ratio = 0.0;
};

/// Empirical constants for J(z) - J(zbar) >= beta |z - zbar| (|z - zbar| <=
/// delta) and L(d) - L(0) >= gamma |d|. Both are sample minima: upper
/// bounds on the true constants, valid only over the stored samples.
struct SharpMinimumCertificate {
  double beta_hat = std::numeric_limits<double>::quiet_NaN();
  double gamma_hat = std::numeric_limits<double>::quiet_NaN();
  double delta = 0.0;
  int samples = 0;
  Norm norm = Norm::kInf;
  std::vector<RatioSample> beta_samples;
  std::vector<RatioSample> gamma_samples;
};

/// Samples shells |z - zbar| in {delta/10, delta/3, delta}; n_samples
/// directions per shell.
SharpMinimumCertificate estimate_sharp_minimum(const CompositeObjective& obj,
                                               const Vector& z_bar,
                                               double delta, int n_samples,
                                               Norm which = Norm::kInf,
                                               std::uint64_t seed = 0);

/// Samples (L(d) - L(0)) / |d| for d_samples directions at magnitudes
/// scale * {1e-3, 1e-2, 1e-1}.
SharpMinimumCertificate estimate_growth_constant(const CompositeObjective& obj,
                                                 const Vector& z_bar,
                                                 int d_samples,
                                                 Norm which = Norm::kInf,
                                                 std::uint64_t seed = 0,
                                                 double scale = 1.0);

struct SmallStepReport {
  double eta = 0.0;
  double epsilon = 0.0;
  int probes = 0;
  int failures = 0;  ///< probes whose subproblem could not be solved
  double max_step_norm = 0.0;
  bool pass = false;
};

/// Solves the quasi-infinite-radius subproblem at n_probes points with
/// |z - zbar|_inf < eta (the first probe is zbar itself) and records the
/// least-norm minimizer's size. pass <=> every probe solved and
/// max_step_norm < epsilon. Probing stops at the first failing point, so
/// `probes` counts the points actually tried.
SmallStepReport check_small_step(const CompositeObjective& obj,
                                 const Vector& z_bar, double eta,
                                 double epsilon, int n_probes,
                                 std::uint64_t seed = 0);

/// Halves eta from eta_start until check_small_step passes. Returns the last
/// report tried (failing if none passed).
SmallStepReport find_small_step_radius(const CompositeObjective& obj,
                                       const Vector& z_bar, double epsilon,
                                       int n_probes, double eta_start,
                                       std::uint64_t seed = 0,
                                       int max_halvings = 40);

enum class ConvergenceLabel { kStrongConvergent, kInconclusive };
std::string to_string(ConvergenceLabel label);

struct StrongConvergenceReport {
  ConvergenceLabel label = ConvergenceLabel::kInconclusive;
  std::vector<double> tail_distances;  ///< |z^k - zbar| over the tail
  std::vector<double> tail_J_gaps;     ///< J(z^k) - J(zbar) over the tail
  bool distances_nonincreasing = false;
  /// max over the tail of |z^k - zbar| - (J(z^k) - J(zbar)) / beta_hat.
  double worst_inequality_slack = std::numeric_limits<double>::quiet_NaN();
  bool inequality_holds = false;
  std::string reason;
};

/// Whole-sequence convergence evidence from the last m_tail distinct
/// iterates of a trace.
StrongConvergenceReport check_strong_convergence(
    std::span<const IterationRecord> trace, const Vector& z_bar, double J_bar,
    double beta_hat, int m_tail = 5, Norm which = Norm::kInf,
    double tolerance = 1e-8);

struct RatioTailReport {
  std::vector<double> tail;
  bool sufficient = false;  ///< at least five accepted steps with defined rho
  bool trending_to_one = false;
};

/// Observation only: whether |rho - 1| is non-increasing over the tail.
RatioTailReport check_ratio_limit(std::span<const IterationRecord> trace,
                                  int m_tail = 5);
/// Same check on a bare rho sequence.
RatioTailReport check_ratio_limit(std::span<const double> rhos);

struct ActiveSetReport {
  enum class Relation { kEqual, kShortfall, kExcess };
  int active_ineq_count = 0;
  int threshold = 0;  ///< n_u (N - 1)
  double tolerance = 0.0;
  Relation relation = Relation::kShortfall;
  std::vector<InequalityTag> active;
};
std::string to_string(ActiveSetReport::Relation relation);

ActiveSetReport active_set_report(const DiscretizedProblem& problem,
                                  const Vector& z, double tol = 1e-6);

struct RateEstimate {
  enum class Status { kEstimated, kInsufficientData, kZeroError, kDegenerate };
  Status status = Status::kInsufficientData;
  double order_q = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> errors;
  std::vector<double> error_ratios;
  bool superlinear_evidence = false;
};
std::string to_string(RateEstimate::Status status);

/// Least-squares slope of log e_{k+1} against log e_k.
RateEstimate estimate_rate_from_errors(std::span<const double> errors);

/// Uses the last m_tail + 1 distinct iterates before zbar itself.
RateEstimate estimate_rate(std::span<const IterationRecord> trace,
                           const Vector& z_bar, int m_tail = 5,
                           Norm which = Norm::kInf);

struct SubdifferentialReport {
  int directions = 0;
  double min_estimate = std::numeric_limits<double>::infinity();
  Vector worst_direction;
  double tolerance = 0.0;
  bool pass = false;
};

/// Estimates the directional derivative dJ(zbar, s) along unit directions
/// from one-sided differences at steps 1e-4, 1e-5, 1e-6, extrapolated to
/// zero step. Stationarity means dJ(zbar, s) >= 0 for
/// all s; pass iff every estimate >= -tol * (1 + |J(zbar)|).
SubdifferentialReport check_subdifferential_inequality(
    const CompositeObjective& obj, const Vector& z_bar, int n_directions,
    std::uint64_t seed = 0, double tol = 1e-6);

struct LevelSetReport {
  bool pass = true;
  double max_J_excess = 0.0;  ///< max J^k - J0
  double max_norm = 0.0;      ///< max |z^k|_inf
  bool norm_budget_exceeded = false;
  bool J_increase = false;
};

LevelSetReport check_level_set(std::span<const IterationRecord> trace,
                               double J0, double norm_budget);

struct DiagnosticsOptions {
  std::uint64_t seed = 0;
  Norm norm = Norm::kInf;
  double delta = 0.1;
  int beta_samples = 64;
  int gamma_samples = 64;
  int small_step_probes = 64;
  int subdifferential_directions = 64;
  int m_tail = 5;
  double activity_tol = 1e-6;
  double stationarity_probe_radius = 1.0;
  /// Relative: stationary when the probe value <= this * (1 + |J|).
  double stationarity_tol = 1e-6;
};

/// Everything the suite measures about one completed solve.
struct DiagnosticsReport {
  SolveStatus status = SolveStatus::kIterationLimit;
  double J_final = 0.0;
  double stationarity = 0.0;
  bool stationary = false;
  SubdifferentialReport subdifferential;
  /// Stationarity of the limit point: the subsequence-level guarantee.
  bool weak_convergence_evidence = false;
  SharpMinimumCertificate certificate;
  std::optional<SmallStepReport> small_step;
  StrongConvergenceReport strong;
  RatioTailReport ratio_tail;
  RateEstimate rate;
  LevelSetReport level_set;
  std::optional<ActiveSetReport> active_set;
};

DiagnosticsReport run_diagnostics(const BenchmarkInstance& instance,
                                  const SolveResult& result, double J0,
                                  double norm_budget,
                                  const DiagnosticsOptions& options = {});

}  // namespace scvx
