#include "scvx/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace scvx {

double norm(const Vector& v, Norm which) {
  if (v.size() == 0) return 0.0;
  switch (which) {
    case Norm::kInf:
      return v.lpNorm<Eigen::Infinity>();
    case Norm::kTwo:
      return v.norm();
    case Norm::kOne:
      return v.lpNorm<1>();
  }
  return v.lpNorm<Eigen::Infinity>();
}

std::string to_string(Norm which) {
  switch (which) {
    case Norm::kInf:
      return "inf";
    case Norm::kTwo:
      return "2";
    case Norm::kOne:
      return "1";
  }
  return "inf";
}

Norm parse_norm(const std::string& name) {
  if (name == "inf") return Norm::kInf;
  if (name == "2") return Norm::kTwo;
  if (name == "1") return Norm::kOne;
  throw Error("unknown norm '" + name + "' (expected inf, 2 or 1)");
}

std::vector<Vector> probe_directions(Eigen::Index dim, int count, Norm which,
                                     std::uint64_t seed) {
  std::vector<Vector> dirs;
  if (dim == 0 || count <= 0) return dirs;
  dirs.reserve(static_cast<std::size_t>(count));
  for (Eigen::Index i = 0; i < dim && static_cast<int>(dirs.size()) < count; ++i) {
    for (double sign : {1.0, -1.0}) {
      if (static_cast<int>(dirs.size()) == count) break;
      Vector e = Vector::Zero(dim);
      e(i) = sign;
      dirs.push_back(std::move(e));
    }
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  while (static_cast<int>(dirs.size()) < count) {
    Vector v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v(i) = gauss(rng);
    const double n = norm(v, which);
    if (n == 0.0) continue;
    dirs.push_back(v / n);
  }
  return dirs;
}

SharpMinimumCertificate estimate_sharp_minimum(const CompositeObjective& obj,
                                               const Vector& z_bar,
                                               double delta, int n_samples,
                                               Norm which, std::uint64_t seed) {
  if (!(delta > 0.0)) throw Error("estimate_sharp_minimum: delta must be positive");
  SharpMinimumCertificate cert;
  cert.delta = delta;
  cert.norm = which;
  const double J_bar = evaluate_objective(obj, z_bar);
  const auto dirs = probe_directions(z_bar.size(), n_samples, which, seed);
  double best = std::numeric_limits<double>::infinity();
  for (double radius : {delta / 10.0, delta / 3.0, delta}) {
    for (const Vector& dir : dirs) {
      const Vector z = z_bar + radius * dir;
      const double dist = norm(z - z_bar, which);
      if (dist == 0.0) continue;
      const double ratio = (evaluate_objective(obj, z) - J_bar) / dist;
      cert.beta_samples.push_back({z, dist, ratio});
      best = std::min(best, ratio);
    }
  }
  cert.samples = static_cast<int>(cert.beta_samples.size());
  if (cert.samples > 0) cert.beta_hat = best;
  return cert;
}

SharpMinimumCertificate estimate_growth_constant(const CompositeObjective& obj,
                                                 const Vector& z_bar,
                                                 int d_samples, Norm which,
                                                 std::uint64_t seed,
                                                 double scale) {
  SharpMinimumCertificate cert;
  cert.norm = which;
  const Linearization lin = linearize(obj, z_bar);
  const double at_zero = evaluate_model(lin, Vector::Zero(lin.dim()));
  const auto dirs = probe_directions(z_bar.size(), d_samples, which, seed);
  double best = std::numeric_limits<double>::infinity();
  for (double magnitude : {1e-3, 1e-2, 1e-1}) {
    for (const Vector& dir : dirs) {
      const Vector d = scale * magnitude * dir;
      const double dist = norm(d, which);
      if (dist == 0.0) continue;
      const double ratio = (evaluate_model(lin, d) - at_zero) / dist;
      cert.gamma_samples.push_back({d, dist, ratio});
      best = std::min(best, ratio);
    }
  }
  cert.samples = static_cast<int>(cert.gamma_samples.size());
  if (cert.samples > 0) cert.gamma_hat = best;
  return cert;
}

SmallStepReport check_small_step(const CompositeObjective& obj,
                                 const Vector& z_bar, double eta,
                                 double epsilon, int n_probes,
                                 std::uint64_t seed) {
  if (!(eta > 0.0) || !(epsilon > 0.0)) {
    throw Error("check_small_step: eta and epsilon must be positive");
  }
  SmallStepReport report;
  report.eta = eta;
  report.epsilon = epsilon;
  std::mt19937_64 rng(seed);
  // strictly inside the open ball
  std::uniform_real_distribution<double> offset(-0.999 * eta, 0.999 * eta);
  for (int p = 0; p < n_probes; ++p) {
    Vector z = z_bar;
    if (p > 0) {
      for (Eigen::Index i = 0; i < z.size(); ++i) z(i) += offset(rng);
    }
    ++report.probes;
    try {
      const Linearization lin = linearize(obj, z);
      const SubproblemSolution sol =
          solve_min_norm_subproblem({lin, 1.0, /*radius_infinite=*/true});
      if (sol.status == SubproblemStatus::kUnbounded) {
        ++report.failures;
        report.max_step_norm = std::numeric_limits<double>::infinity();
        break;
      }
      const double step =
          sol.step.size() > 0 ? sol.step.lpNorm<Eigen::Infinity>() : 0.0;
      report.max_step_norm = std::max(report.max_step_norm, step);
      if (step >= epsilon) break;  // this eta already fails
    } catch (const Error&) {
      ++report.failures;
      break;
    }
  }
  report.pass = report.failures == 0 && report.max_step_norm < epsilon;
  return report;
}

SmallStepReport find_small_step_radius(const CompositeObjective& obj,
                                       const Vector& z_bar, double epsilon,
                                       int n_probes, double eta_start,
                                       std::uint64_t seed, int max_halvings) {
  double eta = eta_start;
  SmallStepReport report;
  for (int i = 0; i <= max_halvings; ++i, eta *= 0.5) {
    report = check_small_step(obj, z_bar, eta, epsilon, n_probes, seed);
    if (report.pass) break;
  }
  return report;
}

std::string to_string(ConvergenceLabel label) {
  return label == ConvergenceLabel::kStrongConvergent ? "strong-convergent"
                                                      : "inconclusive";
}

StrongConvergenceReport check_strong_convergence(
    std::span<const IterationRecord> trace, const Vector& z_bar, double J_bar,
    double beta_hat, int m_tail, Norm which, double tolerance) {
  StrongConvergenceReport report;
  if (trace.empty()) {
    report.reason = "empty trace";
    return report;
  }
  // distinct iterates with their objective values
  std::vector<std::pair<Vector, double>> iterates;
  for (const IterationRecord& rec : trace) {
    if (iterates.empty() || rec.z != iterates.back().first) {
      iterates.emplace_back(rec.z, rec.J);
    }
  }
  const std::size_t take =
      std::min(iterates.size(), static_cast<std::size_t>(std::max(m_tail, 2)));
  for (std::size_t i = iterates.size() - take; i < iterates.size(); ++i) {
    report.tail_distances.push_back(norm(iterates[i].first - z_bar, which));
    report.tail_J_gaps.push_back(iterates[i].second - J_bar);
  }

  report.distances_nonincreasing = true;
  for (std::size_t i = 1; i < report.tail_distances.size(); ++i) {
    if (report.tail_distances[i] > report.tail_distances[i - 1] + tolerance) {
      report.distances_nonincreasing = false;
    }
  }
  if (beta_hat > 0.0) {
    report.worst_inequality_slack = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < report.tail_distances.size(); ++i) {
      report.worst_inequality_slack =
          std::max(report.worst_inequality_slack,
                   report.tail_distances[i] - report.tail_J_gaps[i] / beta_hat);
    }
    report.inequality_holds = report.worst_inequality_slack <= tolerance;
  }

  if (iterates.size() < 2) {
    report.reason = "tail too short";
  } else if (!(beta_hat > 0.0)) {
    report.reason = "no positive sharp-minimum constant";
  } else if (!report.distances_nonincreasing) {
    report.reason = "distances to the limit point increase on the tail";
  } else if (!report.inequality_holds) {
    report.reason = "sharp-minimum inequality violated on the tail";
  } else {
    report.label = ConvergenceLabel::kStrongConvergent;
  }
  return report;
}

RatioTailReport check_ratio_limit(std::span<const double> rhos) {
  RatioTailReport report;
  report.tail.assign(rhos.begin(), rhos.end());
  report.sufficient = report.tail.size() >= 5;
  report.trending_to_one = report.tail.size() >= 2;
  for (std::size_t i = 1; i < report.tail.size(); ++i) {
    if (std::abs(report.tail[i] - 1.0) > std::abs(report.tail[i - 1] - 1.0)) {
      report.trending_to_one = false;
    }
  }
  return report;
}

RatioTailReport check_ratio_limit(std::span<const IterationRecord> trace,
                                  int m_tail) {
  std::vector<double> rhos;
  std::size_t available = 0;
  for (const IterationRecord& rec : trace) {
    if (rec.accepted && rec.rho) {
      rhos.push_back(*rec.rho);
      ++available;
    }
  }
  const std::size_t take = std::min(rhos.size(), static_cast<std::size_t>(m_tail));
  RatioTailReport report = check_ratio_limit(
      std::span<const double>(rhos).subspan(rhos.size() - take, take));
  report.sufficient = available >= 5;
  return report;
}

std::string to_string(ActiveSetReport::Relation relation) {
  switch (relation) {
    case ActiveSetReport::Relation::kEqual:
      return "equal";
    case ActiveSetReport::Relation::kShortfall:
      return "shortfall";
    case ActiveSetReport::Relation::kExcess:
      return "excess";
  }
  return "shortfall";
}

ActiveSetReport active_set_report(const DiscretizedProblem& problem,
                                  const Vector& z, double tol) {
  ActiveSetReport report;
  report.tolerance = tol;
  report.threshold = static_cast<int>(problem.n_u * (problem.N - 1));
  const Vector c = problem.composite.g.value(z);
  const IndexRange ineq = problem.composite.psi.ineq_range();
  for (Eigen::Index i = 0; i < ineq.size(); ++i) {
    if (std::abs(c(ineq.begin + i)) <= tol) {
      report.active.push_back(problem.inequality_tags[i]);
    }
  }
  report.active_ineq_count = static_cast<int>(report.active.size());
  if (report.active_ineq_count == report.threshold) {
    report.relation = ActiveSetReport::Relation::kEqual;
  } else if (report.active_ineq_count < report.threshold) {
    report.relation = ActiveSetReport::Relation::kShortfall;
  } else {
    report.relation = ActiveSetReport::Relation::kExcess;
  }
  return report;
}

std::string to_string(RateEstimate::Status status) {
  switch (status) {
    case RateEstimate::Status::kEstimated:
      return "estimated";
    case RateEstimate::Status::kInsufficientData:
      return "insufficient-data";
    case RateEstimate::Status::kZeroError:
      return "zero-error";
    case RateEstimate::Status::kDegenerate:
      return "degenerate";
  }
  return "insufficient-data";
}

RateEstimate estimate_rate_from_errors(std::span<const double> errors) {
  RateEstimate est;
  est.errors.assign(errors.begin(), errors.end());
  if (errors.size() < 3) {
    est.status = RateEstimate::Status::kInsufficientData;
    return est;
  }
  for (double e : errors) {
    if (!(e > 0.0) || !std::isfinite(e)) {
      est.status = RateEstimate::Status::kZeroError;
      return est;
    }
  }
  for (std::size_t i = 1; i < errors.size(); ++i) {
    est.error_ratios.push_back(errors[i] / errors[i - 1]);
  }

  const std::size_t n = errors.size() - 1;
  Eigen::VectorXd x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x(i) = std::log(errors[i]);
    y(i) = std::log(errors[i + 1]);
  }
  const Eigen::VectorXd xc = x.array() - x.mean();
  const Eigen::VectorXd yc = y.array() - y.mean();
  const double var = xc.squaredNorm();
  if (!(var > 0.0)) {
    est.status = RateEstimate::Status::kDegenerate;
    return est;
  }
  est.order_q = xc.dot(yc) / var;
  est.status = RateEstimate::Status::kEstimated;

  bool decreasing = true;
  for (std::size_t i = 1; i < est.error_ratios.size(); ++i) {
    if (!(est.error_ratios[i] < est.error_ratios[i - 1])) decreasing = false;
  }
  est.superlinear_evidence = decreasing && est.error_ratios.back() < 0.1;
  return est;
}

RateEstimate estimate_rate(std::span<const IterationRecord> trace,
                           const Vector& z_bar, int m_tail, Norm which) {
  std::vector<Vector> iterates = iterate_sequence(trace);
  // zbar is the final iterate, whose error is zero by construction
  if (!iterates.empty() && iterates.back() == z_bar) iterates.pop_back();
  const std::size_t want = static_cast<std::size_t>(m_tail) + 1;
  if (iterates.size() < want) {
    RateEstimate est;
    for (const Vector& z : iterates) est.errors.push_back(norm(z - z_bar, which));
    est.status = RateEstimate::Status::kInsufficientData;
    return est;
  }
  std::vector<double> errors;
  for (std::size_t i = iterates.size() - want; i < iterates.size(); ++i) {
    errors.push_back(norm(iterates[i] - z_bar, which));
  }
  return estimate_rate_from_errors(errors);
}

SubdifferentialReport check_subdifferential_inequality(
    const CompositeObjective& obj, const Vector& z_bar, int n_directions,
    std::uint64_t seed, double tol) {
  SubdifferentialReport report;
  const double J_bar = evaluate_objective(obj, z_bar);
  report.tolerance = tol * (1.0 + std::abs(J_bar));
  const auto dirs = probe_directions(z_bar.size(), n_directions, Norm::kTwo, seed);
  for (const Vector& s : dirs) {
    auto quotient = [&](double h) {
      return (evaluate_objective(obj, z_bar + h * s) - J_bar) / h;
    };
    // two Richardson levels over steps shrinking by 10x
    const double d4 = quotient(1e-4);
    const double d5 = quotient(1e-5);
    const double d6 = quotient(1e-6);
    const double r45 = (10.0 * d5 - d4) / 9.0;
    const double r56 = (10.0 * d6 - d5) / 9.0;
    const double estimate = (100.0 * r56 - r45) / 99.0;
    ++report.directions;
    if (estimate < report.min_estimate) {
      report.min_estimate = estimate;
      report.worst_direction = s;
    }
  }
  report.pass = report.directions > 0 && report.min_estimate >= -report.tolerance;
  return report;
}

LevelSetReport check_level_set(std::span<const IterationRecord> trace,
                               double J0, double norm_budget) {
  LevelSetReport report;
  const double tol = 1e-12 * (1.0 + std::abs(J0));
  for (const IterationRecord& rec : trace) {
    report.max_J_excess = std::max(report.max_J_excess, rec.J - J0);
    if (rec.z.size() > 0) {
      report.max_norm = std::max(report.max_norm, rec.z.lpNorm<Eigen::Infinity>());
    }
  }
  report.J_increase = report.max_J_excess > tol;
  report.norm_budget_exceeded = report.max_norm > norm_budget;
  report.pass = !report.J_increase && !report.norm_budget_exceeded;
  return report;
}

DiagnosticsReport run_diagnostics(const BenchmarkInstance& instance,
                                  const SolveResult& result, double J0,
                                  double norm_budget,
                                  const DiagnosticsOptions& options) {
  const CompositeObjective& obj = instance.objective;
  const Vector& z_bar = result.final_z;
  DiagnosticsReport report;
  report.status = result.status;
  report.J_final = result.J_final;
  report.level_set = check_level_set(result.trace, J0, norm_budget);

  const double tol = options.stationarity_tol * (1.0 + std::abs(result.J_final));
  report.stationarity =
      check_stationarity(obj, z_bar, options.stationarity_probe_radius);
  report.stationary = report.stationarity <= tol;
  report.subdifferential = check_subdifferential_inequality(
      obj, z_bar, options.subdifferential_directions, options.seed);
  report.weak_convergence_evidence =
      report.stationary && report.subdifferential.pass;

  report.certificate = estimate_sharp_minimum(
      obj, z_bar, options.delta, options.beta_samples, options.norm, options.seed);
  const SharpMinimumCertificate growth = estimate_growth_constant(
      obj, z_bar, options.gamma_samples, options.norm, options.seed);
  report.certificate.gamma_hat = growth.gamma_hat;
  report.certificate.gamma_samples = growth.gamma_samples;
  report.certificate.samples += growth.samples;

  if (report.stationary) {
    report.small_step = find_small_step_radius(
        obj, z_bar, options.delta / 2.0, options.small_step_probes,
        options.delta, options.seed, 20);
  }
  report.strong = check_strong_convergence(
      result.trace, z_bar, result.J_final, report.certificate.beta_hat,
      options.m_tail, options.norm);
  report.ratio_tail = check_ratio_limit(result.trace, options.m_tail);
  report.rate = estimate_rate(result.trace, z_bar, options.m_tail, options.norm);
  if (instance.discretized) {
    report.active_set =
        active_set_report(*instance.discretized, z_bar, options.activity_tol);
  }
  return report;
}

}  // namespace scvx
