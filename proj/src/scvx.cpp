#include "scvx/scvx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace scvx {

void TrustRegionParams::validate() const {
  if (!(0.0 <= rho0 && rho0 < rho1 && rho1 < rho2 && rho2 < 1.0)) {
    throw Error("TrustRegionParams: need 0 <= rho0 < rho1 < rho2 < 1");
  }
  if (!(shrink_factor > 1.0) || !(grow_factor > 1.0)) {
    throw Error("TrustRegionParams: shrink and grow factors must exceed 1");
  }
  if (!(r_min > 0.0 && r_min <= r_init && r_init <= r_max)) {
    throw Error("TrustRegionParams: need 0 < r_min <= r_init <= r_max");
  }
  if (!(stop_predicted_decrease > 0.0) || !(stop_step_norm > 0.0) ||
      !(confirm_predicted_decrease >= stop_predicted_decrease)) {
    throw Error("TrustRegionParams: stopping tolerances must be positive, "
                "with confirm_predicted_decrease >= stop_predicted_decrease");
  }
  if (max_iterations <= 0) {
    throw Error("TrustRegionParams: max_iterations must be positive");
  }
  if (!(norm_budget > 0.0)) {
    throw Error("TrustRegionParams: norm_budget must be positive");
  }
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kConvergedStationary:
      return "converged-stationary";
    case SolveStatus::kIterationLimit:
      return "iteration-limit";
    case SolveStatus::kLevelSetViolation:
      return "level-set-violation";
    case SolveStatus::kSubproblemFailure:
      return "subproblem-failure";
  }
  return "unknown";
}

std::optional<double> trust_region_ratio(double J_current, double J_candidate,
                                         double predicted_decrease,
                                         double threshold) {
  if (predicted_decrease <= threshold) return std::nullopt;
  return (J_current - J_candidate) / predicted_decrease;
}

RadiusUpdate update_radius(double rho, double radius,
                           const TrustRegionParams& params) {
  const double shrunk = std::max(radius / params.shrink_factor, params.r_min);
  if (rho < params.rho0) return {false, shrunk};
  if (rho < params.rho1) return {true, shrunk};
  if (rho < params.rho2) return {true, radius};
  return {true, std::min(radius * params.grow_factor, params.r_max)};
}

double check_stationarity(const CompositeObjective& obj, const Vector& z,
                          double probe_radius) {
  if (!(probe_radius > 0.0)) {
    throw Error("check_stationarity: probe radius must be positive");
  }
  const Linearization lin = linearize(obj, z);
  return solve_subproblem({lin, probe_radius}).predicted_decrease;
}

namespace {

// The stop test is pd(min(r, 1)) <= tol. Below unit radius it is confirmed
// by solving at radius 1 against confirm_tol. At r >= 1 concavity of pd in r
// gives pd(r) / r <= pd(1) <= pd(r), so the unit-radius LP is only needed
// when those bounds cannot decide. Returns the solution to record.
std::optional<SubproblemSolution> certify_stationary(
    const Linearization& lin, double radius, const SubproblemSolution& at_radius,
    double tol, double confirm_tol) {
  const double pd = at_radius.predicted_decrease;
  if (radius >= 1.0) {
    if (pd <= tol) return at_radius;
    if (pd > radius * tol) return std::nullopt;
    SubproblemSolution probe = solve_subproblem({lin, 1.0});
    if (probe.predicted_decrease <= tol) return probe;
    return std::nullopt;
  }
  if (pd > tol) return std::nullopt;
  if (solve_subproblem({lin, 1.0}).predicted_decrease <= confirm_tol) {
    return at_radius;
  }
  return std::nullopt;
}

bool is_tiny_step(const SubproblemSolution& sol, const TrustRegionParams& params) {
  return sol.step.size() > 0 &&
         sol.step.lpNorm<Eigen::Infinity>() <= params.stop_step_norm;
}

}  // namespace

SolveResult run_scvx(const CompositeObjective& obj, const Vector& z0,
                     const TrustRegionParams& params) {
  params.validate();
  require_size(z0.size(), obj.dim(), "run_scvx initial point");

  SolveResult result;
  Vector z = z0;
  double J = evaluate_objective(obj, z);
  const double J0 = J;
  const double level_tol = 1e-12 * (1.0 + std::abs(J0));
  Linearization lin = linearize(obj, z);
  double radius = params.r_init;
  int small_steps = 0;
  int floor_rejections = 0;
  result.status = SolveStatus::kIterationLimit;

  for (int k = 0; k < params.max_iterations; ++k) {
    if (z.size() > 0 && z.lpNorm<Eigen::Infinity>() > params.norm_budget) {
      IterationRecord last;
      last.k = k;
      last.z = z;
      last.J = J;
      last.model_value = J;
      last.radius = radius;
      result.trace.push_back(std::move(last));
      result.status = SolveStatus::kLevelSetViolation;
      result.message = "iterate norm exceeded the budget; the level set of "
                       "the initial point appears unbounded";
      break;
    }

    IterationRecord rec;
    rec.k = k;
    rec.z = z;
    rec.J = J;
    rec.radius = radius;

    try {
      const SubproblemSolution sol = solve_subproblem({lin, radius});
      rec.step_norm =
          sol.step.size() > 0 ? sol.step.lpNorm<Eigen::Infinity>() : 0.0;
      rec.model_value = sol.model_value;
      rec.predicted_decrease = sol.predicted_decrease;

      const double scale = 1.0 + std::abs(J);
      const auto cert =
          certify_stationary(lin, radius, sol, params.stop_predicted_decrease * scale,
                             params.confirm_predicted_decrease * scale);
      if (cert) {
        rec.step_norm =
            cert->step.size() > 0 ? cert->step.lpNorm<Eigen::Infinity>() : 0.0;
        rec.model_value = cert->model_value;
        rec.predicted_decrease = cert->predicted_decrease;
        result.trace.push_back(std::move(rec));
        result.status = SolveStatus::kConvergedStationary;
        break;
      }

      const Vector candidate = z + sol.step;
      double J_candidate = std::numeric_limits<double>::infinity();
      try {
        J_candidate = evaluate_objective(obj, candidate);
      } catch (const NonFiniteError&) {
        // treated as an arbitrarily bad step
      }
      rec.actual_decrease = J - J_candidate;
      // Not stationary, yet pd(r) can be below the stop tolerance when r < 1,
      // so the ratio is formed for any positive prediction.
      rec.rho = trust_region_ratio(J, J_candidate, sol.predicted_decrease, 0.0);
      const double shrunk = std::max(radius / params.shrink_factor, params.r_min);
      RadiusUpdate update =
          rec.rho ? update_radius(*rec.rho, radius, params) : RadiusUpdate{false, shrunk};
      if (update.accepted && !(rec.actual_decrease > 0.0)) update = {false, shrunk};
      rec.accepted = update.accepted;
      result.trace.push_back(std::move(rec));

      if (!update.accepted) {
        floor_rejections = radius <= params.r_min ? floor_rejections + 1 : 0;
        radius = update.next_radius;
        if (floor_rejections >= 3) {
          result.message = "trust-region radius reached r_min without a "
                           "certified stationary point";
          break;
        }
        if (params.relinearize_on_reject) lin = linearize(obj, z);
        continue;
      }
      floor_rejections = 0;
      radius = update.next_radius;

      if (J_candidate > J0 + level_tol) {
        result.status = SolveStatus::kLevelSetViolation;
        result.message = "accepted iterate left the initial level set";
        break;
      }
      z = candidate;
      J = J_candidate;
      lin = linearize(obj, z);

      small_steps = is_tiny_step(sol, params) ? small_steps + 1 : 0;
      if (small_steps >= 3) {
        // Tiny steps alone certify nothing; the unit-radius model must agree.
        const SubproblemSolution probe = solve_subproblem({lin, 1.0});
        if (probe.predicted_decrease <=
            params.confirm_predicted_decrease * (1.0 + std::abs(J))) {
          IterationRecord last;
          last.k = k + 1;
          last.z = z;
          last.J = J;
          last.radius = radius;
          last.step_norm = probe.step.lpNorm<Eigen::Infinity>();
          last.model_value = probe.model_value;
          last.predicted_decrease = probe.predicted_decrease;
          result.trace.push_back(std::move(last));
          result.status = SolveStatus::kConvergedStationary;
          break;
        }
      }
    } catch (const SubproblemFailure& e) {
      result.status = SolveStatus::kSubproblemFailure;
      result.message = e.what();
      break;
    } catch (const NonFiniteError& e) {
      result.status = SolveStatus::kSubproblemFailure;
      result.message = e.what();
      break;
    }
  }

  result.final_z = z;
  result.J_final = J;
  return result;
}

std::vector<Vector> iterate_sequence(std::span<const IterationRecord> trace) {
  std::vector<Vector> out;
  for (const IterationRecord& rec : trace) {
    if (out.empty() || rec.z != out.back()) out.push_back(rec.z);
  }
  return out;
}

}  // namespace scvx
