#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scvx/composite.hpp"
#include "scvx/subproblem.hpp"

namespace scvx {

struct TrustRegionParams {
  double rho0 = 0.0;   ///< below: reject and shrink
  double rho1 = 0.25;  ///< below: accept and shrink
  double rho2 = 0.7;   ///< at or above: accept and grow
  double shrink_factor = 2.0;
  double grow_factor = 3.2;
  double r_init = 1.0;
  double r_min = 1e-10;
  double r_max = 1e3;
  /// Relative: stationary when the predicted decrease at radius min(r, 1)
  /// is <= this * (1 + |J|).
  double stop_predicted_decrease = 1e-8;
  /// Relative bound the predicted decrease at unit radius must also meet.
  /// A radius that has collapsed makes the min(r, 1) test pass anywhere, so
  /// a small radius is only believed when the unit-radius model agrees.
  double confirm_predicted_decrease = 1e-6;
  double stop_step_norm = 1e-10;
  int max_iterations = 500;
  /// Infinity-norm bound on the iterates. Exceeding it is treated as
  /// evidence that the initial level set is not compact.
  double norm_budget = 1e8;
  /// Re-linearize after a rejected step. The base point is unchanged, so this
  /// only costs time; kept as a knob for comparison with other SCvx codes.
  bool relinearize_on_reject = false;

  void validate() const;
};

struct IterationRecord {
  int k = 0;
  Vector z;  ///< base point of this iteration
  double J = 0.0;
  double step_norm = 0.0;
  double model_value = 0.0;
  double predicted_decrease = 0.0;
  double actual_decrease = 0.0;
  std::optional<double> rho;  ///< empty when nothing was predicted (or stationary)
  double radius = 0.0;
  bool accepted = false;
};

enum class SolveStatus {
  kConvergedStationary,
  kIterationLimit,
  kLevelSetViolation,
  kSubproblemFailure,
};

std::string to_string(SolveStatus status);

struct SolveResult {
  Vector final_z;
  SolveStatus status = SolveStatus::kIterationLimit;
  std::vector<IterationRecord> trace;
  double J_final = 0.0;
  std::string message;
};

/// (J_current - J_candidate) / predicted_decrease, or nullopt when the
/// predicted decrease is at or below `threshold`.
std::optional<double> trust_region_ratio(double J_current, double J_candidate,
                                         double predicted_decrease,
                                         double threshold = 0.0);

struct RadiusUpdate {
  bool accepted = false;
  double next_radius = 0.0;
};

RadiusUpdate update_radius(double rho, double radius,
                           const TrustRegionParams& params);

SolveResult run_scvx(const CompositeObjective& obj, const Vector& z0,
                     const TrustRegionParams& params = {});

/// J(z) - min_{||d||_inf <= probe_radius} L(d).
double check_stationarity(const CompositeObjective& obj, const Vector& z,
                          double probe_radius);

/// The distinct base points of a trace, in order.
std::vector<Vector> iterate_sequence(std::span<const IterationRecord> trace);

}  // namespace scvx
