#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scvx/composite.hpp"

namespace scvx {

/// One-step discrete dynamics x_next = F(x, u) with its partial Jacobians.
struct Dynamics {
  std::function<Vector(const Vector& x, const Vector& u)> step;
  std::function<Matrix(const Vector& x, const Vector& u)> jac_x;
  std::function<Matrix(const Vector& x, const Vector& u)> jac_u;
};

/// Scalar function of one stage (x, u) with its gradients.
struct StageFunction {
  std::function<double(const Vector& x, const Vector& u)> value;
  std::function<Vector(const Vector& x, const Vector& u)> grad_x;
  std::function<Vector(const Vector& x, const Vector& u)> grad_u;
};

/// Scalar function of the terminal state.
struct TerminalFunction {
  std::function<double(const Vector& x)> value;
  std::function<Vector(const Vector& x)> grad;
};

struct Interval {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
};

/// Discrete-time optimal control problem over nodes 0..N-1. Controls live on
/// nodes 0..N-2; u_k drives x_k to x_{k+1}.
struct OptimalControlProblem {
  Eigen::Index n_x = 0;
  Eigen::Index n_u = 0;
  int N = 2;
  Dynamics dynamics;
  Vector initial_state;
  std::optional<Vector> final_state;
  StageFunction stage_cost;
  std::optional<TerminalFunction> terminal_cost;
  /// g(x_k, u_k) <= 0, imposed at nodes 0..N-2.
  std::vector<StageFunction> path_inequalities;
  /// One interval per control component; infinite sides are omitted.
  std::vector<Interval> control_bounds;

  Eigen::Index num_decision_variables() const {
    return n_x * N + n_u * (N - 1);
  }
  void validate() const;
};

/// Which penalized inequality a G component is.
struct InequalityTag {
  enum class Kind { kPath, kControlLower, kControlUpper } kind;
  int node = 0;
  Eigen::Index index = 0;  ///< path constraint number or control component
};

/// Exact-penalty transcription of an OptimalControlProblem.
///
/// Decision vector layout: [x_0 .. x_{N-1} | u_0 .. u_{N-2}].
/// G layout: [stage costs (N) | dynamics defects ((N-1) n_x) | initial
/// defect (n_x) | final defect (n_x, optional) | path inequalities |
/// control-bound residuals].
struct DiscretizedProblem {
  CompositeObjective composite;
  Eigen::Index n_x = 0;
  Eigen::Index n_u = 0;
  int N = 0;
  IndexRange defect_rows;
  IndexRange boundary_rows;
  IndexRange path_rows;
  IndexRange bound_rows;
  std::vector<InequalityTag> inequality_tags;  ///< one per ineq component

  Eigen::Index state_index(int node, Eigen::Index i = 0) const {
    return node * n_x + i;
  }
  Eigen::Index control_index(int node, Eigen::Index i = 0) const {
    return N * n_x + node * n_u + i;
  }
  Vector state(const Vector& z, int node) const {
    return z.segment(state_index(node), n_x);
  }
  Vector control(const Vector& z, int node) const {
    return z.segment(control_index(node), n_u);
  }
};

DiscretizedProblem transcribe(const OptimalControlProblem& ocp, double lambda);

/// Forward-simulates the dynamics from the initial state. `controls` is the
/// stacked u_0 .. u_{N-2}.
Vector simulate_rollout(const OptimalControlProblem& ocp,
                        const Vector& controls);

/// A named benchmark: always a composite objective; OCP-derived instances
/// also carry the problem and its transcription.
struct BenchmarkInstance {
  std::string name;
  std::string description;
  CompositeObjective objective;
  std::optional<OptimalControlProblem> ocp;
  std::optional<DiscretizedProblem> discretized;
  Vector initial_guess;
  double lambda = 1.0;
  /// Largest constraint-multiplier magnitude at the known minimizers, where
  /// it has been worked out. lambda above it makes the penalty exact.
  std::optional<double> penalty_threshold;
  /// Iterate-norm budget recommended for this instance.
  double norm_budget = 1e8;
  /// Instances built to violate the solver's assumptions.
  bool adversarial = false;
};

struct BuiltinOptions {
  std::optional<double> lambda;
  std::optional<int> nodes;
  std::optional<double> dt;
};

/// Names accepted by builtin().
const std::vector<std::string>& builtin_names();

BenchmarkInstance builtin(std::string_view name,
                          const BuiltinOptions& options = {});

/// A seeded perturbed starting point: a rollout of random admissible controls
/// for OCP instances, a uniform sample in [-3, 3]^n for synthetic ones.
Vector random_start(const BenchmarkInstance& instance, std::uint64_t seed);

/// Largest violation of the original (unpenalized) constraints at z:
/// max |equality| and max(0, inequality) over all penalized components.
double max_constraint_violation(const CompositeObjective& obj, const Vector& z);

}  // namespace scvx
