#include "scvx/problems.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

namespace scvx {

void OptimalControlProblem::validate() const {
  if (N < 2) throw Error("OptimalControlProblem: need N >= 2");
  if (n_x <= 0 || n_u <= 0) {
    throw Error("OptimalControlProblem: dimensions must be positive");
  }
  if (!dynamics.step || !dynamics.jac_x || !dynamics.jac_u) {
    throw Error("OptimalControlProblem: dynamics incomplete");
  }
  if (!stage_cost.value || !stage_cost.grad_x || !stage_cost.grad_u) {
    throw Error("OptimalControlProblem: stage cost incomplete");
  }
  require_size(initial_state.size(), n_x, "OptimalControlProblem initial_state");
  if (final_state) {
    require_size(final_state->size(), n_x, "OptimalControlProblem final_state");
  }
  require_size(static_cast<Eigen::Index>(control_bounds.size()), n_u,
               "OptimalControlProblem control_bounds");
  for (const Interval& b : control_bounds) {
    if (!(b.lower <= b.upper)) {
      throw Error("OptimalControlProblem: empty control bound interval");
    }
  }
}

DiscretizedProblem transcribe(const OptimalControlProblem& ocp_in,
                              double lambda) {
  ocp_in.validate();
  auto ocp = std::make_shared<const OptimalControlProblem>(ocp_in);
  const Eigen::Index nx = ocp->n_x;
  const Eigen::Index nu = ocp->n_u;
  const int N = ocp->N;

  DiscretizedProblem dp;
  dp.n_x = nx;
  dp.n_u = nu;
  dp.N = N;

  for (int k = 0; k + 1 < N; ++k) {
    for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(ocp->path_inequalities.size()); ++c) {
      dp.inequality_tags.push_back({InequalityTag::Kind::kPath, k, c});
    }
  }
  const auto num_path = static_cast<Eigen::Index>(dp.inequality_tags.size());
  for (int k = 0; k + 1 < N; ++k) {
    for (Eigen::Index i = 0; i < nu; ++i) {
      const Interval& b = ocp->control_bounds[i];
      if (std::isfinite(b.lower)) {
        dp.inequality_tags.push_back({InequalityTag::Kind::kControlLower, k, i});
      }
      if (std::isfinite(b.upper)) {
        dp.inequality_tags.push_back({InequalityTag::Kind::kControlUpper, k, i});
      }
    }
  }

  const Eigen::Index n_cost = N;
  const Eigen::Index n_defect = (N - 1) * nx;
  const Eigen::Index n_boundary = ocp->final_state ? 2 * nx : nx;
  const auto n_ineq = static_cast<Eigen::Index>(dp.inequality_tags.size());
  dp.defect_rows = {n_cost, n_cost + n_defect};
  dp.boundary_rows = {dp.defect_rows.end, dp.defect_rows.end + n_boundary};
  dp.path_rows = {dp.boundary_rows.end, dp.boundary_rows.end + num_path};
  dp.bound_rows = {dp.path_rows.end, dp.path_rows.end + n_ineq - num_path};

  const Eigen::Index n_z = ocp->num_decision_variables();
  const Eigen::Index m = dp.bound_rows.end;
  const DiscretizedProblem layout = dp;  // index helpers only

  SmoothMap g;
  g.input_dim = n_z;
  g.output_dim = m;
  g.evaluate = [ocp, layout, m](const Vector& z) {
    const int N = layout.N;
    const Eigen::Index nx = layout.n_x;
    Vector out(m);
    Eigen::Index row = 0;
    for (int k = 0; k + 1 < N; ++k) {
      out(row++) = ocp->stage_cost.value(layout.state(z, k), layout.control(z, k));
    }
    out(row++) = ocp->terminal_cost
                     ? ocp->terminal_cost->value(layout.state(z, N - 1))
                     : 0.0;
    for (int k = 0; k + 1 < N; ++k) {
      out.segment(row, nx) =
          layout.state(z, k + 1) -
          ocp->dynamics.step(layout.state(z, k), layout.control(z, k));
      row += nx;
    }
    out.segment(row, nx) = layout.state(z, 0) - ocp->initial_state;
    row += nx;
    if (ocp->final_state) {
      out.segment(row, nx) = layout.state(z, N - 1) - *ocp->final_state;
      row += nx;
    }
    for (const InequalityTag& tag : layout.inequality_tags) {
      const double u = z(layout.control_index(tag.node, tag.index));
      switch (tag.kind) {
        case InequalityTag::Kind::kPath:
          out(row++) = ocp->path_inequalities[tag.index].value(
              layout.state(z, tag.node), layout.control(z, tag.node));
          break;
        case InequalityTag::Kind::kControlLower:
          out(row++) = ocp->control_bounds[tag.index].lower - u;
          break;
        case InequalityTag::Kind::kControlUpper:
          out(row++) = u - ocp->control_bounds[tag.index].upper;
          break;
      }
    }
    return out;
  };
  g.jacobian = [ocp, layout, m, n_z](const Vector& z) {
    const int N = layout.N;
    const Eigen::Index nx = layout.n_x;
    const Eigen::Index nu = layout.n_u;
    Matrix jac = Matrix::Zero(m, n_z);
    Eigen::Index row = 0;
    for (int k = 0; k + 1 < N; ++k, ++row) {
      const Vector x = layout.state(z, k);
      const Vector u = layout.control(z, k);
      jac.block(row, layout.state_index(k), 1, nx) =
          ocp->stage_cost.grad_x(x, u).transpose();
      jac.block(row, layout.control_index(k), 1, nu) =
          ocp->stage_cost.grad_u(x, u).transpose();
    }
    if (ocp->terminal_cost) {
      jac.block(row, layout.state_index(N - 1), 1, nx) =
          ocp->terminal_cost->grad(layout.state(z, N - 1)).transpose();
    }
    ++row;
    for (int k = 0; k + 1 < N; ++k, row += nx) {
      const Vector x = layout.state(z, k);
      const Vector u = layout.control(z, k);
      jac.block(row, layout.state_index(k + 1), nx, nx).setIdentity();
      jac.block(row, layout.state_index(k), nx, nx) = -ocp->dynamics.jac_x(x, u);
      jac.block(row, layout.control_index(k), nx, nu) = -ocp->dynamics.jac_u(x, u);
    }
    jac.block(row, layout.state_index(0), nx, nx).setIdentity();
    row += nx;
    if (ocp->final_state) {
      jac.block(row, layout.state_index(N - 1), nx, nx).setIdentity();
      row += nx;
    }
    for (const InequalityTag& tag : layout.inequality_tags) {
      switch (tag.kind) {
        case InequalityTag::Kind::kPath: {
          const StageFunction& f = ocp->path_inequalities[tag.index];
          const Vector x = layout.state(z, tag.node);
          const Vector u = layout.control(z, tag.node);
          jac.block(row, layout.state_index(tag.node), 1, nx) =
              f.grad_x(x, u).transpose();
          jac.block(row, layout.control_index(tag.node), 1, nu) =
              f.grad_u(x, u).transpose();
          break;
        }
        case InequalityTag::Kind::kControlLower:
          jac(row, layout.control_index(tag.node, tag.index)) = -1.0;
          break;
        case InequalityTag::Kind::kControlUpper:
          jac(row, layout.control_index(tag.node, tag.index)) = 1.0;
          break;
      }
      ++row;
    }
    return jac;
  };

  dp.composite = CompositeObjective{
      std::move(g), ConvexOuter(n_cost, n_defect + n_boundary, n_ineq, lambda)};
  return dp;
}

Vector simulate_rollout(const OptimalControlProblem& ocp,
                        const Vector& controls) {
  ocp.validate();
  require_size(controls.size(), ocp.n_u * (ocp.N - 1), "simulate_rollout controls");
  Vector z(ocp.num_decision_variables());
  const Eigen::Index nx = ocp.n_x;
  const Eigen::Index nu = ocp.n_u;
  const Eigen::Index control_offset = nx * ocp.N;
  z.head(nx) = ocp.initial_state;
  for (int k = 0; k + 1 < ocp.N; ++k) {
    const Vector u = controls.segment(k * nu, nu);
    const Vector next = ocp.dynamics.step(z.segment(k * nx, nx), u);
    require_size(next.size(), nx, "simulate_rollout dynamics output");
    require_finite(next, "simulate_rollout dynamics output");
    z.segment((k + 1) * nx, nx) = next;
  }
  z.tail(z.size() - control_offset) = controls;
  return z;
}

double max_constraint_violation(const CompositeObjective& obj, const Vector& z) {
  const Vector c = obj.g.value(z);
  const IndexRange eq = obj.psi.eq_range();
  const IndexRange ineq = obj.psi.ineq_range();
  double worst = 0.0;
  if (eq.size() > 0) {
    worst = std::max(worst, c.segment(eq.begin, eq.size()).cwiseAbs().maxCoeff());
  }
  if (ineq.size() > 0) {
    worst = std::max(worst, c.segment(ineq.begin, ineq.size()).maxCoeff());
  }
  return worst;
}

namespace {

// Forward-Euler double integrator in `dims` spatial dimensions.
// State [p (dims) | v (dims)], control a (dims).
Dynamics double_integrator(Eigen::Index dims, double dt) {
  Matrix A = Matrix::Identity(2 * dims, 2 * dims);
  A.topRightCorner(dims, dims) = dt * Matrix::Identity(dims, dims);
  Matrix B = Matrix::Zero(2 * dims, dims);
  B.bottomRows(dims) = dt * Matrix::Identity(dims, dims);
  Dynamics dyn;
  dyn.step = [A, B](const Vector& x, const Vector& u) -> Vector {
    return A * x + B * u;
  };
  dyn.jac_x = [A](const Vector&, const Vector&) -> Matrix { return A; };
  dyn.jac_u = [B](const Vector&, const Vector&) -> Matrix { return B; };
  return dyn;
}

/// Linear in time; velocities consistent with the straight-line path,
/// controls zero. Infeasible at the endpoints, which is what we want from a
/// cold start.
Vector interpolated_guess(const OptimalControlProblem& ocp, const Vector& from,
                          const Vector& to) {
  Vector z = Vector::Zero(ocp.num_decision_variables());
  for (int k = 0; k < ocp.N; ++k) {
    const double t = static_cast<double>(k) / (ocp.N - 1);
    z.segment(k * ocp.n_x, ocp.n_x) = (1.0 - t) * from + t * to;
  }
  return z;
}

BenchmarkInstance from_ocp(std::string name, std::string description,
                           OptimalControlProblem ocp, double lambda,
                           Vector guess) {
  BenchmarkInstance inst;
  inst.name = std::move(name);
  inst.description = std::move(description);
  inst.lambda = lambda;
  inst.discretized = transcribe(ocp, lambda);
  inst.objective = inst.discretized->composite;
  inst.initial_guess = std::move(guess);
  inst.ocp = std::move(ocp);
  return inst;
}

/// Convex LP-analogue of a regulator: drive a 1D double integrator from
/// (p, v) = (1, 0) to rest at the origin with |u| <= 1 while minimizing the
/// summed positions. Everything in G is affine, so the linear model is exact.
BenchmarkInstance convex_lqr_box(const BuiltinOptions& opt) {
  OptimalControlProblem ocp;
  ocp.n_x = 2;
  ocp.n_u = 1;
  ocp.N = opt.nodes.value_or(10);
  const double dt = opt.dt.value_or(0.5);
  ocp.dynamics = double_integrator(1, dt);
  ocp.initial_state = Vector::Zero(2);
  ocp.initial_state(0) = 1.0;
  ocp.final_state = Vector::Zero(2);
  ocp.stage_cost.value = [dt](const Vector& x, const Vector&) { return dt * x(0); };
  ocp.stage_cost.grad_x = [dt](const Vector&, const Vector&) {
    Vector g = Vector::Zero(2);
    g(0) = dt;
    return g;
  };
  ocp.stage_cost.grad_u = [](const Vector&, const Vector&) -> Vector {
    return Vector::Zero(1);
  };
  ocp.control_bounds = {Interval{-1.0, 1.0}};
  const double lambda = opt.lambda.value_or(100.0);
  Vector guess = interpolated_guess(ocp, ocp.initial_state, *ocp.final_state);
  return from_ocp("convex-lqr-box",
                  "1D double integrator, linear stage cost, |u| <= 1, "
                  "affine transcription",
                  std::move(ocp), lambda, std::move(guess));
}

/// Planar double integrator from rest at (0, 0) to rest at (3, 0) around a
/// disc of radius 0.5 centred at (1.5, 0.05), with |a_i| <= 4 and control
/// energy cost dt * |a|^2. The obstacle constraint r^2 - |p - c|^2 <= 0 is
/// concave, so the problem is genuinely nonconvex. The two local minima
/// (passing below or above the disc) have KKT multipliers of magnitude at
/// most 8.18 and 9.71, so the default lambda = 100 keeps the penalty exact.
BenchmarkInstance double_integrator_obstacle(const BuiltinOptions& opt) {
  OptimalControlProblem ocp;
  ocp.n_x = 4;
  ocp.n_u = 2;
  ocp.N = opt.nodes.value_or(12);
  const double dt = opt.dt.value_or(0.25);
  ocp.dynamics = double_integrator(2, dt);
  ocp.initial_state = Vector::Zero(4);
  ocp.final_state = Vector::Zero(4);
  (*ocp.final_state)(0) = 3.0;
  ocp.stage_cost.value = [dt](const Vector&, const Vector& u) {
    return dt * u.squaredNorm();
  };
  ocp.stage_cost.grad_x = [](const Vector&, const Vector&) -> Vector {
    return Vector::Zero(4);
  };
  ocp.stage_cost.grad_u = [dt](const Vector&, const Vector& u) -> Vector {
    return 2.0 * dt * u;
  };
  const Eigen::Vector2d center(1.5, 0.05);
  const double radius = 0.5;
  StageFunction obstacle;
  obstacle.value = [center, radius](const Vector& x, const Vector&) {
    return radius * radius - (x.head<2>() - center).squaredNorm();
  };
  obstacle.grad_x = [center](const Vector& x, const Vector&) -> Vector {
    Vector g = Vector::Zero(4);
    g.head<2>() = -2.0 * (x.head<2>() - center);
    return g;
  };
  obstacle.grad_u = [](const Vector&, const Vector&) -> Vector {
    return Vector::Zero(2);
  };
  ocp.path_inequalities = {obstacle};
  ocp.control_bounds = {Interval{-4.0, 4.0}, Interval{-4.0, 4.0}};
  const double lambda = opt.lambda.value_or(100.0);
  Vector guess = interpolated_guess(ocp, ocp.initial_state, *ocp.final_state);
  BenchmarkInstance inst = from_ocp("double-integrator-obstacle",
                                    "planar double integrator, disc obstacle, "
                                    "|a_i| <= 4, control energy cost",
                                    std::move(ocp), lambda, std::move(guess));
  inst.penalty_threshold = 9.71;
  return inst;
}

/// Unicycle (Dubins-type) car, state (p_x, p_y, heading), controls
/// (speed, turn rate), forward Euler. Moves from the origin heading east to
/// (2, 1) heading east, with 0 <= v <= 3 and |omega| <= 3.
BenchmarkInstance dubins_car(const BuiltinOptions& opt) {
  OptimalControlProblem ocp;
  ocp.n_x = 3;
  ocp.n_u = 2;
  ocp.N = opt.nodes.value_or(12);
  const double dt = opt.dt.value_or(0.25);
  ocp.dynamics.step = [dt](const Vector& x, const Vector& u) -> Vector {
    Vector next(3);
    next(0) = x(0) + dt * u(0) * std::cos(x(2));
    next(1) = x(1) + dt * u(0) * std::sin(x(2));
    next(2) = x(2) + dt * u(1);
    return next;
  };
  ocp.dynamics.jac_x = [dt](const Vector& x, const Vector& u) -> Matrix {
    Matrix J = Matrix::Identity(3, 3);
    J(0, 2) = -dt * u(0) * std::sin(x(2));
    J(1, 2) = dt * u(0) * std::cos(x(2));
    return J;
  };
  ocp.dynamics.jac_u = [dt](const Vector& x, const Vector&) -> Matrix {
    Matrix J = Matrix::Zero(3, 2);
    J(0, 0) = dt * std::cos(x(2));
    J(1, 0) = dt * std::sin(x(2));
    J(2, 1) = dt;
    return J;
  };
  ocp.initial_state = Vector::Zero(3);
  ocp.final_state = Vector::Zero(3);
  (*ocp.final_state)(0) = 2.0;
  (*ocp.final_state)(1) = 1.0;
  ocp.stage_cost.value = [dt](const Vector&, const Vector& u) {
    return dt * u.squaredNorm();
  };
  ocp.stage_cost.grad_x = [](const Vector&, const Vector&) -> Vector {
    return Vector::Zero(3);
  };
  ocp.stage_cost.grad_u = [dt](const Vector&, const Vector& u) -> Vector {
    return 2.0 * dt * u;
  };
  ocp.control_bounds = {Interval{0.0, 3.0}, Interval{-3.0, 3.0}};
  const double lambda = opt.lambda.value_or(50.0);

  // straight-line rollout at the mean speed; heading stays zero
  const double speed = 2.0 / ((ocp.N - 1) * dt);
  Vector controls = Vector::Zero(2 * (ocp.N - 1));
  for (int k = 0; k + 1 < ocp.N; ++k) controls(2 * k) = speed;
  Vector guess = simulate_rollout(ocp, controls);
  return from_ocp("dubins-car",
                  "unicycle car, lateral transfer to (2, 1), control energy "
                  "cost",
                  std::move(ocp), lambda, std::move(guess));
}

CompositeObjective synthetic(Eigen::Index n, Eigen::Index out, Eigen::Index n_cost,
                             Eigen::Index n_eq, double lambda,
                             std::function<Vector(const Vector&)> f,
                             std::function<Matrix(const Vector&)> df) {
  SmoothMap g;
  g.input_dim = n;
  g.output_dim = out;
  g.evaluate = std::move(f);
  g.jacobian = std::move(df);
  return CompositeObjective{std::move(g),
                            ConvexOuter(n_cost, n_eq, out - n_cost - n_eq, lambda)};
}

/// J(z) = z^2 + lambda |z - 1|, lambda = 10 by default. The minimizer is
/// z = 1 whenever lambda > 2 (the constraint multiplier). With lambda = 10:
/// sharp-minimum constant beta = 8 (approached from the left), model growth
/// constant gamma = 8.
BenchmarkInstance toy_sharp_1d(const BuiltinOptions& opt) {
  BenchmarkInstance inst;
  inst.name = "toy-sharp-1d";
  inst.description = "z^2 + lambda |z - 1|";
  inst.lambda = opt.lambda.value_or(10.0);
  inst.objective = synthetic(
      1, 2, 1, 1, inst.lambda,
      [](const Vector& z) {
        Vector g(2);
        g << z(0) * z(0), z(0) - 1.0;
        return g;
      },
      [](const Vector& z) {
        Matrix J(2, 1);
        J << 2.0 * z(0), 1.0;
        return J;
      });
  inst.initial_guess = Vector::Constant(1, -2.0);
  inst.penalty_threshold = 2.0;
  return inst;
}

/// J(z) = |z|^2 + lambda (|z_1 - 1| + |z_2 - z_1^2|), lambda = 10 by default.
/// Minimizer (1, 1) with J = 2; constraint multipliers (-6, -2), so any
/// lambda > 6 is exact. In the infinity norm the model growth constant at the
/// minimizer is gamma = 2 (attained at d = (-1/2, -1)).
BenchmarkInstance toy_sharp_2d(const BuiltinOptions& opt) {
  BenchmarkInstance inst;
  inst.name = "toy-sharp-2d";
  inst.description = "|z|^2 + lambda (|z1 - 1| + |z2 - z1^2|)";
  inst.lambda = opt.lambda.value_or(10.0);
  inst.objective = synthetic(
      2, 3, 1, 2, inst.lambda,
      [](const Vector& z) {
        Vector g(3);
        g << z.squaredNorm(), z(0) - 1.0, z(1) - z(0) * z(0);
        return g;
      },
      [](const Vector& z) {
        Matrix J(3, 2);
        J << 2.0 * z(0), 2.0 * z(1),  //
            1.0, 0.0,                 //
            -2.0 * z(0), 1.0;
        return J;
      });
  inst.initial_guess = Vector::Constant(2, -1.5);
  inst.penalty_threshold = 6.0;
  return inst;
}

/// J(z) = e^z. Every level set is unbounded below, so the iterates run off
/// to -infinity; the tight norm budget of 10 turns that into a detected
/// violation well before e^z underflows the stationarity test.
BenchmarkInstance noncompact_levelset(const BuiltinOptions& opt) {
  BenchmarkInstance inst;
  inst.name = "noncompact-levelset";
  inst.description = "e^z, no minimizer";
  inst.lambda = opt.lambda.value_or(1.0);
  inst.objective = synthetic(
      1, 1, 1, 0, inst.lambda,
      [](const Vector& z) { return Vector::Constant(1, std::exp(z(0))); },
      [](const Vector& z) { return Matrix::Constant(1, 1, std::exp(z(0))); });
  inst.initial_guess = Vector::Zero(1);
  inst.norm_budget = 10.0;
  inst.adversarial = true;
  return inst;
}

}  // namespace

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names = {
      "convex-lqr-box", "double-integrator-obstacle", "dubins-car",
      "toy-sharp-1d",   "toy-sharp-2d",               "noncompact-levelset"};
  return names;
}

BenchmarkInstance builtin(std::string_view name, const BuiltinOptions& options) {
  if (options.lambda && !(*options.lambda > 0.0)) {
    throw Error("builtin: lambda must be positive");
  }
  if (options.nodes && *options.nodes < 2) {
    throw Error("builtin: need at least 2 nodes");
  }
  if (options.dt && !(*options.dt > 0.0)) {
    throw Error("builtin: dt must be positive");
  }
  if (name == "convex-lqr-box") return convex_lqr_box(options);
  if (name == "double-integrator-obstacle") return double_integrator_obstacle(options);
  if (name == "dubins-car") return dubins_car(options);
  if (name == "toy-sharp-1d") return toy_sharp_1d(options);
  if (name == "toy-sharp-2d") return toy_sharp_2d(options);
  if (name == "noncompact-levelset") return noncompact_levelset(options);
  throw Error("builtin: unknown problem '" + std::string(name) + "'");
}

Vector random_start(const BenchmarkInstance& instance, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  if (instance.ocp) {
    const OptimalControlProblem& ocp = *instance.ocp;
    Vector controls(ocp.n_u * (ocp.N - 1));
    for (int k = 0; k + 1 < ocp.N; ++k) {
      for (Eigen::Index i = 0; i < ocp.n_u; ++i) {
        const Interval& b = ocp.control_bounds[i];
        const double lo = std::isfinite(b.lower) ? b.lower : -1.0;
        const double hi = std::isfinite(b.upper) ? b.upper : 1.0;
        std::uniform_real_distribution<double> dist(lo, hi);
        controls(k * ocp.n_u + i) = dist(rng);
      }
    }
    return simulate_rollout(ocp, controls);
  }
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  Vector z(instance.objective.dim());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = dist(rng);
  return z;
}

}  // namespace scvx
