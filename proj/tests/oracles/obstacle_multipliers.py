"""KKT multipliers of the double-integrator-obstacle problem near a solution.

Rebuilds the transcription in numpy, polishes a saved solution with SLSQP on
the constrained (unpenalized) problem, then recovers the multipliers of the
active constraints by least squares on the stationarity condition. The exact
penalty is exact for lambda above the largest multiplier magnitude.

    python3 tests/oracles/obstacle_multipliers.py SOLUTION.json
"""

import json
import sys

import numpy as np
from scipy.optimize import minimize

N, dt, nx, nu = 12, 0.25, 4, 2
c_obs, r_obs, amax = np.array([1.5, 0.05]), 0.5, 4.0
nz = nx * N + nu * (N - 1)
A = np.eye(4); A[0, 2] = A[1, 3] = dt
B = np.zeros((4, 2)); B[2, 0] = B[3, 1] = dt
x_init = np.zeros(4)
x_final = np.array([3.0, 0.0, 0.0, 0.0])


def X(z):
    return z[: nx * N].reshape(N, nx)


def U(z):
    return z[nx * N:].reshape(N - 1, nu)


def cost(z):
    return dt * np.sum(U(z) ** 2)


def eqs(z):
    x, u = X(z), U(z)
    d = [x[k + 1] - A @ x[k] - B @ u[k] for k in range(N - 1)]
    return np.concatenate(d + [x[0] - x_init, x[N - 1] - x_final])


def ineqs(z):  # <= 0
    x, u = X(z), U(z)
    obs = [r_obs ** 2 - np.sum((x[k, :2] - c_obs) ** 2) for k in range(N - 1)]
    return np.concatenate([obs, (u - amax).ravel(), (-amax - u).ravel()])


def jac(f, z, h=1e-7):
    f0 = f(z)
    J = np.zeros((f0.size, z.size))
    for i in range(z.size):
        e = np.zeros(z.size); e[i] = h
        J[:, i] = (f(z + e) - f(z - e)) / (2 * h)
    return J


z0 = np.array(json.load(open(sys.argv[1]))["z"])
res = minimize(cost, z0, method="SLSQP",
               constraints=[{"type": "eq", "fun": eqs},
                            {"type": "ineq", "fun": lambda z: -ineqs(z)}],
               options={"ftol": 1e-14, "maxiter": 500})
z = res.x
active = np.abs(ineqs(z)) < 1e-6
G = np.vstack([jac(eqs, z), jac(ineqs, z)[active]])
grad = jac(lambda v: np.array([cost(v)]), z)[0]
mult, *_ = np.linalg.lstsq(G.T, -grad, rcond=None)
print(f"cost {cost(z):.10g}  max eq {np.abs(eqs(z)).max():.2e}  "
      f"max ineq {max(ineqs(z).max(), 0):.2e}  active ineq {active.sum()}")
print(f"stationarity residual {np.abs(G.T @ mult + grad).max():.2e}")
print(f"max |multiplier| {np.abs(mult).max():.10g}")
