"""Direct LP solve of the convex-lqr-box transcription with scipy.

Solves the constrained problem itself (dynamics and boundary conditions as
equalities, control box as bounds) and, separately, the exact-penalty form at
lambda = 100. Both optima are printed; the first is frozen into the tests.

    python3 tests/oracles/convex_lqr_box_lp.py
"""

import numpy as np
from scipy.optimize import linprog

N, dt, lam = 10, 0.5, 100.0
nx, nu = 2, 1
nz = nx * N + nu * (N - 1)


def xi(k, i):
    return k * nx + i


def ui(k):
    return N * nx + k


cost = np.zeros(nz)
for k in range(N - 1):
    cost[xi(k, 0)] = dt

rows, rhs = [], []
for k in range(N - 1):
    # p+ = p + dt v,  v+ = v + dt u
    r = np.zeros(nz)
    r[xi(k + 1, 0)], r[xi(k, 0)], r[xi(k, 1)] = 1, -1, -dt
    rows.append(r); rhs.append(0.0)
    r = np.zeros(nz)
    r[xi(k + 1, 1)], r[xi(k, 1)], r[ui(k)] = 1, -1, -dt
    rows.append(r); rhs.append(0.0)
for i, v in enumerate([1.0, 0.0]):
    r = np.zeros(nz); r[xi(0, i)] = 1; rows.append(r); rhs.append(v)
for i in range(nx):
    r = np.zeros(nz); r[xi(N - 1, i)] = 1; rows.append(r); rhs.append(0.0)
A_eq, b_eq = np.array(rows), np.array(rhs)

bounds = [(None, None)] * (nx * N) + [(-1.0, 1.0)] * (nu * (N - 1))
direct = linprog(cost, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
print(f"constrained optimum {direct.fun:.15g}")

# exact penalty: box rows also penalized, z free; e = p - q per equality row,
# s >= u - 1 and s' >= -1 - u per control
m_eq, m_b = A_eq.shape[0], N - 1
nv = nz + 2 * m_eq + 2 * m_b
c = np.concatenate([cost, lam * np.ones(2 * m_eq + 2 * m_b)])
Aeq = np.hstack([A_eq, -np.eye(m_eq), np.eye(m_eq), np.zeros((m_eq, 2 * m_b))])
Aub = np.zeros((2 * m_b, nv))
bub = np.zeros(2 * m_b)
for k in range(m_b):
    Aub[k, ui(k)] = 1; Aub[k, nz + 2 * m_eq + k] = -1; bub[k] = 1.0
    Aub[m_b + k, ui(k)] = -1; Aub[m_b + k, nz + 2 * m_eq + m_b + k] = -1; bub[m_b + k] = 1.0
pb = [(None, None)] * nz + [(0, None)] * (2 * m_eq + 2 * m_b)
pen = linprog(c, A_ub=Aub, b_ub=bub, A_eq=Aeq, b_eq=b_eq, bounds=pb, method="highs")
print(f"penalized optimum   {pen.fun:.15g}")
