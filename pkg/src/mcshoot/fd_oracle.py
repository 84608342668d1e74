"""Independent finite-difference Newton solver for the regularized Neumann problem.

Cell-centred flux form on a uniform grid: interior rows
-(q_{i+1/2} - q_{i-1/2}) / h = a_i f(u_i) with q = phi_n((u_{i+1} - u_i) / h),
half cells with zero flux at the two boundary nodes.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded

from .errors import NoConvergence
from .problem import Problem
from .regularization import RegularizedOperator


def _residual_and_bands(u, h, aw, op, nl):
    N = len(u)
    s = np.diff(u) / h
    q = op.phi(s)
    dq = op.dphi(s) / h  # d q_{i+1/2} / d u_{i+1}; minus for u_i
    f = np.array([nl.f_hat(z) for z in u])
    fp = np.array([nl.fprime(z) if z > 0 else 0.0 for z in u])
    qext = np.concatenate([[0.0], q, [0.0]])
    width = np.full(N, h)
    width[0] = width[-1] = 0.5 * h
    R = -(qext[1:] - qext[:-1]) / width - aw * f
    # tridiagonal Jacobian in banded storage (upper, main, lower)
    dqext = np.concatenate([[0.0], dq, [0.0]])
    main = (dqext[1:] + dqext[:-1]) / width - aw * fp
    upper = np.zeros(N)
    lower = np.zeros(N)
    upper[1:] = -dq / width[:-1]
    lower[:-1] = -dq / width[1:]
    return R, np.vstack([upper, main, lower])


def fd_newton(op: RegularizedOperator, problem: Problem, u_init, tol: float = 1e-12, max_iter: int = 50):
    """Newton iteration from ``u_init`` (values on the uniform grid including both ends).

    Returns (x, u, iterations). Raises NoConvergence when the update stalls.
    """
    u = np.array(u_init, dtype=float)
    N = len(u)
    x = np.linspace(0.0, 1.0, N)
    h = 1.0 / (N - 1)
    aw = np.asarray(problem.weight(x), dtype=float) * np.ones(N)
    for it in range(1, max_iter + 1):
        R, bands = _residual_and_bands(u, h, aw, op, problem.nl)
        du = solve_banded((1, 1), bands, -R)
        # damp steps that would leave the admissible region
        lam = 1.0
        while np.any(u + lam * du < 0) and lam > 1e-4:
            lam *= 0.5
        u = u + lam * du
        if np.max(np.abs(du)) * lam <= tol * max(1.0, np.max(np.abs(u))):
            return x, u, it
    raise NoConvergence(f"finite-difference Newton did not converge in {max_iter} iterations")
