"""Dense-output integration of the regularized Cauchy problem in the (u, v) phase plane.

The state is (u, v) with v = phi_n(u') the flux. The system

    u' = phi_n^{-1}(v),   v' = -a(x) f_hat(u),   u(0) = d, v(0) = 0

is advanced with the Dormand-Prince 5(4) pair under PI step control. The
polar angle around (u0, 0) is measured clockwise and lifted continuously.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import StepSizeUnderflow
from .problem import Problem
from .regularization import RegularizedOperator

TWO_PI = 2.0 * math.pi
HALF_PI = 0.5 * math.pi

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
# 5th order minus embedded 4th order weights
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)
# continuous extension: y(x0 + s h) = y0 + h * sum_j Q[j] s^(j+1), Q = K^T P
_P = (
    (1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432),
    (0.0, 0.0, 0.0, 0.0),
    (0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799),
    (0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072),
    (0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632),
    (0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844),
    (0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423),
)

# columns of _P restricted to the stages with non-zero weight
P_COLS = tuple(tuple(_P[j][m] for j in (0, 2, 3, 4, 5, 6)) for m in range(4))

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0
PI_ALPHA = 0.7 / 5
PI_BETA = 0.4 / 5


@dataclass
class RawSolution:
    x: list
    y: list
    dy: list
    q: list  # per step: tuple over components of 4 dense coefficients
    n_rejected: int = 0


def _initial_step(rhs, x0, y0, f0, tol, span):
    dim = len(y0)
    sc = [tol * max(1.0, abs(y0[i])) for i in range(dim)]
    d0 = max(abs(y0[i]) / sc[i] for i in range(dim))
    d1 = max(abs(f0[i]) / sc[i] for i in range(dim))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    y1 = tuple(y0[i] + h0 * f0[i] for i in range(dim))
    f1 = rhs(x0 + h0, y1)
    d2 = max(abs(f1[i] - f0[i]) / sc[i] for i in range(dim)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1, span)


def dopri5(
    rhs: Callable[[float, tuple], tuple],
    x0: float,
    y0: Sequence[float],
    x1: float,
    tol: float,
    hmax: float | None = None,
    step_check: Callable[[tuple, tuple, tuple], bool] | None = None,
    max_steps: int = 2_000_000,
    scale_floor: float = 1.0,
) -> RawSolution:
    """Integrate y' = rhs(x, y) on [x0, x1] with local error per step below ``tol``.

    The error of component i is measured against
    ``tol * max(scale_floor, |y_i|)`` at both ends of the step.

    ``step_check(y_old, y_mid, y_new)`` may veto an otherwise accepted step;
    the step is then halved.
    """
    dim = len(y0)
    rng = range(dim)
    span = x1 - x0
    hmax = span if hmax is None else min(hmax, span)
    y = tuple(float(c) for c in y0)
    x = float(x0)
    k1 = rhs(x, y)
    out = RawSolution([x], [y], [k1], [])
    h = min(_initial_step(rhs, x, y, k1, tol * scale_floor, span), hmax)
    hmin = 1e-15 * max(1.0, abs(x1))
    err_prev = 1.0
    rejected_last = False
    C2, C3, C4, C5 = _C[1:5]
    (A21,), (A31, A32), (A41, A42, A43), (A51, A52, A53, A54), (A61, A62, A63, A64, A65) = _A[1:6]
    B1, _, B3, B4, B5, B6 = _A[6]
    E1, _, E3, E4, E5, E6, E7 = _E

    for _ in range(max_steps):
        if x >= x1:
            break
        if x + 1.01 * h >= x1:
            h = x1 - x
        k2 = rhs(x + C2 * h, tuple(y_ + h * (A21 * a_) for y_, a_ in zip(y, k1)))
        k3 = rhs(x + C3 * h, tuple(y_ + h * (A31 * a_ + A32 * b_) for y_, a_, b_ in zip(y, k1, k2)))
        k4 = rhs(x + C4 * h, tuple(y_ + h * (A41 * a_ + A42 * b_ + A43 * c_)
                                   for y_, a_, b_, c_ in zip(y, k1, k2, k3)))
        k5 = rhs(x + C5 * h, tuple(y_ + h * (A51 * a_ + A52 * b_ + A53 * c_ + A54 * d_)
                                   for y_, a_, b_, c_, d_ in zip(y, k1, k2, k3, k4)))
        k6 = rhs(x + h, tuple(y_ + h * (A61 * a_ + A62 * b_ + A63 * c_ + A64 * d_ + A65 * e_)
                              for y_, a_, b_, c_, d_, e_ in zip(y, k1, k2, k3, k4, k5)))
        y_new = tuple(y_ + h * (B1 * a_ + B3 * c_ + B4 * d_ + B5 * e_ + B6 * f_)
                      for y_, a_, c_, d_, e_, f_ in zip(y, k1, k3, k4, k5, k6))
        k7 = rhs(x + h, y_new)
        err = 0.0
        for i in rng:
            e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
            scale = tol * max(scale_floor, abs(y[i]), abs(y_new[i]))
            err = max(err, abs(e) / scale)
        if not math.isfinite(err):
            err = 1e10

        if err <= 1.0:
            q = tuple(tuple(a_ * p1 + c_ * p3 + d_ * p4 + e_ * p5 + f_ * p6 + g_ * p7
                            for p1, p3, p4, p5, p6, p7 in P_COLS)
                      for a_, c_, d_, e_, f_, g_ in zip(k1, k3, k4, k5, k6, k7))
            if step_check is not None:
                y_mid = tuple(y[i] + h * (q[i][0] * 0.5 + q[i][1] * 0.25 + q[i][2] * 0.125 + q[i][3] * 0.0625)
                              for i in rng)
                if not step_check(y, y_mid, y_new):
                    h *= 0.5
                    rejected_last = True
                    out.n_rejected += 1
                    if h < hmin:
                        raise StepSizeUnderflow(x, h)
                    continue
            x_new = x1 if h == x1 - x else x + h
            out.x.append(x_new)
            out.y.append(y_new)
            out.dy.append(k7)
            out.q.append(q)
            x, y, k1 = x_new, y_new, k7
            if err == 0.0:
                fac = MAX_FACTOR
            else:
                fac = SAFETY * err**-PI_ALPHA * err_prev**PI_BETA
                fac = min(MAX_FACTOR, max(MIN_FACTOR, fac))
            if rejected_last:
                fac = min(fac, 1.0)
            h = min(h * fac, hmax)
            err_prev = max(err, 1e-4)
            rejected_last = False
        else:
            fac = max(MIN_FACTOR, SAFETY * err ** (-1 / 5))
            h *= fac
            rejected_last = True
            out.n_rejected += 1
            if h < hmin:
                raise StepSizeUnderflow(x, h)
    else:
        raise StepSizeUnderflow(x, h)
    return out


def _wrap(d: float) -> float:
    """Reduce an angle increment to [-pi/2, 3pi/2)."""
    return (d + HALF_PI) % TWO_PI - HALF_PI


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Accepted-step nodes of one Cauchy integration plus its dense output."""

    x: np.ndarray
    u: np.ndarray
    v: np.ndarray
    du: np.ndarray
    dv: np.ndarray
    theta: np.ndarray
    energy: np.ndarray
    q: np.ndarray  # shape (steps, 2, 4)
    n: float
    d: float
    u0: float
    tol: float
    degenerate: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def rotation(self) -> float:
        return float((self.theta[-1] - self.theta[0]) / math.pi)

    def _locate(self, xq):
        xq = np.asarray(xq, dtype=float)
        k = np.clip(np.searchsorted(self.x, xq, side="right") - 1, 0, len(self.x) - 2)
        h = self.x[k + 1] - self.x[k]
        s = np.where(h > 0, (xq - self.x[k]) / np.where(h > 0, h, 1.0), 0.0)
        return xq, k, h, s

    def dense_eval(self, xq):
        """(u, v) at arbitrary points of [0, 1]."""
        xq, k, h, s = self._locate(xq)
        if self.degenerate:
            return np.full_like(xq, self.u[0]), np.zeros_like(xq)
        powers = np.stack([s, s**2, s**3, s**4], axis=-1)
        q = self.q[k]
        u = self.u[k] + h * np.sum(q[..., 0, :] * powers, axis=-1)
        v = self.v[k] + h * np.sum(q[..., 1, :] * powers, axis=-1)
        return u, v

    def dense_theta(self, xq):
        """Lifted angle at arbitrary points, anchored at the preceding node."""
        xq, k, _, _ = self._locate(xq)
        u, v = self.dense_eval(xq)
        raw = np.arctan2(-v, u - self.u0)
        raw_k = np.arctan2(-self.v[k], self.u[k] - self.u0)
        d = (raw - raw_k + HALF_PI) % TWO_PI - HALF_PI
        return self.theta[k] + d

    def dense_du(self, xq, op: RegularizedOperator):
        _, v = self.dense_eval(xq)
        return op.phi_inv(v)

    def to_csv(self, path) -> None:
        write_csv(path, ["x", "u", "v", "theta", "energy"],
                  zip(self.x, self.u, self.v, self.theta, self.energy))


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([format(float(c), ".17g") for c in row])


def cauchy_rhs(op: RegularizedOperator, problem: Problem):
    a = problem.weight.scalar()
    f = problem.nl.f
    inv = op.phi_inv_scalar

    def rhs(x, y):
        u, v = y
        fu = f(u) if u > 0.0 else 0.0
        return (inv(v), -a(x) * fu)

    return rhs


def integrate_cauchy(op: RegularizedOperator, problem: Problem, d: float, tol: float = 1e-10,
                     hmax: float = 0.05) -> Trajectory:
    """Integrate the shooting problem from (d, 0) over [0, 1].

    A start at the equilibrium returns the constant trajectory with
    ``degenerate=True``. Steps whose angle advance exceeds a quarter turn per
    half step are rejected so the lift never skips a branch.
    """
    if not (1e-12 <= tol <= 1e-4):
        raise ValueError("tol must lie in [1e-12, 1e-4]")
    if d < 0:
        raise ValueError("shooting value must be non-negative")
    u0 = problem.nl.u0
    d = float(d)
    if d == u0:
        x = np.array([0.0, 1.0])
        z = np.zeros(2)
        return Trajectory(x, np.full(2, u0), z, z.copy(), z.copy(), z.copy(), z.copy(),
                          np.zeros((1, 2, 4)), op.n, d, u0, tol, degenerate=True)

    # state is (w, v) with w = u - u0, errors relative to the starting radius
    def check(y0, ym, y1):
        r0 = math.atan2(-y0[1], y0[0])
        rm = math.atan2(-ym[1], ym[0])
        r1 = math.atan2(-y1[1], y1[0])
        d1 = _wrap(rm - r0)
        d2 = _wrap(r1 - rm)
        return -1e-9 < d1 < HALF_PI and -1e-9 < d2 < HALF_PI

    rhs_u = cauchy_rhs(op, problem)
    rhs = lambda x, y: rhs_u(x, (u0 + y[0], y[1]))
    w0 = d - u0
    raw = dopri5(rhs, 0.0, (w0, 0.0), 1.0, tol, hmax=hmax, step_check=check,
                 scale_floor=min(1.0, abs(w0)))
    x = np.array(raw.x)
    y = np.array(raw.y)
    dy = np.array(raw.dy)
    w, v = y[:, 0], y[:, 1]
    u = u0 + w
    rawang = np.arctan2(-v, w)
    theta = np.empty_like(x)
    theta[0] = math.pi if d < u0 else 0.0
    incr = (np.diff(rawang) + HALF_PI) % TWO_PI - HALF_PI
    theta[1:] = theta[0] + np.cumsum(incr)
    a = problem.weight
    Fh = np.array([problem.nl.F_hat(s) for s in u])
    energy = op.K_of_flux(v) + np.asarray(a(x), dtype=float) * Fh
    return Trajectory(x, u, v, dy[:, 0], dy[:, 1], theta, np.asarray(energy, dtype=float),
                      np.array(raw.q), op.n, d, u0, tol,
                      meta={"steps": len(x) - 1, "rejected": raw.n_rejected})


def energy_profile(t: Trajectory) -> np.ndarray:
    """Array of rows (x, E_n(x)) at the trajectory nodes."""
    return np.column_stack([t.x, t.energy])


_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


def flux_identity_residual(t: Trajectory, problem: Problem) -> float:
    """|v(1) - v(0) + int_0^1 a f_hat(u) dx| by Gauss-Legendre on each step of the dense output."""
    if t.degenerate:
        return abs(float(t.v[-1] - t.v[0]))
    a = problem.weight
    xl, xr = t.x[:-1], t.x[1:]
    mid, half = 0.5 * (xl + xr), 0.5 * (xr - xl)
    xq = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    u, _ = t.dense_eval(xq)
    fu = np.array([problem.nl.f_hat(s) for s in u])
    integrand = (np.asarray(a(xq), dtype=float) * fu).reshape(len(mid), -1)
    integral = float(np.sum(half * (integrand @ _GL_W)))
    return abs(float(t.v[-1] - t.v[0]) + integral)


def angle_rate(op: RegularizedOperator, problem: Problem, x, u, v):
    """Angular velocity from the polar form of the system (cross-check for the lifted angle)."""
    u0 = problem.nl.u0
    x, u, v = (np.asarray(z, dtype=float) for z in (x, u, v))
    fu = np.array([problem.nl.f_hat(s) for s in np.atleast_1d(u)]).reshape(u.shape)
    rho2 = (u - u0) ** 2 + v**2
    return (v * op.phi_inv(v) + np.asarray(problem.weight(x)) * fu * (u - u0)) / rho2
