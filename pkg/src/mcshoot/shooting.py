"""Shooting for Neumann solutions of the regularized problem with prescribed half-turn counts.

A start (d, 0) whose lifted angle advances by exactly j pi over [0, 1] ends on
the u axis again, i.e. satisfies u'(1) = 0, and its solution crosses u0
exactly j times.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import MissingSolution, NotReached, NotSatisfied, ScanFailure
from .integrator import Trajectory, integrate_cauchy
from .problem import Problem, compute_ubar
from .regularization import RegularizedOperator

log = logging.getLogger(__name__)

SIDES = ("below", "above")
DEFAULT_TOL = 1e-10
GRID_POINTS = 256
PROBE_LEVELS = 40
SCAN_CAP_FACTOR = 1e6
BOUNDARY_TOL = 1e-8
MIN_TOL = 1e-12


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("MCSHOOT_THREADS", "1")))
    except ValueError:
        return 1


def parallel_map(fn, items):
    """Ordered map; uses a thread pool when MCSHOOT_THREADS > 1."""
    items = list(items)
    nw = worker_count()
    if nw == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=nw) as ex:
        return list(ex.map(fn, items))


@dataclass(frozen=True, eq=False)
class ApproxSolution:
    """Neumann solution of the regularized problem found by shooting."""

    n: float
    j: int
    side: str
    d: float
    trajectory: Trajectory
    zeros: list
    rotation: float
    boundary_residual: float
    extremum_gap: float
    extras: list = field(default_factory=list)

    @property
    def u0(self) -> float:
        return self.trajectory.u0

    def summary(self) -> dict:
        return {
            "n": self.n,
            "j": self.j,
            "side": self.side,
            "d": self.d,
            "zeros": [float(z) for z in self.zeros],
            "rotation": self.rotation,
            "boundary_residual": self.boundary_residual,
            "extremum_gap": self.extremum_gap,
            "extras": [float(e) for e in self.extras],
        }


@dataclass(frozen=True)
class ProbeResult:
    delta: float
    rotation_below: float
    rotation_above: float


def rotation_number(op: RegularizedOperator, problem: Problem, d: float, tol: float = DEFAULT_TOL) -> float:
    """Half-turns (theta(1) - theta(0)) / pi of the orbit started at (d, 0)."""
    if d < 0:
        raise ValueError("d must be non-negative")
    if d == problem.nl.u0:
        raise ValueError("rotation is undefined at the equilibrium")
    return integrate_cauchy(op, problem, d, tol).rotation


def probe_near_u0(op: RegularizedOperator, problem: Problem, k: int, tol: float = DEFAULT_TOL,
                  levels: int = PROBE_LEVELS) -> ProbeResult:
    """Shrink delta = u0 2^-m until both u0 -/+ delta rotate more than k half-turns."""
    u0 = problem.nl.u0
    if k <= 0:
        delta = 0.5 * u0
        return ProbeResult(delta, rotation_number(op, problem, u0 - delta, tol),
                           rotation_number(op, problem, u0 + delta, tol))
    best = (0.0, 0.0)
    for m in range(1, levels + 1):
        delta = u0 * 2.0**-m
        rb = rotation_number(op, problem, u0 - delta, tol)
        ra = rotation_number(op, problem, u0 + delta, tol)
        best = (max(best[0], rb), max(best[1], ra))
        if rb > k and ra > k:
            return ProbeResult(delta, rb, ra)
    raise NotReached(
        f"rotation near u0 never exceeded k={k} (best below {best[0]:.6g}, above {best[1]:.6g}); "
        f"f'(u0)={problem.nl.fprime_u0:.6g} is probably not above lambda_{k + 1}"
    )


def upper_shoot_bound(op: RegularizedOperator, problem: Problem, tol: float = DEFAULT_TOL) -> float:
    """A start above u0 whose orbit makes less than one half-turn.

    Under (f_ap) this is the root u_bar of F(u) = C_a F(0); otherwise d is
    doubled from 2 u0 until the rotation drops below one.
    """
    try:
        return compute_ubar(problem.nl, problem.weight)
    except NotSatisfied:
        pass
    u0 = problem.nl.u0
    d = 2.0 * u0
    while d <= SCAN_CAP_FACTOR * u0:
        if rotation_number(op, problem, d, tol) < 1.0:
            return d
        d *= 2.0
    raise ScanFailure(f"rotation stayed >= 1 up to d={SCAN_CAP_FACTOR * u0:.6g}")


def count_zeros(t: Trajectory, u0: float | None = None, xtol: float = 1e-10) -> list[float]:
    """Points where the lifted angle crosses theta(0) + (i - 1/2) pi, i = 1, 2, ..."""
    if t.degenerate:
        return []
    th0, th1 = t.theta[0], t.theta[-1]
    zeros = []
    i = 1
    while th0 + (i - 0.5) * math.pi < th1:
        target = th0 + (i - 0.5) * math.pi
        k = int(np.searchsorted(t.theta, target)) - 1
        k = min(max(k, 0), len(t.x) - 2)
        lo, hi = t.x[k], t.x[k + 1]
        g = lambda x: float(t.dense_theta(x)) - target
        if g(lo) >= 0:
            zeros.append(float(lo))
        elif g(hi) <= 0:
            zeros.append(float(hi))
        else:
            zeros.append(float(optimize.brentq(g, lo, hi, xtol=xtol)))
        i += 1
    return zeros


def extremum_points(t: Trajectory) -> list[float]:
    """Endpoints plus interior points where the angle crosses theta(0) + i pi (u' = 0)."""
    pts = [0.0]
    th0, th1 = t.theta[0], t.theta[-1]
    i = 1
    while th0 + i * math.pi < th1 - 1e-9:
        target = th0 + i * math.pi
        k = min(max(int(np.searchsorted(t.theta, target)) - 1, 0), len(t.x) - 2)
        g = lambda x: float(t.dense_theta(x)) - target
        lo, hi = t.x[k], t.x[k + 1]
        pts.append(float(optimize.brentq(g, lo, hi, xtol=1e-12)) if g(lo) < 0 < g(hi) else float(lo))
        i += 1
    pts.append(1.0)
    return pts


def extremum_gap(t: Trajectory) -> float:
    """min |u - u0| over all extremum points, endpoints included."""
    u, _ = t.dense_eval(np.array(extremum_points(t)))
    return float(np.min(np.abs(u - t.u0)))


def _scan_grid(u0: float, delta: float, far: float, side: str, points: int) -> np.ndarray:
    """Starts log-spaced in distance from u0, from delta out to |far - u0|, far end included."""
    span = abs(far - u0)
    dist = np.geomspace(delta, span, points)
    grid = u0 - dist if side == "below" else u0 + dist
    return grid


def _brackets(grid, rots, j):
    out = []
    for i in range(len(grid) - 1):
        a, b = rots[i] - j, rots[i + 1] - j
        if a == 0.0:
            out.append((grid[i], grid[i]))
        elif a * b < 0:
            out.append((grid[i], grid[i + 1]))
    if rots[-1] - j == 0.0:
        out.append((grid[-1], grid[-1]))
    return out


def refine_root(op, problem, j, lo, hi, tol):
    """Start d in [lo, hi] with rotation exactly j (Brent on d)."""
    u0 = problem.nl.u0
    if lo == hi:
        return float(lo)
    g = lambda d: rotation_number(op, problem, d, tol) - j
    a, b = min(lo, hi), max(lo, hi)
    return float(optimize.brentq(g, a, b, xtol=1e-13 * u0, rtol=4 * np.finfo(float).eps, maxiter=200))


def polish_root(op, problem, j, d, tol):
    """Tighten the integration tolerance until |v(1)| <= BOUNDARY_TOL.

    Orbits with steep stretches amplify the integrator's global error, which
    makes d -> rotation jagged at the level of the boundary tolerance. The
    root is then re-bracketed around d at a 100x smaller tolerance, down to
    the floor MIN_TOL. Returns (d, tol, trajectory).
    """
    u0 = problem.nl.u0
    t = integrate_cauchy(op, problem, d, tol)
    while abs(float(t.v[-1])) > BOUNDARY_TOL and tol > MIN_TOL:
        tol = max(0.01 * tol, MIN_TOL)
        g = lambda s: rotation_number(op, problem, s, tol) - j
        w = 1e-12 * u0
        lo_cap, hi_cap = (0.0, u0) if d < u0 else (u0, math.inf)
        while w <= 1e-6 * u0:
            lo, hi = max(d - w, lo_cap), min(d + w, hi_cap)
            if lo < hi and lo != u0 and hi != u0 and g(lo) * g(hi) < 0:
                d = float(optimize.brentq(g, lo, hi, xtol=1e-15 * u0, rtol=4 * np.finfo(float).eps,
                                          maxiter=200))
                break
            w *= 4.0
        t = integrate_cauchy(op, problem, d, tol)
    return d, tol, t


def build_solution(op, problem, j, side, d, tol, extras=()) -> ApproxSolution:
    d, tol, t = polish_root(op, problem, j, d, tol)
    return ApproxSolution(
        n=op.n, j=j, side=side, d=float(d), trajectory=t, zeros=count_zeros(t),
        rotation=t.rotation, boundary_residual=abs(float(t.v[-1])),
        extremum_gap=extremum_gap(t), extras=list(extras),
    )


def scan_side(op, problem, side, delta, far, tol, points=GRID_POINTS):
    grid = _scan_grid(problem.nl.u0, delta, far, side, points)
    if side == "below" and far == 0.0:
        grid[-1] = 0.0
    rots = np.array(parallel_map(lambda d: integrate_cauchy(op, problem, d, tol).rotation, grid))
    return grid, rots


def solve_side(op, problem, j, side, delta, far, tol, points=GRID_POINTS, window=None) -> ApproxSolution:
    """One (j, side) solution; ``window=(lo, hi)`` restricts the scan to a sub-range of starts."""
    u0 = problem.nl.u0
    for refine in (1, 8):
        if window is None:
            grid, rots = scan_side(op, problem, side, delta, far, tol, points * refine)
        else:
            grid = np.linspace(window[0], window[1], max(16, points * refine // 8))
            rots = np.array(parallel_map(lambda d: integrate_cauchy(op, problem, d, tol).rotation, grid))
        brackets = _brackets(grid, rots, j)
        if brackets:
            break
    else:
        raise MissingSolution(j, side, "no sign change of rotation - j on the refined grid")
    # farthest from u0 first
    brackets.sort(key=lambda br: -max(abs(br[0] - u0), abs(br[1] - u0)))
    roots = [refine_root(op, problem, j, lo, hi, tol) for lo, hi in brackets]
    return build_solution(op, problem, j, side, roots[0], tol, extras=roots[1:])


def solve_approx(op: RegularizedOperator, problem: Problem, k: int, tol: float = DEFAULT_TOL,
                 points: int = GRID_POINTS) -> list[ApproxSolution]:
    """All 2k solutions with j = 1..k half-turns on both sides of u0, sorted by (side, j)."""
    if k <= 0:
        return []
    try:
        probe = probe_near_u0(op, problem, k, tol)
    except NotReached as exc:
        raise MissingSolution(1, "below", f"probe failed: {exc}") from exc
    u0 = problem.nl.u0
    upper = upper_shoot_bound(op, problem, tol)
    out = []
    for side, far in (("below", 0.0), ("above", upper)):
        grid, rots = scan_side(op, problem, side, probe.delta, far, tol, points)
        for j in range(1, k + 1):
            brackets = _brackets(grid, rots, j)
            if not brackets:
                grid8, rots8 = scan_side(op, problem, side, probe.delta, far, tol, points * 8)
                brackets = _brackets(grid8, rots8, j)
                if not brackets:
                    raise MissingSolution(j, side)
            brackets.sort(key=lambda br: -max(abs(br[0] - u0), abs(br[1] - u0)))
            roots = [refine_root(op, problem, j, lo, hi, tol) for lo, hi in brackets]
            out.append(build_solution(op, problem, j, side, roots[0], tol, extras=roots[1:]))
    out.sort(key=lambda s: (SIDES.index(s.side), s.j))
    return out


# --------------------------------------------------------------------------- diagnostics
def _d1(y, h):
    """Fourth-order central first derivative on interior points (two trimmed at each end)."""
    return (-y[4:] + 8 * y[3:-1] - 8 * y[1:-3] + y[:-4]) / (12 * h)


def equation_residual(sol: ApproxSolution, problem: Problem, samples: int = 20001) -> float:
    """sup |-(phi_n(u'))' - a f(u)| with the flux differentiated by finite differences on the dense output."""
    t = sol.trajectory
    xs = np.linspace(0.0, 1.0, samples)
    u, v = t.dense_eval(xs)
    h = xs[1] - xs[0]
    fu = np.array([problem.nl.f_hat(s) for s in u[2:-2]])
    return float(np.max(np.abs(-_d1(v, h) - np.asarray(problem.weight(xs[2:-2])) * fu)))


def derivative_consistency(sol: ApproxSolution, samples: int = 20001) -> float:
    """sup |u'_fd - phi_n^{-1}(v)| / max(1, |u'|) on the dense output.

    phi_n^{-1} is only C^1 at |v| = phi(n), so steps straddling |u'| = n
    carry a dense-output derivative error of order 1e-5 relative even at
    tol = 1e-10; elsewhere the value is near round-off.
    """
    op = RegularizedOperator(sol.n)
    xs = np.linspace(0.0, 1.0, samples)
    u, v = sol.trajectory.dense_eval(xs)
    du = op.phi_inv(v)[2:-2]
    return float(np.max(np.abs(_d1(u, xs[1] - xs[0]) - du) / np.maximum(1.0, np.abs(du))))


def sign_pattern_ok(sol: ApproxSolution, samples: int = 2001) -> bool:
    """u - u0 keeps one sign between consecutive zeros and alternates, starting with the side's sign."""
    t = sol.trajectory
    edges = [0.0] + list(sol.zeros) + [1.0]
    sign = -1.0 if sol.side == "below" else 1.0
    for a, b in zip(edges[:-1], edges[1:]):
        pad = 1e-6 * (b - a)
        xs = np.linspace(a + pad, b - pad, max(8, int(samples * (b - a))))
        u, _ = t.dense_eval(xs)
        if not np.all(sign * (u - t.u0) > 0):
            return False
        sign = -sign
    return True


def convexity_ok(sol: ApproxSolution, problem: Problem, samples: int = 2001) -> bool:
    """u'' has the sign of u0 - u: concave above u0, convex below."""
    t = sol.trajectory
    xs = np.linspace(0.0, 1.0, samples)
    u, v = t.dense_eval(xs)
    op = RegularizedOperator(sol.n)
    # u'' = -a f(u) / phi_n'(u')
    upp = -np.asarray(problem.weight(xs)) * np.array([problem.nl.f_hat(s) for s in u]) / op.dphi(op.phi_inv(v))
    return bool(np.all(upp * (u - t.u0) <= 1e-12))
