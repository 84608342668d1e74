"""Phase plane of the autonomous problem a(x) = a.

With constant weight the exact system u' = v / sqrt(1 - v^2), v' = -a f(u)
is Hamiltonian with H(u, v) = 1 - sqrt(1 - v^2) + a F(u). Level sets that
reach |v| = 1 break apart; closed orbits around (u0, 0) have periods that
tend to the linearized value as the amplitude shrinks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import DomainError, EmptyLevel, NotClosed
from .integrator import HALF_PI, TWO_PI, dopri5
from .problem import Nonlinearity
from .regularization import RegularizedOperator


def hamiltonian(a: float, nl: Nonlinearity, u, v):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(np.abs(v) > 1):
        raise DomainError("|v| must not exceed 1")
    F = np.vectorize(nl.F_hat, otypes=[float])(u)
    out = 1.0 - np.sqrt(1.0 - v * v) + a * F
    return float(out) if out.ndim == 0 else out


def homoclinic_condition(a: float, nl: Nonlinearity) -> tuple[float, bool]:
    """a F(0); the orbit through the saddle (0, 0) is classical iff it is below one."""
    value = a * nl.F(0.0)
    return value, bool(value < 1.0)


def prototype_homoclinic_value(a: float, lam: float, p: float) -> float:
    """Closed form of a F(0) for f(s) = -lam s + s^p."""
    return a * lam ** ((p + 1) / (p - 1)) * (p - 1) / (2 * (p + 1))


def linear_period(a: float, nl: Nonlinearity) -> float:
    """Period of the linearization at (u0, 0): 2 pi / sqrt(a f'(u0))."""
    return TWO_PI / math.sqrt(a * nl.fprime_u0)


def stated_center_period(nl: Nonlinearity) -> float:
    """2 pi / sqrt(f'(u0)); coincides with :func:`linear_period` only for a = 1."""
    return TWO_PI / math.sqrt(nl.fprime_u0)


@dataclass
class LevelSet:
    h: float
    curves: list  # arrays of shape (m, 2)
    closed: list  # bool per curve

    @property
    def disconnected(self) -> bool:
        return len(self.curves) > 1


@dataclass
class PhasePortrait:
    a: float
    h_levels: list
    curves: list  # per level: list of (m, 2) arrays
    homoclinic_exists: bool
    homoclinic_value: float
    breakdown_levels: list = field(default_factory=list)


def _admissible_intervals(g, lo, hi, samples):
    """Maximal sub-intervals of [lo, hi] where g >= 0, ends refined by Brent."""
    us = np.linspace(lo, hi, samples)
    gs = np.array([g(u) for u in us])
    ok = gs >= 0
    out = []
    i = 0
    while i < len(us):
        if not ok[i]:
            i += 1
            continue
        j = i
        while j + 1 < len(us) and ok[j + 1]:
            j += 1
        left = us[i] if i == 0 else optimize.brentq(g, us[i - 1], us[i], xtol=1e-15)
        right = us[j] if j == len(us) - 1 else optimize.brentq(g, us[j], us[j + 1], xtol=1e-15)
        out.append((left, right, i == 0, j == len(us) - 1))
        i = j + 1
    return out


def level_set(a: float, nl: Nonlinearity, h: float, u_range=None, samples: int = 801) -> LevelSet:
    """Polylines of {H = h}, one per connected component.

    Each admissible u-interval (0 <= h - aF(u) <= 1) yields one component,
    traced along the upper branch and back along the lower one. Nodes are
    clustered toward the interval ends where the branches fold or reach
    |v| = 1.
    """
    if h < 0:
        raise EmptyLevel("levels below zero are empty")
    u0 = nl.u0
    if h == 0:
        return LevelSet(0.0, [np.array([[u0, 0.0]])], [True])
    lo, hi = (-0.5 * u0, 3.0 * u0) if u_range is None else u_range
    aF = lambda u: a * nl.F_hat(u)
    g = lambda u: min(h - aF(u), 1.0 - (h - aF(u)))
    # ensure u0 is a node so that a thin interval around it is not missed
    grid_n = max(samples, 64)
    intervals = _admissible_intervals(g, lo, hi, grid_n)
    if not intervals and g(u0) >= 0:
        intervals = [(u0, u0, False, False)]
    if not intervals:
        raise EmptyLevel(f"no admissible u for h={h}")
    curves, closed = [], []
    for left, right, cut_l, cut_r in intervals:
        t = np.linspace(0.0, math.pi, samples)
        us = 0.5 * (left + right) - 0.5 * (right - left) * np.cos(t)
        gap = np.clip(h - np.array([aF(u) for u in us]), 0.0, 1.0)
        vs = np.sqrt(np.clip(1.0 - (1.0 - gap) ** 2, 0.0, 1.0))
        upper = np.column_stack([us, vs])
        lower = np.column_stack([us[::-1], -vs[::-1]])
        # branches meet where v = 0 (fold); otherwise the polyline runs through |v| = 1
        fold_l = not cut_l and abs(h - aF(left)) < 1e-9
        fold_r = not cut_r and abs(h - aF(right)) < 1e-9
        if fold_r:
            lower = lower[1:]
        curve = np.vstack([upper, lower])
        is_closed = fold_l and fold_r
        if is_closed:
            curve = np.vstack([curve, curve[:1]])
        curves.append(curve)
        closed.append(bool(is_closed))
    return LevelSet(float(h), curves, closed)


def phase_portrait(a: float, nl: Nonlinearity, levels, u_range=None, samples: int = 801) -> PhasePortrait:
    value, holds = homoclinic_condition(a, nl)
    curves, breakdown = [], []
    for h in levels:
        try:
            ls = level_set(a, nl, h, u_range, samples)
        except EmptyLevel:
            curves.append([])
            continue
        curves.append(ls.curves)
        if h >= 1 and ls.disconnected:
            breakdown.append(float(h))
    return PhasePortrait(a, [float(h) for h in levels], curves, holds, value, breakdown)


def write_polylines(path, curves) -> None:
    """Whitespace separated 'u v' rows, one blank line between components."""
    with open(path, "w") as fh:
        for i, c in enumerate(curves):
            if i:
                fh.write("\n")
            for u, v in c:
                fh.write(f"{u:.17g} {v:.17g}\n")


def orbit_period(a: float, nl: Nonlinearity, amplitude: float, tol: float = 1e-11,
                 t_max: float = 1e3) -> float:
    """Time for the orbit through (u0 + amplitude, 0) to turn once around (u0, 0).

    The exact flux is used: the regularization index is chosen above the
    largest |u'| the energy level allows, so phi_n = phi along the orbit.
    """
    u0 = nl.u0
    h = a * nl.F_hat(u0 + amplitude)
    if amplitude == 0 or not h < min(1.0, a * nl.F(0.0)):
        raise NotClosed(f"level {h:.6g} is not below min(1, aF(0)); no closed orbit")
    vmax = math.sqrt(1.0 - (1.0 - h) ** 2)
    op = RegularizedOperator(2.0 * vmax / (1.0 - h) + 1.0)
    inv = op.phi_inv_scalar

    def rhs(x, y):
        u = u0 + y[0]
        if abs(y[1]) >= 1.0 - 1e-9:
            raise NotClosed("|v| reached 1")
        return (inv(y[1]), -a * nl.f_hat(u))

    period_guess = linear_period(a, nl)
    floor = min(1.0, abs(amplitude))
    x, y = 0.0, (float(amplitude), 0.0)
    theta = 0.0 if amplitude > 0 else math.pi
    target = theta + TWO_PI
    chunk = period_guess
    while x < t_max:
        raw = dopri5(rhs, x, y, min(x + chunk, t_max), tol, hmax=period_guess / 16,
                     scale_floor=floor)
        xs = np.array(raw.x)
        ys = np.array(raw.y)
        ang = np.arctan2(-ys[:, 1], ys[:, 0])
        lifted = theta + np.concatenate([[0.0], np.cumsum((np.diff(ang) + HALF_PI) % TWO_PI - HALF_PI)])
        if lifted[-1] >= target:
            k = int(np.searchsorted(lifted, target)) - 1
            qk = raw.q[k]
            xk, hk = xs[k], xs[k + 1] - xs[k]

            def ang_at(s):
                w = ys[k, 0] + hk * sum(qk[0][m] * s ** (m + 1) for m in range(4))
                v = ys[k, 1] + hk * sum(qk[1][m] * s ** (m + 1) for m in range(4))
                d = (math.atan2(-v, w) - ang[k] + HALF_PI) % TWO_PI - HALF_PI
                return lifted[k] + d - target

            s = optimize.brentq(ang_at, 0.0, 1.0, xtol=1e-10 / max(hk, 1e-300))
            return float(xk + s * hk)
        x, y, theta = xs[-1], tuple(ys[-1]), lifted[-1]
    raise NotClosed(f"no return within time {t_max}")
