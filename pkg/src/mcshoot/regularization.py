"""Affine-extension regularization of the mean curvature flux phi(s) = s / sqrt(1 + s^2).

phi_n agrees with phi on [-n, n] and continues with the tangent line outside,
so it is an odd C^1 bijection of the real line. All maps below are closed
forms; nothing is inverted numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_LADDER_EXP = 10


def dyadic_ladder(m: int = DEFAULT_LADDER_EXP, start: int = 1) -> list[int]:
    """Regularization indices 2**start, ..., 2**m."""
    return [2**i for i in range(start, m + 1)]


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def phi_exact(s):
    s = np.asarray(s, dtype=float)
    return _out(s / np.sqrt(1.0 + s * s))


def Phi_exact(s):
    s = np.asarray(s, dtype=float)
    return _out(np.sqrt(1.0 + s * s) - 1.0)


@dataclass(frozen=True)
class RegularizedOperator:
    """phi_n together with its slope, primitive, inverse and K_n(s) = s phi_n(s) - Phi_n(s)."""

    n: float

    def __post_init__(self):
        if not self.n > 0:
            raise ValueError("regularization index must be positive")
        n = float(self.n)
        r = math.sqrt(1.0 + n * n)
        object.__setattr__(self, "phi_at_n", n / r)
        object.__setattr__(self, "slope_at_n", r**-3)
        object.__setattr__(self, "Phi_at_n", r - 1.0)
        object.__setattr__(self, "K_at_n", 1.0 - 1.0 / r)

    # vectorised maps -------------------------------------------------------------
    def phi(self, s):
        s = np.asarray(s, dtype=float)
        a = np.abs(s)
        inner = s / np.sqrt(1.0 + s * s)
        outer = np.sign(s) * (self.phi_at_n + self.slope_at_n * (a - self.n))
        return _out(np.where(a <= self.n, inner, outer))

    def dphi(self, s):
        s = np.asarray(s, dtype=float)
        a = np.minimum(np.abs(s), self.n)
        return _out((1.0 + a * a) ** -1.5)

    def Phi(self, s):
        s = np.asarray(s, dtype=float)
        a = np.abs(s)
        inner = np.sqrt(1.0 + s * s) - 1.0
        t = a - self.n
        outer = self.Phi_at_n + self.phi_at_n * t + 0.5 * self.slope_at_n * t * t
        return _out(np.where(a <= self.n, inner, outer))

    def phi_inv(self, v):
        v = np.asarray(v, dtype=float)
        a = np.abs(v)
        with np.errstate(invalid="ignore", divide="ignore"):
            inner = v / np.sqrt(1.0 - v * v)
        outer = np.sign(v) * (self.n + (a - self.phi_at_n) / self.slope_at_n)
        return _out(np.where(a <= self.phi_at_n, inner, outer))

    def K(self, s):
        s = np.asarray(s, dtype=float)
        a = np.abs(s)
        inner = 1.0 - 1.0 / np.sqrt(1.0 + s * s)
        # d/ds K_n = s phi_n'(s), constant slope beyond n
        outer = self.K_at_n + 0.5 * self.slope_at_n * (a * a - self.n * self.n)
        return _out(np.where(a <= self.n, inner, outer))

    # scalar fast paths for the integrator ------------------------------------------
    def phi_inv_scalar(self, v: float) -> float:
        a = abs(v)
        if a <= self.phi_at_n:
            return v / math.sqrt(1.0 - v * v)
        w = self.n + (a - self.phi_at_n) / self.slope_at_n
        return w if v > 0 else -w

    def K_of_flux(self, v):
        """K_n(phi_n^{-1}(v)), written to avoid cancellation for |v| near 1 on the inner branch."""
        v = np.asarray(v, dtype=float)
        a = np.abs(v)
        with np.errstate(invalid="ignore"):
            inner = 1.0 - np.sqrt(np.maximum(1.0 - v * v, 0.0))
        s = self.n + (a - self.phi_at_n) / self.slope_at_n
        outer = self.K_at_n + 0.5 * self.slope_at_n * (s * s - self.n * self.n)
        return _out(np.where(a <= self.phi_at_n, inner, outer))


def phi_n(op: RegularizedOperator, s):
    return op.phi(s)


def phi_inv_n(op: RegularizedOperator, v):
    return op.phi_inv(v)


def Phi_n(op: RegularizedOperator, s):
    return op.Phi(s)


def K_n(op: RegularizedOperator, s):
    return op.K(s)
