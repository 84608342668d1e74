"""Weight functions a(x), nonlinearities f(u) and the structural constants built from them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy import integrate, optimize

from .errors import DomainError, NotSatisfied

QUAD_RTOL = 1e-10
UBAR_CAP_FACTOR = 1e6

WEIGHT_FAMILIES = ("constant", "affine", "exponential", "cosine")


def _quad(fun, lo, hi, points=None):
    val, _ = integrate.quad(fun, lo, hi, epsabs=1e-14, epsrel=QUAD_RTOL, limit=200, points=points)
    return val


@dataclass(frozen=True)
class WeightFunction:
    """Closed-form positive weight on [0, 1].

    Families
    --------
    constant     a(x) = a0
    affine       a(x) = a0 + a1 x
    exponential  a(x) = a0 exp(sigma x)
    cosine       a(x) = a0 (1 + eps cos(pi x)),  |eps| < 1
    """

    family: str = "constant"
    a0: float = 1.0
    a1: float = 0.0
    sigma: float = 0.0
    eps: float = 0.0

    def __post_init__(self):
        if self.family not in WEIGHT_FAMILIES:
            raise ValueError(f"unknown weight family {self.family!r}")
        if self.family == "cosine" and not abs(self.eps) < 1:
            raise ValueError("cosine-perturbed weight needs |eps| < 1")
        if not (self.a0 > 0 and self(0.0) > 0 and self(1.0) > 0):
            raise ValueError("weight must be positive on [0, 1]")

    # convenience constructors -------------------------------------------------
    @classmethod
    def constant(cls, a0=1.0):
        return cls("constant", a0=a0)

    @classmethod
    def affine(cls, a0, a1):
        return cls("affine", a0=a0, a1=a1)

    @classmethod
    def exponential(cls, a0, sigma):
        return cls("exponential", a0=a0, sigma=sigma)

    @classmethod
    def cosine(cls, a0, eps):
        return cls("cosine", a0=a0, eps=eps)

    # evaluation ----------------------------------------------------------------
    def __call__(self, x):
        fam = self.family
        if fam == "constant":
            return self.a0 + 0.0 * x
        if fam == "affine":
            return self.a0 + self.a1 * x
        if fam == "exponential":
            return self.a0 * np.exp(self.sigma * x)
        return self.a0 * (1.0 + self.eps * np.cos(np.pi * x))

    def deriv(self, x):
        fam = self.family
        if fam == "constant":
            return 0.0 * x
        if fam == "affine":
            return self.a1 + 0.0 * x
        if fam == "exponential":
            return self.a0 * self.sigma * np.exp(self.sigma * x)
        return -self.a0 * self.eps * np.pi * np.sin(np.pi * x)

    def scalar(self) -> Callable[[float], float]:
        """Fast float-only evaluator for the integrator inner loop."""
        a0, a1, sigma, eps = self.a0, self.a1, self.sigma, self.eps
        if self.family == "constant":
            return lambda x: a0
        if self.family == "affine":
            return lambda x: a0 + a1 * x
        if self.family == "exponential":
            return lambda x: a0 * math.exp(sigma * x)
        return lambda x: a0 * (1.0 + eps * math.cos(math.pi * x))

    @property
    def is_constant(self) -> bool:
        if self.family == "constant":
            return True
        if self.family == "affine":
            return self.a1 == 0
        if self.family == "exponential":
            return self.sigma == 0
        return self.eps == 0

    # derived constants ---------------------------------------------------------
    @cached_property
    def _samples(self):
        xs = np.linspace(0.0, 1.0, 2049)
        return xs, np.asarray(self(xs), dtype=float), np.asarray(self.deriv(xs), dtype=float)

    @cached_property
    def min_a(self) -> float:
        return float(self._samples[1].min())

    @cached_property
    def max_a(self) -> float:
        return float(self._samples[1].max())

    @cached_property
    def max_abs_deriv(self) -> float:
        return float(np.abs(self._samples[2]).max())

    @cached_property
    def norm_L1(self) -> float:
        return _quad(lambda x: float(self(x)), 0.0, 1.0)

    @cached_property
    def C_gronwall(self) -> float:
        """max|a'| / min a, the rate in the energy growth estimate."""
        return self.max_abs_deriv / self.min_a

    def _exp_int(self, part):
        g = lambda x: part(float(self.deriv(x))) / float(self(x))
        return math.exp(_quad(g, 0.0, 1.0))

    @cached_property
    def exp_int_aplus(self) -> float:
        """exp of the integral of a'^+ / a over [0, 1]."""
        return self._exp_int(lambda d: max(d, 0.0))

    @cached_property
    def exp_int_aminus(self) -> float:
        """exp of the integral of a'^- / a over [0, 1]."""
        return self._exp_int(lambda d: max(-d, 0.0))

    @cached_property
    def C_a(self) -> float:
        return compute_Ca(self)

    def to_dict(self) -> dict:
        out = {"family": self.family, "a0": self.a0}
        if self.family == "affine":
            out["a1"] = self.a1
        elif self.family == "exponential":
            out["sigma"] = self.sigma
        elif self.family == "cosine":
            out["eps"] = self.eps
        return out


def compute_Ca(a: WeightFunction) -> float:
    """Constant of the (f_ap) condition: the larger of the two branch expressions."""
    a_0, a_1 = float(a(0.0)), float(a(1.0))
    first = a_1 / a_0 * a.exp_int_aminus
    second = a_0 / a_1 * a.exp_int_aplus
    return max(first, second)


@dataclass(frozen=True, eq=False)
class Nonlinearity:
    """f on [0, inf) with positive zero u0 and primitive F(s) = int_{u0}^s f.

    Build with :meth:`prototype` for f(s) = -lam s + s**p or with
    :meth:`from_callables` for a user supplied f.
    """

    u0: float
    f: Callable[[float], float]
    fprime: Callable[[float], float]
    F: Callable[[float], float]
    lam: float | None = None
    p: float | None = None
    name: str = "generic"
    meta: dict = field(default_factory=dict)

    @classmethod
    def prototype(cls, lam: float, p: float, u0: float | None = None) -> "Nonlinearity":
        if not lam > 0:
            raise ValueError("prototype needs lam > 0")
        if not p > 1:
            raise ValueError("prototype needs p > 1")
        if u0 is None:
            u0 = lam ** (1.0 / (p - 1.0))

        def f(s):
            return -lam * s + s**p

        def fprime(s):
            return -lam + p * s ** (p - 1.0)

        def prim(s):
            return -0.5 * lam * s * s + s ** (p + 1.0) / (p + 1.0)

        P0 = prim(u0)

        def F(s):
            return prim(s) - P0

        return cls(u0=float(u0), f=f, fprime=fprime, F=F, lam=float(lam), p=float(p), name="prototype")

    @classmethod
    def from_callables(cls, f, fprime, u0: float, grid_max: float | None = None, grid_size: int = 256):
        """Generic hook; F is tabulated by adaptive quadrature on a grid and completed locally."""
        u0 = float(u0)
        grid_max = 4.0 * u0 if grid_max is None else float(grid_max)
        nodes = np.linspace(0.0, grid_max, grid_size + 1)
        # cumulative integral from u0 to each node
        k0 = int(np.searchsorted(nodes, u0))
        vals = np.empty_like(nodes)
        vals[k0] = _quad(f, u0, nodes[k0])
        for k in range(k0 + 1, len(nodes)):
            vals[k] = vals[k - 1] + _quad(f, nodes[k - 1], nodes[k])
        for k in range(k0 - 1, -1, -1):
            vals[k] = vals[k + 1] - _quad(f, nodes[k], nodes[k + 1])

        def F(s):
            s = float(s)
            k = int(np.clip(np.searchsorted(nodes, s) - 1, 0, len(nodes) - 1))
            return float(vals[k] + _quad(f, nodes[k], s))

        return cls(u0=u0, f=f, fprime=fprime, F=F, name="generic")

    def f_hat(self, s: float) -> float:
        """Continuous extension of f by zero to the negative half-line."""
        return 0.0 if s < 0 else self.f(s)

    def F_hat(self, s: float) -> float:
        """Primitive of f_hat vanishing at u0; constant equal to F(0) for s < 0."""
        return self.F(0.0) if s < 0 else self.F(s)

    @property
    def fprime_u0(self) -> float:
        return self.fprime(self.u0)

    def to_dict(self) -> dict:
        if self.name == "prototype":
            return {"kind": "prototype", "lam": self.lam, "p": self.p, "u0": self.u0}
        return {"kind": self.name, "u0": self.u0}


@dataclass(frozen=True, eq=False)
class Problem:
    """A weight together with a nonlinearity."""

    weight: WeightFunction
    nl: Nonlinearity

    @cached_property
    def ubar(self) -> float | None:
        try:
            return compute_ubar(self.nl, self.weight)
        except NotSatisfied:
            return None


# --------------------------------------------------------------------------- checks
def _safe_eval(fun, s):
    try:
        val = float(fun(s))
    except (ArithmeticError, ValueError, TypeError) as exc:
        raise DomainError(f"evaluation failed at s={s!r}: {exc}") from exc
    if not math.isfinite(val):
        raise DomainError(f"non-finite value at s={s!r}")
    return val


def structural_grid(u0: float, grid_size: int) -> np.ndarray:
    """Uniform grid on [0, 2 u0] plus a dyadic refinement toward 0 and u0."""
    base = np.linspace(0.0, 2.0 * u0, grid_size + 1)
    m = np.arange(1, 31)
    refine = np.concatenate([u0 * 2.0**-m, u0 * (1 - 2.0**-m), u0 * (1 + 2.0**-m)])
    return np.unique(np.concatenate([base, refine]))


def check_structural(nl: Nonlinearity, grid_size: int = 1024, eq_tol: float = 1e-12) -> dict:
    """Grid verification of (f_eq), (f_sgn) and the monotonicity of F."""
    if grid_size < 16:
        raise ValueError("grid_size must be at least 16")
    u0 = nl.u0
    grid = structural_grid(u0, grid_size)
    fv = np.array([_safe_eval(nl.f, s) for s in grid])

    f_eq_ok = abs(_safe_eval(nl.f, 0.0)) <= eq_tol and abs(_safe_eval(nl.f, u0)) <= eq_tol
    below = (grid > 0) & (grid < u0)
    above = grid > u0
    f_sgn_ok = bool(np.all(fv[below] < 0) and np.all(fv[above] > 0))

    base = np.linspace(0.0, 2.0 * u0, grid_size + 1)
    Fv = np.array([_safe_eval(nl.F, s) for s in base])
    left = Fv[base <= u0]
    right = Fv[base >= u0]
    F_monotone_ok = bool(np.all(np.diff(left) < 0) and np.all(np.diff(right) > 0))
    return {"f_eq_ok": bool(f_eq_ok), "f_sgn_ok": f_sgn_ok, "F_monotone_ok": F_monotone_ok}


def compute_ubar(nl: Nonlinearity, a: WeightFunction, cap_factor: float = UBAR_CAP_FACTOR) -> float:
    """Root u > u0 of F(u) = C_a F(0), by geometric bracketing and Brent refinement."""
    u0 = nl.u0
    target = a.C_a * nl.F(0.0)
    cap = cap_factor * u0

    def g(s):
        val = nl.F(s)
        return (math.inf if not math.isfinite(val) else val) - target

    hi = 2.0 * u0
    while g(hi) < 0:
        if hi >= cap:
            raise NotSatisfied(f"F stays below C_a*F(0)={target:.6g} up to s_max={cap:.6g}")
        hi = min(2.0 * hi, cap)
    lo = u0
    if math.isinf(nl.F(hi)):
        # shrink until finite so that brentq sees a finite sign change
        while math.isinf(nl.F(hi)):
            hi = 0.5 * (lo + hi)
    root = optimize.brentq(g, lo, hi, xtol=4 * np.finfo(float).eps * u0, rtol=4 * np.finfo(float).eps, maxiter=500)
    if not root > u0:
        raise NotSatisfied("degenerate root at u0")
    return float(root)


def check_fap_prime(nl: Nonlinearity, a: WeightFunction, grid_size: int = 1024) -> dict:
    """Value of ||a||_1 * max f^- on [0, u0] and whether it is below one."""
    u0 = nl.u0
    neg = lambda s: max(-nl.f(s), 0.0)
    grid = np.linspace(0.0, u0, grid_size + 1)
    vals = np.array([neg(s) for s in grid])
    i = int(np.argmax(vals))
    best = float(vals[i])
    if best > 0:
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid_size)]
        res = optimize.minimize_scalar(lambda s: -neg(s), bounds=(lo, hi), method="bounded",
                                       options={"xatol": 1e-13 * max(u0, 1.0)})
        best = max(best, -float(res.fun))
    value = a.norm_L1 * best
    return {"holds": bool(value < 1.0), "value": float(value)}


def f_hat(nl: Nonlinearity, s: float) -> float:
    return nl.f_hat(s)


def F_hat(nl: Nonlinearity, s: float) -> float:
    return nl.F_hat(s)
