"""Neumann eigenvalues of -u'' = lam a(x) u on (0, 1) through the Pruefer angle."""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import integrate, optimize

from .errors import BracketFailure
from .integrator import dopri5
from .problem import WeightFunction

PRUFER_TOL = 1e-12


@dataclass(frozen=True)
class EigenResult:
    k: int
    lambda_k: float
    prufer_terminal: float
    bisection_width: float


def prufer_terminal_angle(a: WeightFunction, lam: float, tol: float = PRUFER_TOL,
                          method: str = "scaled") -> float:
    """theta(1) for theta' = sin^2 theta + lam a(x) cos^2 theta, theta(0) = 0.

    ``method="direct"`` integrates that equation as written. The default
    ``"scaled"`` integrates the equivalent angle psi with tan theta =
    sqrt(lam a) tan psi, whose rate sqrt(lam a) - (a'/2a) sin psi cos psi has
    no fast oscillation, and maps psi(1) back onto the same branch.
    """
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    if lam == 0:
        return 0.0
    aw = a.scalar()
    if method == "direct":
        def rhs(x, y):
            s, c = math.sin(y[0]), math.cos(y[0])
            return (s * s + lam * aw(x) * c * c,)

        # several steps per quarter turn
        hmax = min(0.05, 0.2 / max(1.0, lam * a.max_a) ** 0.5)
        return dopri5(rhs, 0.0, (0.0,), 1.0, tol, hmax=hmax).y[-1][0]
    if method != "scaled":
        raise ValueError(f"unknown method {method!r}")

    deriv = a.deriv
    sq = math.sqrt(lam)

    def rhs(x, y):
        ax = aw(x)
        return (sq * math.sqrt(ax) - 0.5 * float(deriv(x)) / ax * math.sin(y[0]) * math.cos(y[0]),)

    psi1 = dopri5(rhs, 0.0, (0.0,), 1.0, tol, hmax=0.1).y[-1][0]
    m = round(psi1 / math.pi)
    return m * math.pi + math.atan(sq * math.sqrt(aw(1.0)) * math.tan(psi1 - m * math.pi))


def eigenvalue(a: WeightFunction, k: int, tol: float = PRUFER_TOL) -> EigenResult:
    """k-th Neumann eigenvalue (k = 1 gives 0) by bracketed root finding on the terminal angle."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k == 1:
        return EigenResult(1, 0.0, 0.0, 0.0)
    target = (k - 1) * math.pi
    g = lambda lam: prufer_terminal_angle(a, lam, tol) - target

    # asymptotic guess ((k-1) pi / int sqrt(a))^2 seeds a narrow bracket
    root_mass = integrate.quad(lambda x: math.sqrt(float(a(x))), 0.0, 1.0, epsrel=1e-10)[0]
    guess = (target / root_mass) ** 2
    lo, hi = 0.5 * guess, 2.0 * guess
    cap = 4.0 * target**2 / a.min_a * 2.0**60
    while g(lo) > 0:
        lo *= 0.25
        if lo < 1e-300:
            lo = 0.0
            break
    while g(hi) <= 0:
        hi *= 2.0
        if hi > cap:
            raise BracketFailure(f"terminal angle never exceeded {target} (k={k})")
    xtol = 1e-12
    rtol = 1e-11
    lam = optimize.brentq(g, lo, hi, xtol=xtol, rtol=rtol, maxiter=200)
    w = max(xtol, 1e-10 * lam)
    glo, ghi = g(lam - w), g(lam + w)
    if not (glo < 0 < ghi):
        raise BracketFailure(f"terminal angle not monotone-crossing near lambda={lam} (k={k})")
    return EigenResult(k, float(lam), prufer_terminal_angle(a, lam, tol), 2 * w)


def spectrum(a: WeightFunction, kmax: int, tol: float = PRUFER_TOL) -> list[EigenResult]:
    return [eigenvalue(a, k, tol) for k in range(1, kmax + 1)]
