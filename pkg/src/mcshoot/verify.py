"""Invariant suite behind ``mcshoot verify``: quick checks across all solver modules."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .eigen import eigenvalue, prufer_terminal_angle
from .integrator import flux_identity_residual, integrate_cauchy
from .limit import classical_criteria
from .phase import level_set, linear_period, orbit_period
from .problem import Nonlinearity, Problem, WeightFunction, compute_Ca, compute_ubar
from .regularization import RegularizedOperator
from .shooting import solve_approx


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


def _eigen():
    a = WeightFunction.constant(1.0)
    err = max(abs(eigenvalue(a, k).lambda_k - ((k - 1) * math.pi) ** 2) / max(1.0, ((k - 1) * math.pi) ** 2)
              for k in range(1, 7))
    return err <= 1e-8, f"max relative error {err:.3e}"


def _regularization():
    s = np.linspace(-50, 50, 10001)
    w = np.linspace(-0.999, 0.999, 2001)
    worst = 0.0
    for n in range(1, 17):
        op = RegularizedOperator(n)
        # phi_n o phi_n^{-1} = id on (-1, 1) and Phi_n(s) <= s phi_n(s)
        worst = max(worst, float(np.max(np.abs(op.phi(op.phi_inv(w)) - w))),
                    float(np.max(op.Phi(s) - op.phi(s) * s)))
    return worst <= 1e-12, f"worst identity/inequality defect {worst:.3e}"


def _shooting():
    pb = Problem(WeightFunction.constant(1.0), Nonlinearity.prototype(1.5, 11))
    sols = solve_approx(RegularizedOperator(8), pb, 1)
    ok = len(sols) == 2 and all(len(s.zeros) == 1 and s.boundary_residual <= 1e-8 for s in sols)
    flux = max(flux_identity_residual(s.trajectory, pb) for s in sols)
    return ok and flux <= 1e-8, f"{len(sols)} solutions, flux identity {flux:.3e}"


def _energy():
    pb = Problem(WeightFunction.constant(1.0), Nonlinearity.prototype(1.5, 11))
    t = integrate_cauchy(RegularizedOperator(8), pb, 0.7)
    drift = float(np.ptp(t.energy))
    pb2 = Problem(WeightFunction.affine(1.0, 1.0), Nonlinearity.prototype(1.5, 11))
    t2 = integrate_cauchy(RegularizedOperator(8), pb2, 0.7)
    e = t2.energy
    gron = bool(np.all(e <= math.exp(pb2.weight.C_gronwall) * e[0] * (1 + 1e-6)))
    return drift <= 1e-8 and gron, f"autonomous drift {drift:.3e}, Gronwall bound {'ok' if gron else 'violated'}"


def _prufer():
    a = WeightFunction.affine(1.0, 1.0)
    lams = np.linspace(0.5, 60, 40)
    th = [prufer_terminal_angle(a, lam) for lam in lams]
    ok = all(b > c for c, b in zip(th, th[1:]))
    return ok, "terminal angle strictly increasing in lambda" if ok else "monotonicity violated"


def _period():
    nl = Nonlinearity.prototype(1.0, 3)
    T = orbit_period(1.0, nl, 1e-3)
    rel = abs(T / linear_period(1.0, nl) - 1)
    return rel <= 1e-3, f"relative deviation {rel:.3e}"


def _level_sets():
    nl = Nonlinearity.prototype(1.0, 3)
    ls = level_set(1.0, nl, 0.1)
    c = ls.curves[0]
    v = np.clip(c[:, 1], -1, 1)
    H = 1 - np.sqrt(1 - v * v) + np.array([nl.F_hat(u) for u in c[:, 0]])
    dev = float(np.max(np.abs(H - 0.1)))
    return dev <= 1e-10 and ls.closed == [True], f"max |H - h| {dev:.3e}"


def _criteria():
    nl = Nonlinearity.prototype(1.0, 3)
    ca = compute_Ca(WeightFunction.affine(1.0, 1.0))
    ub = compute_ubar(nl, WeightFunction.constant(1.0))
    rep = classical_criteria(Problem(WeightFunction.constant(1.0), nl))
    ok = abs(ca - 2) <= 1e-10 and abs(ub - math.sqrt(2)) <= 1e-10 and abs(rep.eta - 0.75) <= 1e-12
    return ok, f"C_a={ca:.12g}, ubar={ub:.12g}, eta={rep.eta:.12g}"


SUITE = [
    ("eigenvalues a=1", _eigen),
    ("regularized flux identities", _regularization),
    ("multiplicity k=1 n=8", _shooting),
    ("energy laws", _energy),
    ("Pruefer monotonicity", _prufer),
    ("center period", _period),
    ("level sets", _level_sets),
    ("criteria formulas", _criteria),
]


def run_suite() -> list[Check]:
    out = []
    for name, fn in SUITE:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashing check is a failing check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(Check(name, bool(ok), detail))
    return out
