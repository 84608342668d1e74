import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcshoot import (DomainError, Nonlinearity, NotSatisfied, WeightFunction, check_fap_prime, check_structural,
                     compute_Ca, compute_ubar)
from mcshoot.problem import F_hat, f_hat


# ---------------------------------------------------------------- weights
@pytest.mark.parametrize("a, expected", [
    (WeightFunction.constant(1.0), 1.0),
    (WeightFunction.affine(1.0, 1.0), 2.0),
    (WeightFunction.exponential(1.0, 1.0), math.e),
])
def test_compute_Ca_examples(a, expected):
    assert compute_Ca(a) == pytest.approx(expected, rel=1e-10)


def test_Ca_exponential_matches_branch_quadrature():
    from scipy.integrate import quad

    a = WeightFunction.exponential(1.0, 1.0)
    # a'/a = 1, so the two branch expressions are e * e^0 and e^-1 * e^1
    plus = quad(lambda x: max(float(a.deriv(x)), 0.0) / float(a(x)), 0, 1)[0]
    minus = quad(lambda x: max(-float(a.deriv(x)), 0.0) / float(a(x)), 0, 1)[0]
    expected = max(float(a(1)) / float(a(0)) * math.exp(minus), float(a(0)) / float(a(1)) * math.exp(plus))
    assert compute_Ca(a) == pytest.approx(expected, rel=1e-10)


def _nonzero(lo, hi, floor=1e-3):
    # perturbations below ~1e-16 relative are indistinguishable from a constant in floating point
    return st.floats(lo, hi).filter(lambda t: abs(t) >= floor)


weights = st.one_of(
    st.builds(WeightFunction.constant, st.floats(0.1, 10)),
    st.builds(WeightFunction.affine, st.floats(0.5, 5), _nonzero(-0.45, 5)),
    st.builds(WeightFunction.exponential, st.floats(0.1, 5), _nonzero(-3, 3)),
    st.builds(WeightFunction.cosine, st.floats(0.1, 5), _nonzero(-0.9, 0.9)),
)


@settings(max_examples=60, deadline=None)
@given(weights)
def test_weight_invariants(a):
    xs = np.linspace(0, 1, 201)
    assert np.all(a(xs) > 0)
    assert a.C_a >= 1 - 1e-12
    assert a.min_a - 1e-12 <= a.norm_L1 <= a.max_a + 1e-12
    if a.is_constant:
        assert a.C_a == pytest.approx(1.0, abs=1e-12)
    else:
        assert a.C_a > 1
    if a.family in ("affine", "exponential"):
        assert a.C_a == pytest.approx(a.max_a / a.min_a, rel=1e-9)


def test_weight_rejects_nonpositive():
    with pytest.raises(ValueError):
        WeightFunction.affine(1.0, -2.0)
    with pytest.raises(ValueError):
        WeightFunction.cosine(1.0, 1.0)


# ---------------------------------------------------------------- nonlinearity
def test_hat_extensions(cubic):
    assert f_hat(cubic, -1.0) == 0.0
    assert F_hat(cubic, cubic.u0) == 0.0
    assert F_hat(cubic, -2.0) == pytest.approx(0.25, abs=1e-15)
    assert cubic.F(0.0) == pytest.approx(0.25, abs=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.2, 5), st.floats(1.2, 12))
def test_prototype_identities(lam, p):
    nl = Nonlinearity.prototype(lam, p)
    assert nl.u0 == pytest.approx(lam ** (1 / (p - 1)), rel=1e-14)
    assert nl.fprime_u0 == pytest.approx((p - 1) * lam, rel=1e-12)
    s = np.linspace(-1, 3 * nl.u0, 301)
    Fs = np.array([nl.F_hat(x) for x in s])
    away = np.abs(s - nl.u0) > 1e-3 * nl.u0
    assert np.all(Fs[away] > 0)
    assert nl.F_hat(nl.u0) == 0.0


def test_structural_flags(cubic):
    rep = check_structural(cubic, 1024)
    assert rep == {"f_eq_ok": True, "f_sgn_ok": True, "F_monotone_ok": True}
    zero = Nonlinearity.from_callables(lambda s: 0.0, lambda s: 0.0, 1.0)
    assert check_structural(zero, 64)["f_sgn_ok"] is False
    shifted = Nonlinearity.prototype(1.0, 3, u0=0.5)
    assert check_structural(shifted, 64)["f_eq_ok"] is False


def test_structural_domain_error():
    nan_below = lambda s: float("nan") if s < 0.5 else s - 1.0
    bad = Nonlinearity(u0=1.0, f=nan_below, fprime=lambda s: 1.0, F=lambda s: 0.5 * (s - 1.0) ** 2)
    with pytest.raises(DomainError):
        check_structural(bad, 32)


def test_generic_hook_matches_closed_form(cubic):
    gen = Nonlinearity.from_callables(cubic.f, cubic.fprime, 1.0)
    for s in (0.0, 0.3, 1.0, 1.7, 3.5):
        assert gen.F(s) == pytest.approx((s * s - 1) ** 2 / 4, abs=1e-12)


def test_ubar_examples(cubic):
    ub = compute_ubar(cubic, WeightFunction.constant(1.0))
    assert ub == pytest.approx(math.sqrt(2), abs=1e-10)
    ub2 = compute_ubar(cubic, WeightFunction.affine(1.0, 1.0))
    assert ub2 == pytest.approx(math.sqrt(1 + math.sqrt(2)), abs=1e-10)
    assert abs(cubic.F(ub2) - 2 * cubic.F(0.0)) <= 1e-10


def test_ubar_not_satisfied():
    # F(0) = 1 - 2/e ~ 0.26 while F(inf) = int_1^inf (s - 1) e^{-s^2} ds ~ 0.05, so F never reaches F(0)
    f = lambda s: -s * math.exp(-s) if s < 1 else (s - 1) * math.exp(-s * s)
    nl = Nonlinearity.from_callables(f, lambda s: 0.0, 1.0, grid_max=12.0, grid_size=64)
    with pytest.raises(NotSatisfied):
        compute_ubar(nl, WeightFunction.constant(1.0), cap_factor=10.0)


@pytest.mark.parametrize("a0, value, holds", [(1.0, 2 / (3 * math.sqrt(3)), True),
                                              (3.0, 2 / math.sqrt(3), False)])
def test_fap_prime(cubic, a0, value, holds):
    rep = check_fap_prime(cubic, WeightFunction.constant(a0))
    assert rep["value"] == pytest.approx(value, rel=1e-9)
    assert rep["holds"] is holds


def test_fap_prime_zero():
    zero = Nonlinearity.from_callables(lambda s: 0.0, lambda s: 0.0, 1.0, grid_size=8)
    rep = check_fap_prime(zero, WeightFunction.constant(1.0))
    assert rep["value"] == 0.0 and rep["holds"]
