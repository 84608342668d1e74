import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import eigh_tridiagonal

from mcshoot import WeightFunction, eigenvalue, prufer_terminal_angle, spectrum


def fd_neumann_eigenvalues(a: WeightFunction, nodes: int, count: int) -> np.ndarray:
    """Second-order oracle: linear elements with lumped, weighted mass on a uniform grid.

    K u = lam M u with K the Neumann stiffness matrix and M = diag(a(x_i) w_i),
    symmetrized as M^{-1/2} K M^{-1/2} (still tridiagonal).
    """
    x = np.linspace(0, 1, nodes)
    h = x[1] - x[0]
    w = np.full(nodes, h)
    w[0] = w[-1] = h / 2
    m = a(x) * w
    diag = np.full(nodes, 2 / h)
    diag[0] = diag[-1] = 1 / h
    off = np.full(nodes - 1, -1 / h)
    s = 1 / np.sqrt(m)
    return eigh_tridiagonal(diag * s * s, off * s[:-1] * s[1:], select="i", select_range=(0, count - 1))[0]


def test_terminal_angle_examples(unit):
    assert prufer_terminal_angle(unit, 0.0) == 0.0
    assert prufer_terminal_angle(WeightFunction.affine(1, 1), 0.0) == 0.0
    assert prufer_terminal_angle(unit, math.pi**2) == pytest.approx(math.pi, abs=1e-9)
    assert prufer_terminal_angle(unit, 4 * math.pi**2) == pytest.approx(2 * math.pi, abs=1e-9)


@pytest.mark.parametrize("a", [WeightFunction.affine(1, 1), WeightFunction.cosine(2, 0.5),
                               WeightFunction.exponential(1, -2)])
@pytest.mark.parametrize("lam", [0.5, 7.0, 60.0])
def test_scaled_and_direct_forms_agree(a, lam):
    s = prufer_terminal_angle(a, lam, method="scaled")
    d = prufer_terminal_angle(a, lam, method="direct")
    assert s == pytest.approx(d, abs=1e-9)


def test_unit_spectrum(unit):
    res = spectrum(unit, 6)
    assert res[0].lambda_k == 0.0
    for r in res[1:]:
        exact = ((r.k - 1) * math.pi) ** 2
        assert abs(r.lambda_k - exact) / exact <= 1e-8
        assert abs(r.prufer_terminal - (r.k - 1) * math.pi) <= 1e-9
    assert all(b.lambda_k > a.lambda_k for a, b in zip(res, res[1:]))
    assert eigenvalue(unit, 4).lambda_k == pytest.approx(88.8264, abs=1e-4)


def test_affine_against_fd_oracle():
    a = WeightFunction.affine(1, 1)
    fd = fd_neumann_eigenvalues(a, 10_001, 4)
    # the zero eigenvalue is resolved only up to eps * ||K|| ~ 2e-16 * 4 / h^2
    assert abs(fd[0]) < 10 * np.finfo(float).eps * 4 * (10_000**2)
    for k in (2, 3, 4):
        lam = eigenvalue(a, k).lambda_k
        assert abs(lam - fd[k - 1]) / fd[k - 1] <= 1e-5


@pytest.mark.parametrize("c", [0.5, 2.0])
@pytest.mark.parametrize("base", [WeightFunction.affine(1, 1), WeightFunction.cosine(1, 0.3)])
def test_scaling_law(c, base):
    scaled = WeightFunction(base.family, a0=c * base.a0, a1=c * base.a1, sigma=base.sigma, eps=base.eps)
    for k in (2, 3):
        assert eigenvalue(scaled, k).lambda_k == pytest.approx(eigenvalue(base, k).lambda_k / c, rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 200.0), st.floats(1e-3, 50.0), st.sampled_from(["unit", "affine", "cosine"]))
def test_comparison_monotonicity(lam, gap, fam):
    a = {"unit": WeightFunction.constant(1.0), "affine": WeightFunction.affine(1, 1),
         "cosine": WeightFunction.cosine(1, 0.5)}[fam]
    assert prufer_terminal_angle(a, lam) < prufer_terminal_angle(a, lam + gap)


def test_invalid_inputs(unit):
    with pytest.raises(ValueError):
        eigenvalue(unit, 0)
    with pytest.raises(ValueError):
        prufer_terminal_angle(unit, -1.0)
    with pytest.raises(ValueError):
        prufer_terminal_angle(unit, 1.0, method="other")
