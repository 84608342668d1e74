import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcshoot import DomainError, EmptyLevel, NotClosed, hamiltonian, level_set, orbit_period, phase_portrait
from mcshoot.phase import (homoclinic_condition, linear_period, prototype_homoclinic_value, stated_center_period,
                           write_polylines)


def test_hamiltonian_values(cubic):
    assert hamiltonian(1.0, cubic, 1.0, 0.0) == 0.0
    assert hamiltonian(1.0, cubic, 1.0, 1.0) == 1.0
    assert hamiltonian(1.0, cubic, 0.0, 0.0) == pytest.approx(0.25, abs=1e-15)
    with pytest.raises(DomainError):
        hamiltonian(1.0, cubic, 1.0, 1.01)


def test_homoclinic(cubic):
    assert homoclinic_condition(1.0, cubic) == (pytest.approx(0.25), True)
    value, holds = homoclinic_condition(4.0, cubic)
    assert value == pytest.approx(1.0, abs=1e-15) and not holds


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 5), st.floats(0.2, 4), st.floats(1.5, 12))
def test_homoclinic_closed_form(a, lam, p):
    from mcshoot import Nonlinearity

    nl = Nonlinearity.prototype(lam, p)
    assert homoclinic_condition(a, nl)[0] == pytest.approx(prototype_homoclinic_value(a, lam, p), rel=1e-10)


def test_level_sets(cubic):
    ls0 = level_set(1.0, cubic, 0.0)
    assert len(ls0.curves) == 1 and np.array_equal(ls0.curves[0], [[1.0, 0.0]])
    ls = level_set(1.0, cubic, 0.1)
    assert len(ls.curves) == 1 and ls.closed == [True]
    c = ls.curves[0]
    assert np.allclose(c[0], c[-1], atol=1e-8)
    H = hamiltonian(1.0, cubic, c[:, 0], np.clip(c[:, 1], -1, 1))
    assert np.max(np.abs(H - 0.1)) <= 1e-10
    # symmetric under v -> -v
    up = c[c[:, 1] > 0]
    assert np.allclose(np.sort(up[:, 0]), np.sort(c[c[:, 1] < 0][:, 0]))
    broken = level_set(5.0, cubic, 1.05)
    assert broken.disconnected
    with pytest.raises(EmptyLevel):
        level_set(1.0, cubic, -0.1)


def test_portrait(cubic, tmp_path):
    pp = phase_portrait(5.0, cubic, [0.1, 0.5, 1.05])
    assert pp.homoclinic_value == pytest.approx(1.25) and not pp.homoclinic_exists
    assert pp.breakdown_levels == [1.05]
    for curves in pp.curves:
        for c in curves:
            assert np.all(np.abs(c[:, 1]) <= 1)
    write_polylines(tmp_path / "l.txt", pp.curves[2])
    blocks = (tmp_path / "l.txt").read_text().split("\n\n")
    assert len(blocks) == len(pp.curves[2])


def test_center_period(cubic):
    T3 = orbit_period(1.0, cubic, 1e-3)
    assert abs(T3 / (2 * math.pi / math.sqrt(2)) - 1) <= 1e-3
    T4 = orbit_period(1.0, cubic, 1e-4)
    assert abs(T3 / T4 - 1) <= 1e-4
    assert linear_period(1.0, cubic) == stated_center_period(cubic)
    # for a != 1 the linearization carries the weight
    assert linear_period(4.0, cubic) == pytest.approx(stated_center_period(cubic) / 2)
    assert orbit_period(4.0, cubic, 1e-3) == pytest.approx(linear_period(4.0, cubic), rel=1e-3)


def test_period_not_closed(cubic):
    # H(u0 - 1, 0) = F(0) = aF(0): the homoclinic level, not a closed orbit
    with pytest.raises(NotClosed):
        orbit_period(1.0, cubic, -1.0)
    with pytest.raises(NotClosed):
        orbit_period(1.0, cubic, 0.6)


def test_half_period_of_shooting_solution(approx_n8, classical_problem):
    below = approx_n8[0]
    T = orbit_period(1.0, classical_problem.nl, below.d - below.u0)
    assert abs(T / 2 - 1 / below.j) <= 5e-3
