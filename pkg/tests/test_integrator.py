import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate._ivp.rk import RK45

from mcshoot import Nonlinearity, Problem, RegularizedOperator, WeightFunction, integrate_cauchy
from mcshoot.integrator import _A, _C, _E, _P, angle_rate, dopri5, energy_profile, flux_identity_residual


@pytest.fixture(scope="module")
def cubic_problem(unit, cubic):
    return Problem(unit, cubic)


@pytest.fixture(scope="module")
def affine_problem():
    return Problem(WeightFunction.affine(1.0, 1.0), Nonlinearity.prototype(1.5, 11))


def test_tableau_matches_reference():
    assert np.allclose(_C, RK45.C.tolist() + [1.0], atol=1e-16)
    for i, row in enumerate(_A):
        assert np.allclose(row, RK45.A[i, :i] if i < 6 else RK45.B, atol=1e-16)
    # scipy stores the embedded-minus-main difference; only its magnitude enters the error norm
    assert np.allclose(_E, -RK45.E, atol=1e-16)
    assert np.allclose(np.array(_P), RK45.P, atol=1e-15)


def test_dopri5_exponential():
    raw = dopri5(lambda x, y: (y[0],), 0.0, (1.0,), 1.0, 1e-12)
    assert raw.y[-1][0] == pytest.approx(math.e, rel=1e-10)
    # dense output of the last step reproduces the endpoint
    h = raw.x[-1] - raw.x[-2]
    y = raw.y[-2][0] + h * sum(raw.q[-1][0])
    assert y == pytest.approx(raw.y[-1][0], rel=1e-13)


def test_degenerate_start(cubic_problem):
    t = integrate_cauchy(RegularizedOperator(8), cubic_problem, 1.0)
    assert t.degenerate
    assert np.all(t.u == 1.0) and np.all(t.v == 0.0)
    assert np.all(energy_profile(t)[:, 1] == 0.0)
    assert flux_identity_residual(t, cubic_problem) == 0.0


def test_zero_start_is_stationary(cubic_problem):
    t = integrate_cauchy(RegularizedOperator(8), cubic_problem, 0.0)
    assert np.all(t.u == 0.0) and np.all(t.v == 0.0)
    assert t.energy[0] == pytest.approx(cubic_problem.nl.F(0.0), abs=1e-15)
    assert flux_identity_residual(t, cubic_problem) == 0.0


def test_initial_conditions_and_csv(cubic_problem, tmp_path):
    t = integrate_cauchy(RegularizedOperator(8), cubic_problem, 0.5)
    assert t.u[0] == 0.5 and t.v[0] == 0.0 and t.x[0] == 0.0 and t.x[-1] == 1.0
    assert t.theta[0] == math.pi
    assert integrate_cauchy(RegularizedOperator(8), cubic_problem, 1.3).theta[0] == 0.0
    t.to_csv(tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "x,u,v,theta,energy"
    assert len(lines) == len(t.x) + 1
    assert float(lines[1].split(",")[1]) == 0.5


def test_autonomous_energy_conserved(cubic_problem):
    t = integrate_cauchy(RegularizedOperator(8), cubic_problem, 0.5, tol=1e-10)
    assert np.ptp(t.energy) <= 1e-9
    assert np.all(t.energy >= -1e-12)


def test_rotation_self_convergence(cubic_problem):
    op = RegularizedOperator(8)
    # tol = 1e-12 is the floor of the documented range; compare it with twice that
    ref = integrate_cauchy(op, cubic_problem, 0.9, tol=1e-12).theta[-1]
    coarse = integrate_cauchy(op, cubic_problem, 0.9, tol=2e-12).theta[-1]
    assert abs(coarse - ref) < 1e-8
    # f'(u0) = 2 < pi^2: less than one half-turn
    rot = (ref - math.pi) / math.pi
    assert 0 < rot < 1


@pytest.mark.parametrize("d", [0.3, 0.9, 1.1, 1.25])
def test_self_convergence_halving_tol(affine_problem, d):
    op = RegularizedOperator(16)
    a = integrate_cauchy(op, affine_problem, d, tol=1e-10)
    b = integrate_cauchy(op, affine_problem, d, tol=5e-11)
    for f in ("u", "v", "theta"):
        assert abs(getattr(a, f)[-1] - getattr(b, f)[-1]) < 10 * 1e-10 * max(1.0, abs(getattr(b, f)[-1]))


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 1.3), st.sampled_from([2, 8, 64]))
def test_trajectory_invariants(d, n):
    pb = Problem(WeightFunction.affine(1.0, 1.0), Nonlinearity.prototype(1.5, 11))
    if abs(d - pb.nl.u0) < 1e-6:
        return
    t = integrate_cauchy(RegularizedOperator(n), pb, d)
    rho = np.hypot(t.u - pb.nl.u0, t.v)
    assert np.all(rho > 0)
    assert np.all(np.diff(t.theta) > 0)
    assert np.all(np.abs(np.diff(t.theta)) < math.pi)
    assert np.all(t.energy >= -1e-12)
    bound = math.exp(pb.weight.C_gronwall) * t.energy[0] * (1 + 1e-6)
    assert np.all(t.energy <= bound)
    assert flux_identity_residual(t, pb) <= 1e-8


def test_angle_rate_matches_lift(affine_problem):
    op = RegularizedOperator(8)
    t = integrate_cauchy(op, affine_problem, 0.7)
    xs = np.linspace(0.05, 0.95, 19)
    h = 1e-5
    numeric = (t.dense_theta(xs + h) - t.dense_theta(xs - h)) / (2 * h)
    u, v = t.dense_eval(xs)
    assert np.allclose(numeric, angle_rate(op, affine_problem, xs, u, v), rtol=1e-6)


def test_continuous_dependence(affine_problem):
    op = RegularizedOperator(8)
    xs = np.linspace(0, 1, 2001)
    t1 = integrate_cauchy(op, affine_problem, 0.7)
    t2 = integrate_cauchy(op, affine_problem, 0.7 + 1e-6)
    gap = np.max(np.abs(t1.dense_eval(xs)[0] - t2.dense_eval(xs)[0]))
    assert 0 < gap <= 100 * 1e-6


def test_tol_range_enforced(cubic_problem):
    with pytest.raises(ValueError):
        integrate_cauchy(RegularizedOperator(8), cubic_problem, 0.5, tol=1e-3)
    with pytest.raises(ValueError):
        integrate_cauchy(RegularizedOperator(8), cubic_problem, 0.5, tol=1e-13)
