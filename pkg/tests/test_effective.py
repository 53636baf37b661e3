import math

import numpy as np
import pytest

from pkdvlab.effective import (
    ODEState,
    conserved_quantity,
    integrate,
    ode_rhs,
    physical_trajectory,
)
from pkdvlab.potentials import PotentialSpec

SIN8 = PotentialSpec("sinusoidal", amplitude=8.0, h=0.2)


def test_rhs_free_motion():
    dA, dC = ode_rhs(ODEState(0.0, 1.0), PotentialSpec("zero"))
    assert (dA, dC) == (4.0, 0.0)


def test_rhs_sinusoidal_at_quarter_period():
    dA, dC = ode_rhs(ODEState(np.pi / 2, 1.0), SIN8)
    assert dA == pytest.approx(-4.0, abs=1e-12)
    assert dC == pytest.approx(0.0, abs=1e-12)


def test_rhs_constant_potential():
    dA, dC = ode_rhs(ODEState(1.7, 1.3), PotentialSpec("constant", amplitude=2.0))
    assert dA == pytest.approx(4.0 * 1.3**2 - 2.0, abs=1e-14)
    assert dC == 0.0


def test_state_validation():
    with pytest.raises(ValueError):
        ODEState(0.0, -1.0)


def test_free_motion_closed_form():
    tol = 1e-10
    traj = integrate(ODEState(1.0, 1.5), PotentialSpec("zero"), tau_max=2.0, tol=tol)
    expect_A = 1.0 + 4.0 * 1.5**2 * traj.tau
    assert np.max(np.abs(traj.A - expect_A)) < 10 * tol * max(1.0, np.max(np.abs(expect_A)))
    assert np.max(np.abs(traj.C - 1.5)) < 10 * tol
    assert math.isinf(traj.t_star)


def test_conserved_quantity_is_symbolically_invariant():
    sympy = pytest.importorskip("sympy")
    A, C = sympy.symbols("A C", positive=True)
    b = sympy.Function("b")
    G = C**3 * b(A) - sympy.Rational(12, 5) * C**5
    dA = 4 * C**2 - b(A)
    dC = C * sympy.diff(b(A), A) / 3
    dG = sympy.diff(G, A) * dA + sympy.diff(G, C) * dC
    assert sympy.simplify(dG) == 0


def test_conserved_quantity_drift():
    tol = 1e-11
    traj = integrate(ODEState(2.5, 1.0), SIN8, tau_max=1.0, tol=tol, n_samples=801)
    G = conserved_quantity(traj.A, traj.C, SIN8)
    assert np.max(np.abs(G - G[0])) < 10 * tol * max(1.0, abs(G[0]))


def test_paper_trajectory_stays_in_band():
    traj = integrate(ODEState(2.5, 1.0), SIN8, delta=0.25, tau_max=1.0, tol=1e-12)
    assert math.isinf(traj.t_star)
    assert np.all(traj.C >= 0.25) and np.all(traj.C <= 4.0)
    # the soliton initially moves backward (4 - 8 sin 2.5 < 0)
    assert traj.A[-1] < traj.A[0]


def test_band_exit_location():
    delta = 0.28
    traj = integrate(
        ODEState(0.0, 3.5), PotentialSpec("sinusoidal", amplitude=8.0, h=0.2),
        delta=delta, tau_max=5.0, tol=1e-12,
    )
    assert math.isfinite(traj.t_star)
    _, c_exit = traj.evaluate(traj.t_star)
    assert abs(c_exit - 1.0 / delta) < 1e-8
    assert traj.tau[-1] == pytest.approx(traj.t_star)


def test_lower_band_exit():
    # negative bump slope along the path pushes C down to the band floor
    pot = PotentialSpec("bump", amplitude=-20.0, h=0.5, width=4.0)
    traj = integrate(ODEState(-3.5, 0.6), pot, delta=0.5, tau_max=10.0, tol=1e-12)
    assert math.isfinite(traj.t_star)
    _, c_exit = traj.evaluate(traj.t_star)
    assert abs(c_exit - 0.5) < 1e-8


def test_time_reversal():
    tol = 1e-10
    fwd = integrate(ODEState(2.5, 1.0), SIN8, tau_max=1.0, tol=tol)
    end = ODEState(float(fwd.A[-1]), float(fwd.C[-1]), tau=float(fwd.tau[-1]))
    back = integrate(end, SIN8, tau_max=-1.0, tol=tol)
    assert abs(back.A[-1] - 2.5) < 100 * tol
    assert abs(back.C[-1] - 1.0) < 100 * tol


def test_tolerance_ordering():
    ref = integrate(ODEState(2.5, 1.0), SIN8, tau_max=1.0, tol=1e-12)
    target = np.array([ref.A[-1], ref.C[-1]])
    errs = []
    for tol in (1e-5, 1e-6, 1e-7, 1e-8, 1e-9):
        t = integrate(ODEState(2.5, 1.0), SIN8, tau_max=1.0, tol=tol)
        errs.append(np.max(np.abs(np.array([t.A[-1], t.C[-1]]) - target)))
    for e1, e2 in zip(errs, errs[1:]):
        assert e2 <= e1 * 1.05 + 1e-13


def test_physical_trajectory_scalings():
    traj = integrate(ODEState(1.0, 1.0), PotentialSpec("zero", h=0.1), tau_max=1.0, tol=1e-10)
    t, a, c = physical_trajectory(traj, 0.1)
    assert a[0] == pytest.approx(10.0)
    assert np.allclose(a, 10.0 + 4.0 * t, atol=1e-7)
    assert np.allclose(c, 1.0, atol=1e-9)
    assert np.all(np.diff(t) > 0)
    # h = 1 is the identity rescaling
    t1, a1, c1 = physical_trajectory(traj, 1.0)
    assert np.array_equal(t1, traj.tau) and np.array_equal(a1, traj.A)
    with pytest.raises(ValueError):
        physical_trajectory(traj, 1.5)


def test_integrate_validation():
    with pytest.raises(ValueError):
        integrate(ODEState(0.0, 5.0), SIN8, delta=0.25, tau_max=1.0, tol=1e-10)
    with pytest.raises(ValueError):
        integrate(ODEState(0.0, 1.0), SIN8, delta=1.5, tau_max=1.0, tol=1e-10)
    with pytest.raises(ValueError):
        integrate(ODEState(0.0, 1.0), SIN8, tau_max=0.0, tol=1e-10)
    with pytest.raises(ValueError):
        integrate(ODEState(0.0, 1.0), SIN8, tau_max=1.0, tol=0.0)


def test_evaluate_outside_span():
    traj = integrate(ODEState(0.0, 1.0), SIN8, tau_max=1.0, tol=1e-10)
    with pytest.raises(ValueError):
        traj.evaluate(2.0)
