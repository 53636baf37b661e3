import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pkdvlab.grids import quadrature
from pkdvlab.potentials import PotentialSpec
from pkdvlab.solitons import (
    SolitonParams,
    dxinv_eta_a,
    dxinv_eta_c,
    eta,
    eta_jet,
    f_perp_leading,
    sample_eta_jet,
    sample_soliton,
    tau,
    theta,
)

Y = np.linspace(-25.0, 25.0, 2001)


def test_theta_at_zero():
    assert theta(0.0) == pytest.approx(2.0, abs=1e-15)


def test_theta_profile_ode_residual():
    resid = theta(Y, 2) + 3.0 * theta(Y) ** 2 - 4.0 * theta(Y)
    assert np.max(np.abs(resid)) < 1e-12


def test_theta_parity():
    assert np.allclose(theta(Y), theta(-Y), atol=1e-15)
    assert np.allclose(theta(Y, 1), -theta(-Y, 1), atol=1e-15)
    assert np.allclose(theta(Y, 2), theta(-Y, 2), atol=1e-15)


def test_theta_derivatives_match_finite_differences():
    h = 1e-6
    y = np.linspace(-5, 5, 101)
    fd1 = (theta(y + h) - theta(y - h)) / (2 * h)
    fd2 = (theta(y + h) - 2 * theta(y) + theta(y - h)) / h**2
    assert np.max(np.abs(fd1 - theta(y, 1))) < 1e-8
    assert np.max(np.abs(fd2 - theta(y, 2))) < 1e-3


def test_theta_rejects_higher_orders():
    with pytest.raises(ValueError):
        theta(0.0, 3)


def test_profile_integrals_against_symbolic_oracle(wide_grid):
    sympy = pytest.importorskip("sympy")
    y = sympy.symbols("y", real=True)
    th = 2 * sympy.sech(y) ** 2
    def ii(expr):
        return sympy.simplify(sympy.integrate(expr.rewrite(sympy.exp), (y, -sympy.oo, sympy.oo)))

    assert ii(th**2) == sympy.Rational(16, 3)
    assert ii(sympy.diff(th, y) ** 2) == sympy.Rational(64, 15)
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 30
    yth2 = mp.quad(lambda t: (t * 2 * mp.sech(t) ** 2) ** 2, [-mp.inf, 0, mp.inf])
    assert abs(yth2 - mp.mpf(4) / 9 * (mp.pi**2 - 6)) < mp.mpf("1e-25")

    g = wide_grid
    assert quadrature(g, theta(g.x) ** 2) == pytest.approx(16.0 / 3.0, abs=1e-12)
    assert quadrature(g, theta(g.x, 1) ** 2) == pytest.approx(64.0 / 15.0, abs=1e-12)
    assert quadrature(g, (g.x * theta(g.x)) ** 2) == pytest.approx(
        (4.0 / 9.0) * (np.pi**2 - 6.0), abs=1e-10
    )


def test_tau_basics():
    assert tau(0.0) == 0.0
    assert np.max(np.abs(tau(Y) + tau(-Y))) < 1e-15
    assert np.max(np.abs(tau(Y))) <= 2.0
    # derivative of tau is theta
    h = 1e-6
    fd = (tau(Y + h) - tau(Y - h)) / (2 * h)
    assert np.max(np.abs(fd - theta(Y))) < 1e-8


def test_soliton_params_validation():
    with pytest.raises(ValueError):
        SolitonParams(0.0, 0.0)
    with pytest.raises(ValueError):
        SolitonParams(0.0, -1.0)
    with pytest.raises(ValueError):
        SolitonParams(np.nan, 1.0)


def test_eta_peak_value():
    p = SolitonParams(1.7, 1.3)
    assert eta(p.a, p) == pytest.approx(2.0 * p.c**2, abs=1e-14)


@settings(max_examples=50, deadline=None)
@given(
    x=st.floats(-10, 10),
    a=st.floats(-5, 5),
    c=st.floats(0.2, 4.0),
)
def test_eta_scaling_covariance(x, a, c):
    base = SolitonParams(0.0, 1.0)
    assert eta(x, SolitonParams(a, c)) == pytest.approx(
        c**2 * eta(c * (x - a), base), rel=1e-12, abs=1e-300
    )


def test_eta_jet_consistency():
    p = SolitonParams(0.8, 1.4)
    x = np.linspace(-6, 8, 301)
    jet = eta_jet(x, p)
    # d_a = -d_x identically
    assert np.allclose(jet.d_a, -jet.d_x, atol=1e-14)
    # parameter derivatives against central differences
    h = 1e-6
    fd_a = (eta(x, SolitonParams(p.a + h, p.c)) - eta(x, SolitonParams(p.a - h, p.c))) / (2 * h)
    fd_c = (eta(x, SolitonParams(p.a, p.c + h)) - eta(x, SolitonParams(p.a, p.c - h))) / (2 * h)
    assert np.max(np.abs(fd_a - jet.d_a)) < 1e-7
    assert np.max(np.abs(fd_c - jet.d_c)) < 1e-7


def test_manifold_pairings_by_quadrature(wide_grid):
    g = wide_grid
    for a, c in [(0.0, 1.0), (2.5, 0.7), (-4.0, 1.9)]:
        p = SolitonParams(a, c)
        jet = sample_eta_jet(g, p)
        d = g.wrap(g.x, a)
        assert quadrature(g, jet.eta**2) == pytest.approx((16.0 / 3.0) * c**3, abs=1e-8)
        assert quadrature(g, jet.d_a * d * jet.eta) == pytest.approx((8.0 / 3.0) * c**3, abs=1e-10)
        assert quadrature(g, jet.d_c * dxinv_eta_a(g.x, p)) == pytest.approx(-8.0 * c**2, abs=1e-8)
        # <theta + 2y theta', y theta> = 0 in scaled form
        fp_profile = theta(c * d) + 2.0 * c * d * theta(c * d, 1)
        assert abs(quadrature(g, fp_profile * c * d * theta(c * d))) < 1e-10


def test_dxinv_eta_c_is_antiderivative():
    p = SolitonParams(-1.2, 0.9)
    x = np.linspace(-10, 10, 801)
    h = 1e-6
    fd = (dxinv_eta_c(x + h, p) - dxinv_eta_c(x - h, p)) / (2 * h)
    jet = eta_jet(x, p)
    assert np.max(np.abs(fd - jet.d_c)) < 1e-7


def test_f_perp_leading_constant_potential_vanishes(wide_grid):
    b = PotentialSpec("constant", amplitude=3.0)
    vals = f_perp_leading(wide_grid.x, SolitonParams(1.0, 1.2), b)
    assert np.max(np.abs(vals)) == 0.0


def test_f_perp_leading_pairings_vanish(wide_grid):
    g = wide_grid
    p = SolitonParams(2.0, 1.1)
    b = PotentialSpec("sinusoidal", amplitude=8.0, h=0.2)
    fp = f_perp_leading(g.x, p, b)
    jet = sample_eta_jet(g, p)
    d = g.wrap(g.x, p.a)
    assert abs(quadrature(g, fp * d * jet.eta)) < 1e-10
    assert abs(quadrature(g, fp * (-jet.eta))) < 1e-10


def test_sample_soliton_periodizes(wide_grid):
    # center near the domain edge: the profile must wrap continuously
    g = wide_grid
    p = SolitonParams(g.origin + 0.3, 1.0)
    fld = sample_soliton(g, p)
    assert fld.values[0] > 1.0
    assert fld.values[-1] > 0.1
