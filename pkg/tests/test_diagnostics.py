import numpy as np
import pytest

from conftest import smooth_noise
from pkdvlab.diagnostics import (
    VirialWeight,
    conservation_residuals,
    energy_functional,
    finite_difference,
    forcing_decomposition,
    h1_norm,
    parameter_residuals,
    partial_x_inverse,
    phi_profile,
    psi_profile,
    symplectic_form,
    virial_quantity,
    weighted_h1,
    DiagnosticsRecord,
)
from pkdvlab.etdrk4 import StepperConfig, simulate
from pkdvlab.grids import FieldState, GridSpec, quadrature, spectral_derivative
from pkdvlab.potentials import PotentialSpec
from pkdvlab.runs import fit_slope
from pkdvlab.solitons import SolitonParams, sample_eta_jet, sample_soliton


# -- norms -------------------------------------------------------------


def test_h1_norm_zero(wide_grid):
    assert h1_norm(FieldState(wide_grid, np.zeros(wide_grid.n))) == 0.0


def test_h1_norm_of_soliton(unit_soliton):
    expect = np.sqrt(16.0 / 3.0 + 64.0 / 15.0)
    assert h1_norm(unit_soliton) == pytest.approx(expect, abs=1e-8)


def test_weighted_h1_below_unweighted(wide_grid):
    for seed in range(5):
        f = FieldState(wide_grid, smooth_noise(wide_grid, seed))
        assert weighted_h1(f, 0.0, 0.5) <= h1_norm(f) + 1e-14
    with pytest.raises(ValueError):
        weighted_h1(FieldState(wide_grid, np.zeros(wide_grid.n)), 0.0, 0.0)


# -- energy ------------------------------------------------------------


def test_energy_zero(wide_grid):
    assert energy_functional(FieldState(wide_grid, np.zeros(wide_grid.n)), SolitonParams(0, 1)) == 0.0


def test_energy_on_kernel_direction(wide_grid):
    # K eta_x = 0, so E(eta_x) reduces to the cubic term (zero by parity)
    p = SolitonParams(0.0, 1.0)
    jet = sample_eta_jet(wide_grid, p)
    v = FieldState(wide_grid, jet.d_x)
    cubic = -quadrature(wide_grid, jet.d_x**3)
    assert energy_functional(v, p) == pytest.approx(cubic, abs=1e-8)
    assert abs(cubic) < 1e-12


def _constrained_draw(grid, p, seed, amplitude):
    jet = sample_eta_jet(grid, p)
    d = grid.wrap(grid.x, p.a)
    env = np.exp(-((d / (grid.length / 8.0)) ** 2))
    w = smooth_noise(grid, seed) * env
    for wgt in (jet.eta, d * jet.eta):
        w = w - quadrature(grid, w * wgt) / quadrature(grid, wgt * wgt) * wgt
    w = w / np.sqrt(quadrature(grid, w**2))
    return FieldState(grid, amplitude * w)


def test_energy_coercivity_on_constrained_fields(wide_grid):
    p = SolitonParams(0.0, 1.0)
    ratios = []
    for seed in range(40):
        v = _constrained_draw(wide_grid, p, seed, 1e-3)
        h1sq = quadrature(
            wide_grid, v.values**2 + spectral_derivative(wide_grid, v.values) ** 2
        )
        ratios.append(energy_functional(v, p) / h1sq)
    assert min(ratios) >= 0.05


# -- virial weight ------------------------------------------------------


def test_phi_plateau_tail_and_bounds():
    assert np.all(phi_profile(np.linspace(-1, 1, 41)) == 1.0)
    x = np.linspace(2.0, 40.0, 400)
    assert np.allclose(phi_profile(x), np.exp(-x), atol=1e-15)
    x = np.linspace(1e-9, 40.0, 30000)
    vals = phi_profile(x)
    assert np.all(vals >= np.exp(-x) - 1e-14)
    assert np.all(vals <= 3.0 * np.exp(-x) + 1e-14)
    # even and nonincreasing on (0, inf)
    assert np.allclose(phi_profile(-x), vals, atol=1e-15)
    assert np.all(np.diff(vals) <= 1e-14)


def test_psi_odd_increasing_bounded():
    a_scale = 10.0
    x = np.linspace(-300.0, 300.0, 20001)
    psi = psi_profile(x, a_scale)
    assert np.allclose(psi, -psi_profile(-x, a_scale), atol=1e-12)
    assert np.all(np.diff(psi) >= -1e-12)
    # |psi| <= A * (total integral of phi)
    xs = np.linspace(0, 60, 200001)
    total = np.trapezoid(phi_profile(xs), xs)
    assert np.max(np.abs(psi)) <= a_scale * total + 1e-5
    # psi(x) = A * int_0^{x/A} phi by direct quadrature at a few points
    for pt in (0.5, 1.3, 2.7, 8.0):
        ys = np.linspace(0, pt / a_scale, 20001)
        expect = a_scale * np.trapezoid(phi_profile(ys), ys)
        assert psi_profile(pt, a_scale) == pytest.approx(expect, abs=1e-6)


def test_virial_quantity_parity(wide_grid):
    p = SolitonParams(0.0, 1.0)
    w = VirialWeight.build(wide_grid, 0.0, 10.0)
    even = sample_soliton(wide_grid, p)
    assert abs(virial_quantity(even, w)) < 1e-10
    jet = sample_eta_jet(wide_grid, p)
    odd = FieldState(wide_grid, jet.d_x)
    val = virial_quantity(odd, w)
    assert val > 0.0
    # Hoelder bound
    mom = quadrature(wide_grid, odd.values**2)
    assert abs(val) <= np.max(np.abs(w.psi)) * mom + 1e-12


# -- antiderivative / symplectic form -----------------------------------


def test_partial_x_inverse_left_inverse(wide_grid):
    f = smooth_noise(wide_grid, 1)
    df = spectral_derivative(wide_grid, f)
    rec = partial_x_inverse(FieldState(wide_grid, df)).values
    assert np.max(np.abs(rec - (f - np.mean(f)))) < 1e-10


def test_partial_x_inverse_requires_mean_zero(wide_grid):
    with pytest.raises(ValueError):
        partial_x_inverse(FieldState(wide_grid, np.ones(wide_grid.n)))
    # zero field passes trivially
    out = partial_x_inverse(FieldState(wide_grid, np.zeros(wide_grid.n)))
    assert np.all(out.values == 0.0)


def test_symplectic_form_antisymmetry(wide_grid):
    g = wide_grid
    for seed in (0, 1, 2):
        u = smooth_noise(g, seed)
        v = smooth_noise(g, seed + 10)
        u -= u.mean()
        v -= v.mean()
        fu, fv = FieldState(g, u), FieldState(g, v)
        assert symplectic_form(fu, fv) == pytest.approx(-symplectic_form(fv, fu), abs=1e-10)
        assert abs(symplectic_form(fu, fu)) < 1e-12


def test_symplectic_form_restricted_coefficient(wide_grid):
    g = wide_grid
    for a, c in [(0.0, 1.0), (3.0, 0.8), (-5.0, 1.6)]:
        jet = sample_eta_jet(g, SolitonParams(a, c))
        omega = symplectic_form(FieldState(g, jet.d_a), FieldState(g, jet.d_c))
        assert omega == pytest.approx(8.0 * c**2, abs=1e-8)


def test_symplectic_form_position_identity(wide_grid):
    # <v, eta> = -omega(v, eta_a) even when v itself has nonzero mean
    g = wide_grid
    jet = sample_eta_jet(g, SolitonParams(1.0, 1.0))
    v = FieldState(g, smooth_noise(g, 4) + 0.3)
    lhs = quadrature(g, v.values * jet.eta)
    rhs = -symplectic_form(v, FieldState(g, jet.d_a))
    assert lhs == pytest.approx(rhs, abs=1e-9)


def test_symplectic_form_rejects_two_nonmean_zero(wide_grid):
    g = wide_grid
    u = FieldState(g, np.ones(g.n))
    with pytest.raises(ValueError):
        symplectic_form(u, u)


# -- finite differences and residual series ------------------------------


def test_finite_difference_fourth_order_interior():
    t = np.linspace(0, 1, 21)
    y = t**3 - 2 * t**2 + t
    d = finite_difference(y, t[1] - t[0])
    expect = 3 * t**2 - 4 * t + 1
    assert np.max(np.abs(d[2:-2] - expect[2:-2])) < 1e-12
    assert np.max(np.abs(d - expect)) < 1e-2
    with pytest.raises(ValueError):
        finite_difference(np.array([1.0, 2.0]), 0.1)


def test_parameter_residuals_exact_free_trajectory():
    b = PotentialSpec("zero")
    t = np.linspace(0, 2, 41)
    c = np.full_like(t, 1.3)
    a = 0.5 + 4 * 1.3**2 * t
    res_a, res_c = parameter_residuals(t, a, c, b)
    assert np.max(np.abs(res_a)) < 1e-12
    assert np.max(np.abs(res_c)) < 1e-12


def test_parameter_residuals_constant_potential():
    k = 2.0
    b = PotentialSpec("constant", amplitude=k)
    t = np.linspace(0, 2, 41)
    c = np.full_like(t, 1.0)
    a = 0.5 + (4 - k) * t
    res_a, res_c = parameter_residuals(t, a, c, b)
    assert np.max(np.abs(res_a)) < 1e-12
    assert np.max(np.abs(res_c)) < 1e-12


def test_parameter_residuals_unwraps_positions():
    b = PotentialSpec("zero")
    t = np.linspace(0, 4, 81)
    period = 10.0
    a_true = 4.0 * t
    res_a, _ = parameter_residuals(t, np.mod(a_true, period), np.ones_like(t), b, wrap_period=period)
    assert np.max(np.abs(res_a)) < 1e-10


def test_parameter_residuals_validation():
    b = PotentialSpec("zero")
    with pytest.raises(ValueError):
        parameter_residuals([0.0, 1.0], [0, 1], [1, 1], b)
    with pytest.raises(ValueError):
        parameter_residuals([0.0, 0.5, 2.0], [0, 1, 2], [1, 1, 1], b)


def test_conservation_residuals_free_flow(wide_grid):
    init = sample_soliton(wide_grid, SolitonParams(-2.0, 1.0))
    pot = PotentialSpec("zero", h=1.0)
    res = simulate(init, pot, StepperConfig(dt=2e-4, snapshot_stride=25), 0.02)
    cons = conservation_residuals(res.snapshots, pot, frame="solver")
    assert np.max(np.abs(cons["p_residual"])) < 1e-8
    assert np.max(np.abs(cons["h_residual"])) < 1e-6


def test_conservation_residuals_time_dependent_energy_law():
    # with a time-envelope potential, dH/dt must track (1/2) int b_t u^2
    g = GridSpec(512, 40 * np.pi, -20 * np.pi)
    pot = PotentialSpec("sinusoidal", amplitude=0.5, h=0.5, envelope_omega=3.0)
    init = sample_soliton(g, SolitonParams(-2.0, 1.0))
    res = simulate(init, pot, StepperConfig(dt=5e-5, snapshot_stride=20), 0.02)
    # solver frame here *is* h=0.5 scaled; use solver-frame law directly
    cons = conservation_residuals(res.snapshots, pot, frame="solver")
    scale = np.max(np.abs(cons["dH_dt"]))
    assert scale > 0
    assert np.max(np.abs(cons["h_residual"][2:-2])) < 1e-3 * scale


# -- forcing decomposition ----------------------------------------------


def test_forcing_vanishes_for_exact_free_rates(wide_grid):
    p = SolitonParams(0.0, 1.0)
    b = PotentialSpec("zero")
    fd = forcing_decomposition(wide_grid, p, adot=4.0 * p.c**2, cdot=0.0, b=b)
    assert np.max(np.abs(fd.f0)) < 1e-14
    assert fd.mismatch_l2 < 1e-14


def test_forcing_pairings_vanish_by_construction(wide_grid):
    p = SolitonParams(2.0, 1.1)
    b = PotentialSpec("sinusoidal", amplitude=8.0, h=0.25)
    fd = forcing_decomposition(wide_grid, p, adot=0.9 * p.speed, cdot=0.05, b=b)
    assert abs(fd.pairing_position) < 1e-10
    assert abs(fd.pairing_scale) < 1e-10


def _mismatch_sweep(family, amplitude, width=2.0):
    p = SolitonParams(1.0, 1.0)
    hs = [0.4, 0.2, 0.1, 0.05]
    out = []
    for h in hs:
        b = PotentialSpec(family, amplitude=amplitude, h=h, width=width)
        g = GridSpec(2048, 16 * np.pi / h, p.a - 8 * np.pi / h)
        adot = p.speed - float(b.physical(p.a, 0.0))
        cdot = p.c * float(b.physical(p.a, 0.0, x_order=1)) / 3.0
        out.append(forcing_decomposition(g, p, adot, cdot, b).mismatch_l2)
    return hs, out


def test_forcing_mismatch_quadratic_in_h():
    hs, ms = _mismatch_sweep("bump", 5.0)
    slope, _ = fit_slope(hs, ms)
    assert 1.8 <= slope <= 3.2


def test_forcing_mismatch_sinusoidal_at_least_quadratic():
    hs, ms = _mismatch_sweep("sinusoidal", 8.0)
    slope, _ = fit_slope(hs, ms)
    assert slope >= 1.8


def test_parameter_residuals_shrink_with_h():
    """Along mild-potential runs the scale-equation residual decreases with
    h and the position residual just after launch stays O(h)."""
    from pkdvlab.config import RunConfig
    from pkdvlab.runs import run_simulation

    means = {}
    for h in (0.3, 0.15):
        cfg = RunConfig(potential_h=h, potential_amplitude=2.0, grid_n=512).validate()
        run = run_simulation(cfg, with_diagnostics=True)
        recs = run.records
        means[h] = np.mean([abs(r.res_c) for r in recs[2:-2]])
        assert abs(recs[2].res_a) <= 0.25 * h
    assert means[0.15] < means[0.3]


# -- record schema -------------------------------------------------------


def test_diagnostics_record_schema():
    header = DiagnosticsRecord.header()
    assert header[:5] == ["time", "P", "H", "a", "c"]
    rec = DiagnosticsRecord(*range(len(header)))
    assert rec.row() == list(range(len(header)))


def test_quadrature_translation_invariance(wide_grid):
    f = smooth_noise(wide_grid, 8)
    base = quadrature(wide_grid, f**2)
    for shift in (1, 17, 500):
        rolled = np.roll(f, shift)
        assert quadrature(wide_grid, rolled**2) == pytest.approx(base, abs=1e-10)
        assert h1_norm(FieldState(wide_grid, rolled)) == pytest.approx(
            h1_norm(FieldState(wide_grid, f)), abs=1e-10
        )
