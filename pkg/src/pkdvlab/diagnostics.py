"""Functionals tracked along a run: norms, energy, virial and residuals.

This module collects every scalar the analysis monitors: plain and
exponentially weighted H1 norms of the residual field, the quadratic
energy around the soliton, the odd virial moment, the antiderivative /
symplectic-form machinery, finite-difference residuals of the parameter
equations and of the momentum/energy balance laws, and the symplectic
decomposition of the forcing term.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from functools import lru_cache

import numpy as np

from .grids import FieldState, GridSpec, quadrature, spectral_derivative
from .potentials import PotentialSpec
from .solitons import SolitonParams, dxinv_eta_c, f_perp_leading, sample_eta_jet

__all__ = [
    "h1_norm",
    "weighted_h1",
    "energy_functional",
    "phi_profile",
    "psi_profile",
    "VirialWeight",
    "virial_quantity",
    "partial_x_inverse",
    "symplectic_form",
    "finite_difference",
    "parameter_residuals",
    "conservation_residuals",
    "ForcingDecomposition",
    "forcing_decomposition",
    "DiagnosticsRecord",
]


# ---------------------------------------------------------------------------
# norms and energy
# ---------------------------------------------------------------------------


def h1_norm(field: FieldState) -> float:
    """sqrt(int v**2 + v_x**2) with the derivative taken spectrally."""
    vx = spectral_derivative(field.grid, field.values)
    return float(np.sqrt(quadrature(field.grid, field.values**2 + vx**2)))


def weighted_h1(field: FieldState, center: float, eps: float) -> float:
    """H1 norm against the localizing weight exp(-eps |x - center|)."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    g = field.grid
    w = np.exp(-eps * np.abs(g.wrap(g.x, center)))
    vx = spectral_derivative(g, field.values)
    return float(np.sqrt(quadrature(g, (field.values**2 + vx**2) * w)))


def energy_functional(v: FieldState, p: SolitonParams) -> float:
    """E(v) = (1/2) int (4 c**2 v**2 + v_x**2 - 6 eta v**2) - int v**3."""
    g = v.grid
    jet = sample_eta_jet(g, p)
    vx = spectral_derivative(g, v.values)
    quadratic = 4.0 * p.c**2 * v.values**2 + vx**2 - 6.0 * jet.eta * v.values**2
    return 0.5 * quadrature(g, quadratic) - quadrature(g, v.values**3)


# ---------------------------------------------------------------------------
# virial weight
# ---------------------------------------------------------------------------

_LN3 = float(np.log(3.0))


def _smoothstep(s: np.ndarray) -> np.ndarray:
    s = np.clip(s, 0.0, 1.0)
    return s**3 * (10.0 - 15.0 * s + 6.0 * s * s)


def phi_profile(x) -> np.ndarray:
    """Even plateau/exponential envelope profile.

    Equals 1 on [0, 1] and exp(-|x|) on [2, inf); on (1, 2) a monotone
    quintic blend between the two, clamped by 3 exp(-|x|) so that
    exp(-|x|) <= phi <= 3 exp(-|x|) holds pointwise on (0, inf).  (The
    clamp is active on roughly [log 3, 1.45]; elsewhere the blend already
    sits inside the envelope.)
    """
    ax = np.abs(np.asarray(x, dtype=float))
    out = np.ones_like(ax)
    tail = ax >= 2.0
    out[tail] = np.exp(-ax[tail])
    mid = (ax > 1.0) & (ax < 2.0)
    a = ax[mid]
    blend = 1.0 + _smoothstep(a - 1.0) * (np.exp(-a) - 1.0)
    out[mid] = np.minimum(blend, 3.0 * np.exp(-a))
    return out


@lru_cache(maxsize=1)
def _phi_cumulative():
    # Fine tabulation of int_1^x phi on [1, 2]; trapezoid error ~ 1e-11.
    xs = np.linspace(1.0, 2.0, 40001)
    vals = phi_profile(xs)
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (vals[1:] + vals[:-1]) * np.diff(xs))])
    return xs, cum


def psi_profile(x, a_scale: float = 10.0) -> np.ndarray:
    """Odd increasing weight psi(x) = A * PsiTilde(x/A), PsiTilde' = phi."""
    if a_scale <= 0:
        raise ValueError("a_scale must be positive")
    x = np.asarray(x, dtype=float)
    s = np.abs(x) / a_scale
    xs, cum = _phi_cumulative()
    end = cum[-1]
    out = np.where(s <= 1.0, s, 0.0)
    mid = (s > 1.0) & (s < 2.0)
    out = np.where(mid, 1.0 + np.interp(s, xs, cum), out)
    tail = s >= 2.0
    out = np.where(tail, 1.0 + end + np.exp(-2.0) - np.exp(-s), out)
    return a_scale * np.sign(x) * out


@dataclass
class VirialWeight:
    """Tabulated phi and psi profiles centered at ``center`` on a grid."""

    grid: GridSpec
    center: float
    a_scale: float
    displacement: np.ndarray
    phi: np.ndarray
    psi: np.ndarray

    @classmethod
    def build(cls, grid: GridSpec, center: float, a_scale: float = 10.0) -> "VirialWeight":
        d = grid.wrap(grid.x, center)
        return cls(
            grid=grid,
            center=center,
            a_scale=a_scale,
            displacement=d,
            phi=phi_profile(d),
            psi=psi_profile(d, a_scale),
        )


def virial_quantity(v: FieldState, weight: VirialWeight) -> float:
    """int psi(x - a) v**2, the monotonicity functional of the local estimate."""
    if v.grid != weight.grid:
        raise ValueError("field and virial weight live on different grids")
    return quadrature(v.grid, weight.psi * v.values**2)


# ---------------------------------------------------------------------------
# antiderivative and symplectic form
# ---------------------------------------------------------------------------


def partial_x_inverse(field: FieldState) -> FieldState:
    """Mean-zero antiderivative by Fourier division (zero mode dropped).

    The input must be mean-free: |mean| < 1e-10 * RMS, otherwise the
    antiderivative is not periodic and a ValueError is raised.
    """
    v = field.values
    rms = float(np.sqrt(np.mean(v**2)))
    mean = float(np.mean(v))
    if rms == 0.0:
        return FieldState(field.grid, np.zeros_like(v), field.time)
    if abs(mean) > 1e-10 * rms:
        raise ValueError(f"input is not mean-zero (|mean| = {abs(mean):.3g}, rms = {rms:.3g})")
    vhat = np.fft.rfft(v)
    ik = field.grid.derivative_symbol(1)
    out = np.zeros_like(vhat)
    out[1:-1] = vhat[1:-1] / ik[1:-1]
    return FieldState(field.grid, np.fft.irfft(out, n=field.grid.n), field.time)


def _is_mean_zero(values: np.ndarray) -> bool:
    rms = float(np.sqrt(np.mean(values**2)))
    return rms == 0.0 or abs(float(np.mean(values))) <= 1e-10 * rms


def _anchored_antiderivative(field: FieldState) -> np.ndarray:
    """Antiderivative matching the symmetric half-line convention.

    For a localized mean-free profile the half-line antiderivative decays
    at infinity; on the torus the matching choice vanishes at the point
    antipodal to the profile's bulk, so the Fourier antiderivative is
    re-anchored there.  The constant is irrelevant whenever the pairing
    partner is itself mean-free.
    """
    g = partial_x_inverse(field).values
    anchor = (int(np.argmax(np.abs(field.values))) + field.grid.n // 2) % field.grid.n
    return g - g[anchor]


def symplectic_form(u: FieldState, v: FieldState) -> float:
    """omega(u, v) = <u, dx^{-1} v>, evaluated through whichever argument
    is mean-free (both orders agree by antisymmetry)."""
    if u.grid != v.grid:
        raise ValueError("fields live on different grids")
    if _is_mean_zero(v.values):
        return quadrature(u.grid, u.values * _anchored_antiderivative(v))
    if _is_mean_zero(u.values):
        return -quadrature(u.grid, _anchored_antiderivative(u) * v.values)
    raise ValueError("symplectic form needs at least one mean-zero argument")


# ---------------------------------------------------------------------------
# finite differences and residual time series
# ---------------------------------------------------------------------------


def finite_difference(values: np.ndarray, dt: float) -> np.ndarray:
    """d/dt of a uniformly sampled series.

    Fourth-order centered stencils in the interior, second-order centered
    next to the boundary and second-order one-sided at the endpoints.
    """
    y = np.asarray(values, dtype=float)
    n = y.size
    if n < 3:
        raise ValueError("need at least 3 samples to differentiate")
    out = np.empty_like(y)
    out[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * dt)
    out[-1] = (3.0 * y[-1] - 4.0 * y[-2] + y[-3]) / (2.0 * dt)
    if n >= 5:
        out[2:-2] = (-y[4:] + 8.0 * y[3:-1] - 8.0 * y[1:-3] + y[:-4]) / (12.0 * dt)
        out[1] = (y[2] - y[0]) / (2.0 * dt)
        out[-2] = (y[-1] - y[-3]) / (2.0 * dt)
    else:
        out[1:-1] = (y[2:] - y[:-2]) / (2.0 * dt)
    return out


def _uniform_dt(times: np.ndarray) -> float:
    dts = np.diff(times)
    if dts.size == 0 or not np.allclose(dts, dts[0], rtol=1e-8, atol=1e-14):
        raise ValueError("samples must be uniformly spaced in time")
    return float(dts[0])


def parameter_residuals(
    times,
    a_series,
    c_series,
    b: PotentialSpec,
    wrap_period: float | None = None,
):
    """Residuals of the physical-frame parameter equations.

    Returns (res_a, res_c) with res_a = da/dt - 4 c**2 + b(a) and
    res_c = dc/dt - (1/3) c b'(a), the time derivatives formed by
    finite differences of the fitted trajectory.  ``wrap_period`` unwraps
    a position series recorded modulo the domain length.
    """
    times = np.asarray(times, dtype=float)
    a = np.asarray(a_series, dtype=float)
    c = np.asarray(c_series, dtype=float)
    if times.size < 3:
        raise ValueError("need at least 3 fit samples")
    dt = _uniform_dt(times)
    if wrap_period is not None:
        a = np.unwrap(a, period=wrap_period)
    adot = finite_difference(a, dt)
    cdot = finite_difference(c, dt)
    b_at = np.array([float(b.physical(ai, ti)) for ai, ti in zip(a, times)])
    bx_at = np.array([float(b.physical(ai, ti, x_order=1)) for ai, ti in zip(a, times)])
    res_a = adot - 4.0 * c**2 + b_at
    res_c = cdot - c * bx_at / 3.0
    return res_a, res_c


def conservation_residuals(snapshots, b: PotentialSpec, frame: str = "solver") -> dict:
    """Finite-difference balance-law residuals along a snapshot sequence.

    dP/dt should equal int b_x u**2 and dH/dt should equal
    (1/2) int b_t u**2; both residual series are returned together with
    the raw P, H and dP/dt series.
    """
    from .functionals import hamiltonian, momentum

    if len(snapshots) < 3:
        raise ValueError("need at least 3 snapshots")
    grid = snapshots[0].grid
    times = np.array([s.time for s in snapshots])
    dt = _uniform_dt(times)

    def b_eval(t, x_order=0, t_order=0):
        if frame == "solver":
            return np.asarray(b.solver(grid.x, t, x_order, t_order))
        return np.asarray(b.physical(grid.x, t, x_order, t_order))

    P = np.array([momentum(s) for s in snapshots])
    H = np.array([hamiltonian(s, b_eval(s.time), frame=frame) for s in snapshots])
    p_flux = np.array([quadrature(grid, b_eval(s.time, x_order=1) * s.values**2) for s in snapshots])
    h_flux = np.array(
        [0.5 * quadrature(grid, b_eval(s.time, t_order=1) * s.values**2) for s in snapshots]
    )
    dP = finite_difference(P, dt)
    dH = finite_difference(H, dt)
    return {
        "times": times,
        "P": P,
        "H": H,
        "dP_dt": dP,
        "dH_dt": dH,
        "p_residual": dP - p_flux,
        "h_residual": dH - h_flux,
    }


# ---------------------------------------------------------------------------
# forcing decomposition
# ---------------------------------------------------------------------------


@dataclass
class ForcingDecomposition:
    """Symplectic split of the forcing term on the grid."""

    f0: np.ndarray
    parallel_a: float
    parallel_c: float
    f_perp: np.ndarray
    leading: np.ndarray
    mismatch_l2: float
    pairing_position: float
    pairing_scale: float


def forcing_decomposition(
    grid: GridSpec,
    p: SolitonParams,
    adot: float,
    cdot: float,
    b: PotentialSpec,
    t: float = 0.0,
) -> ForcingDecomposition:
    """Decompose F0 = -(adot - 4c**2) eta_a - cdot eta_c + d_x(b eta).

    The parallel part lies in span{eta_a, eta_c}; the orthogonal remainder
    annihilates both symplectic pairings by construction and is compared
    in L2 against its closed-form leading approximation.
    """
    jet = sample_eta_jet(grid, p)
    x_eff = p.a + grid.wrap(grid.x, p.a)
    bv = np.asarray(b.physical(grid.x, t))
    bx = np.asarray(b.physical(grid.x, t, x_order=1))
    f0 = -(adot - 4.0 * p.c**2) * jet.d_a - cdot * jet.d_c + bx * jet.eta + bv * jet.d_x

    # pairing weights: dx^{-1} eta_a = -eta, dx^{-1} eta_c = tau + y*theta
    w_a = -jet.eta
    w_c = dxinv_eta_c(x_eff, p)

    def pair(f, w):
        return quadrature(grid, f * w)

    gram = np.array(
        [[pair(jet.d_a, w_a), pair(jet.d_c, w_a)], [pair(jet.d_a, w_c), pair(jet.d_c, w_c)]]
    )
    rhs = np.array([pair(f0, w_a), pair(f0, w_c)])
    alpha, beta = np.linalg.solve(gram, rhs)
    f_perp = f0 - alpha * jet.d_a - beta * jet.d_c
    leading = f_perp_leading(x_eff, p, b, t)
    mismatch = float(np.sqrt(quadrature(grid, (f_perp - leading) ** 2)))
    return ForcingDecomposition(
        f0=f0,
        parallel_a=float(alpha),
        parallel_c=float(beta),
        f_perp=f_perp,
        leading=leading,
        mismatch_l2=mismatch,
        pairing_position=pair(f_perp, w_a),
        pairing_scale=pair(f_perp, w_c),
    )


# ---------------------------------------------------------------------------
# per-snapshot record
# ---------------------------------------------------------------------------


@dataclass
class DiagnosticsRecord:
    """One physical-frame row of every tracked functional."""

    time: float
    P: float
    H: float
    a: float
    c: float
    h1_norm_v: float
    weighted_h1_v: float
    orth1: float
    orth2: float
    energy_E: float
    virial_psi_v2: float
    res_a: float
    res_c: float
    momentum_law_residual: float

    @classmethod
    def header(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def row(self) -> list[float]:
        return [getattr(self, f.name) for f in fields(self.__class__)]
