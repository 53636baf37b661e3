"""Soliton parameter extraction from a grid field.

Two fitters are provided.  The peak fit locates the grid maximum, refines
the center by quadratic interpolation through the three surrounding points
and converts the interpolated peak amplitude into a scale via
c = sqrt(peak/2).  The orthogonality refit then solves

    <u - eta(.; a, c), eta> = 0,   <u - eta(.; a, c), (x - a) eta> = 0

for (a, c) by Newton iteration, using the closed-form block
[[0, 8 c**2], [(8/3) c**3, 0]] of the Jacobian plus quadrature corrections
from the residual field.  On the periodic grid the moment weight (x - a)
is the wrapped displacement, damped beyond |x - a| > L/4 so the weight
stays unambiguous far from the soliton.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import FieldState, GridSpec, eval_interpolant, quadrature
from .solitons import SolitonParams, sample_eta_jet

__all__ = [
    "FitError",
    "AmbiguousPeakError",
    "FitConvergenceError",
    "PeakFit",
    "RefitResult",
    "peak_fit",
    "moment_weight",
    "refit_matrix",
    "orthogonality_refit",
]


class FitError(RuntimeError):
    pass


class AmbiguousPeakError(FitError):
    pass


class FitConvergenceError(FitError):
    def __init__(self, message: str, residuals: tuple[float, float]):
        super().__init__(message)
        self.residuals = residuals


@dataclass(frozen=True)
class PeakFit:
    """Peak-based estimate: center, scale and interpolated peak value."""

    a_tilde: float
    c_tilde: float
    peak_value: float

    @property
    def params(self) -> SolitonParams:
        return SolitonParams(self.a_tilde, self.c_tilde)


@dataclass
class RefitResult:
    """Orthogonality-refit output: parameters, residual field, diagnostics."""

    params: SolitonParams
    v: FieldState
    iters: int
    residuals: tuple[float, float]


def peak_fit(field: FieldState, min_peak_ratio: float = 4.0) -> PeakFit:
    """Locate the dominant soliton by sub-grid peak interpolation.

    Raises :class:`AmbiguousPeakError` when there is no positive maximum
    standing at least ``min_peak_ratio`` times above the background RMS
    (measured over the half of the domain farthest from the candidate).
    """
    field.validate()
    g = field.grid
    v = field.values
    j0 = int(np.argmax(v))
    vmax = v[j0]
    if vmax <= 0:
        raise AmbiguousPeakError("field has no positive maximum")

    far = np.abs(g.wrap(g.x, g.x[j0])) > 0.25 * g.length
    background = float(np.sqrt(np.mean(v[far] ** 2))) if np.any(far) else 0.0
    if background > 0 and vmax < min_peak_ratio * background:
        raise AmbiguousPeakError(
            f"peak {vmax:.3g} does not dominate background RMS {background:.3g}"
        )

    ym, y0, yp = v[(j0 - 1) % g.n], v[j0], v[(j0 + 1) % g.n]
    curvature = ym - 2.0 * y0 + yp
    if curvature >= 0:
        raise AmbiguousPeakError("grid maximum is not a local parabola peak")
    offset = 0.5 * g.dx * (ym - yp) / curvature
    center = g.x[j0] + offset
    # wrap into the fundamental domain
    center = g.origin + np.mod(center - g.origin, g.length)

    peak = float(eval_interpolant(g, v, center))
    if peak <= 0:
        raise AmbiguousPeakError("interpolated peak value is not positive")
    return PeakFit(a_tilde=float(center), c_tilde=float(np.sqrt(0.5 * peak)), peak_value=peak)


def moment_weight(grid: GridSpec, center: float, damping_scale: float = 10.0):
    """Wrapped moment weight rho(x - a) and its displacement derivative.

    rho(d) = d for |d| <= L/4 and decays exponentially on the scale
    ``damping_scale`` beyond, removing the periodic ambiguity of the
    first-moment weight.
    """
    d = grid.wrap(grid.x, center)
    excess = np.maximum(np.abs(d) - 0.25 * grid.length, 0.0)
    damp = np.exp(-excess / damping_scale)
    rho = d * damp
    rho_prime = damp * np.where(excess > 0, 1.0 - np.abs(d) / damping_scale, 1.0)
    return rho, rho_prime


def _residuals(field: FieldState, p: SolitonParams, damping_scale: float):
    g = field.grid
    jet = sample_eta_jet(g, p)
    rho, rho_prime = moment_weight(g, p.a, damping_scale)
    v = field.values - jet.eta
    r1 = quadrature(g, v * jet.eta)
    r2 = quadrature(g, v * rho * jet.eta)
    return v, jet, rho, rho_prime, r1, r2


def refit_matrix(
    field: FieldState,
    p: SolitonParams,
    analytic: bool = True,
    damping_scale: float = 10.0,
) -> np.ndarray:
    """Newton matrix of the orthogonality system at (a, c).

    With ``analytic=True`` the soliton-manifold block is the closed form
    [[0, 8 c**2], [(8/3) c**3, 0]]; with ``analytic=False`` that block is
    evaluated by grid quadrature instead (useful as a cross-check).
    Residual-field corrections are always quadratures.
    """
    g = field.grid
    v, jet, rho, rho_prime, _, _ = _residuals(field, p, damping_scale)
    if analytic:
        m12 = 8.0 * p.c**2
        m21 = (8.0 / 3.0) * p.c**3
        m11 = 0.0
        m22 = 0.0
    else:
        m11 = quadrature(g, jet.d_a * jet.eta)
        m12 = quadrature(g, jet.d_c * jet.eta)
        m21 = quadrature(g, jet.d_a * rho * jet.eta)
        m22 = quadrature(g, jet.d_c * rho * jet.eta)
    return np.array(
        [
            [m11 - quadrature(g, v * jet.d_a), m12 - quadrature(g, v * jet.d_c)],
            [
                m21 + quadrature(g, v * (rho_prime * jet.eta - rho * jet.d_a)),
                m22 - quadrature(g, v * rho * jet.d_c),
            ],
        ]
    )


def orthogonality_refit(
    field: FieldState,
    seed: SolitonParams,
    tol: float = 1e-10,
    max_iter: int = 50,
    c_band: tuple[float, float] | None = None,
    damping_scale: float = 10.0,
) -> RefitResult:
    """Newton-solve the orthogonality conditions starting from ``seed``.

    Raises :class:`FitConvergenceError` (carrying the last residuals) when
    the iteration has not met ``tol`` after ``max_iter`` updates, which
    signals that the field is too far from the soliton manifold for the
    decomposition to be trustworthy.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if c_band is not None and not (c_band[0] <= seed.c <= c_band[1]):
        raise FitError(f"seed scale {seed.c} outside allowed band {c_band}")

    p = seed
    iters = 0
    r1 = r2 = np.inf
    for _ in range(max_iter + 1):
        iters += 1
        v, jet, rho, rho_prime, r1, r2 = _residuals(field, p, damping_scale)
        if max(abs(r1), abs(r2)) <= tol:
            return RefitResult(
                params=p,
                v=FieldState(field.grid, v, field.time),
                iters=iters,
                residuals=(abs(r1), abs(r2)),
            )
        m = refit_matrix(field, p, analytic=True, damping_scale=damping_scale)
        try:
            delta = np.linalg.solve(m, np.array([r1, r2]))
        except np.linalg.LinAlgError as exc:
            raise FitConvergenceError(f"singular Newton matrix: {exc}", (abs(r1), abs(r2)))
        new_c = p.c + delta[1]
        if new_c <= 0:
            raise FitConvergenceError("Newton step left the admissible scale range", (abs(r1), abs(r2)))
        p = SolitonParams(p.a + delta[0], new_c)
        if c_band is not None and not (0.5 * c_band[0] <= p.c <= 2.0 * c_band[1]):
            raise FitConvergenceError(f"iterate scale {p.c} far outside band {c_band}", (abs(r1), abs(r2)))
    raise FitConvergenceError(
        f"no convergence after {max_iter} Newton updates", (abs(r1), abs(r2))
    )
