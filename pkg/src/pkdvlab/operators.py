"""Dense discretizations of the linearized operators and their spectra.

The Schroedinger-type operators that control the stability analysis,

    unit-soliton Hessian      4 - d_y^2 - 6 theta(y)
    scaled Hessian            4 c**2 - d_x^2 - 6 eta(x; a, c)
    virial curvature          4/3 + 2 y theta'(y) - 2 theta(y) - d_y^2

are assembled as dense symmetric matrices on a periodic grid with the
second derivative taken spectrally (a circulant).  The sech**2 potential
is reflectionless with bound states at -5, 0, 3 and continuous spectrum
[4, inf); the box discretizes the continuum to a dense set above 4, so
only eigenvalues well below that edge are meaningful as bound states.
Constrained Rayleigh quotients are computed by projecting onto the
orthogonal complement of the constraints and solving the (generalized)
symmetric eigenproblem there.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .grids import FieldState, GridSpec, quadrature, spectral_derivative
from .solitons import SolitonParams, sample_eta_jet, theta

__all__ = [
    "OperatorMatrix",
    "default_operator_grid",
    "derivative_matrix",
    "hessian_operator",
    "scaled_hessian_operator",
    "virial_form_operator",
    "eigenpairs",
    "analytic_ground_state",
    "analytic_kernel_state",
    "constants_check",
    "constrained_min_rayleigh",
    "h1_gram",
    "odd_subspace_basis",
    "mm_positivity_check",
    "corollary_mm_form",
]


@dataclass
class OperatorMatrix:
    """Dense symmetric operator on a periodic grid."""

    grid: GridSpec
    matrix: np.ndarray
    kind: str

    def apply(self, values: np.ndarray) -> np.ndarray:
        return self.matrix @ values

    def quadratic_form(self, values: np.ndarray) -> float:
        """<A w, w> in the L2 inner product of the grid."""
        return float(self.grid.dx * values @ (self.matrix @ values))


def default_operator_grid(n: int = 512, half_width: float = 20.0) -> GridSpec:
    """Symmetric box wide enough that the sech**2 potential is < 1e-12 at the edge."""
    return GridSpec(n, 2.0 * half_width, -half_width)


def derivative_matrix(grid: GridSpec, order: int = 1) -> np.ndarray:
    """Dense spectral differentiation matrix (circulant)."""
    e0 = np.zeros(grid.n)
    e0[0] = 1.0
    col = np.fft.irfft(grid.derivative_symbol(order) * np.fft.rfft(e0), n=grid.n)
    return scipy.linalg.circulant(col)


def _assemble(grid: GridSpec, potential: np.ndarray, kind: str) -> OperatorMatrix:
    mat = -derivative_matrix(grid, 2) + np.diag(potential)
    mat = 0.5 * (mat + mat.T)
    return OperatorMatrix(grid=grid, matrix=mat, kind=kind)


def hessian_operator(grid: GridSpec) -> OperatorMatrix:
    """4 - d_y^2 - 6 theta(y) on the grid."""
    y = grid.x
    return _assemble(grid, 4.0 - 6.0 * theta(y), "hessian")


def scaled_hessian_operator(grid: GridSpec, p: SolitonParams) -> OperatorMatrix:
    """4 c**2 - d_x^2 - 6 eta(x; a, c) on the grid."""
    jet = sample_eta_jet(grid, p)
    return _assemble(grid, 4.0 * p.c**2 - 6.0 * jet.eta, "scaled_hessian")


def virial_form_operator(grid: GridSpec) -> OperatorMatrix:
    """4/3 + 2 y theta' - 2 theta - d_y^2, the virial curvature operator."""
    y = grid.x
    return _assemble(grid, 4.0 / 3.0 + 2.0 * y * theta(y, 1) - 2.0 * theta(y), "virial_form")


def _fix_signs(grid: GridSpec, vecs: np.ndarray) -> np.ndarray:
    """Deterministic sign convention per eigenvector.

    Even-about-zero modes are made positive at the center; odd modes get a
    positive slope at the center.  Modes without definite parity keep the
    sign of their largest-magnitude component.
    """
    n = grid.n
    center = int(np.argmin(np.abs(grid.x)))
    flipped = np.roll(vecs[::-1, :], 1, axis=0)  # y -> -y on a symmetric grid
    out = vecs.copy()
    for j in range(vecs.shape[1]):
        v = out[:, j]
        norm = np.linalg.norm(v)
        even = np.linalg.norm(v - flipped[:, j]) < 1e-6 * norm
        odd = np.linalg.norm(v + flipped[:, j]) < 1e-6 * norm
        if even:
            sign = np.sign(v[center]) or 1.0
        elif odd:
            sign = np.sign(v[(center + 1) % n] - v[(center - 1) % n]) or 1.0
        else:
            sign = np.sign(v[np.argmax(np.abs(v))]) or 1.0
        out[:, j] = sign * v
    return out


def eigenpairs(op: OperatorMatrix, k: int):
    """The k lowest eigenvalues (ascending) and L2-normalized eigenvectors."""
    if not 1 <= k <= op.grid.n:
        raise ValueError(f"k must lie in [1, {op.grid.n}]")
    try:
        vals, vecs = scipy.linalg.eigh(op.matrix, subset_by_index=[0, k - 1])
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise RuntimeError(f"eigensolver failed for {op.kind}: {exc}")
    vecs = vecs / np.sqrt(op.grid.dx)
    return vals, _fix_signs(op.grid, vecs)


def analytic_ground_state(y) -> np.ndarray:
    """Normalized ground state (sqrt(15)/4) sech(y)**3 at eigenvalue -5."""
    y = np.asarray(y, dtype=float)
    return (np.sqrt(15.0) / 4.0) / np.cosh(np.clip(y, -700, 700)) ** 3


def analytic_kernel_state(y) -> np.ndarray:
    """Normalized kernel direction -(sqrt(15)/8) theta'(y) at eigenvalue 0."""
    return -(np.sqrt(15.0) / 8.0) * theta(np.asarray(y, dtype=float), 1)


def constants_check(grid: GridSpec | None = None, tol: float = 1e-4) -> dict:
    """Quadrature reproduction of the printed spectral-resolution constants.

    Returns a report with computed, reference value and pass flag for the
    four constants (two eigenfunction overlaps, two residual norms) plus
    the closed-form norms of theta and y*theta.
    """
    if grid is None:
        grid = default_operator_grid()
    y = grid.x
    th = theta(y)
    f1 = analytic_ground_state(y)
    f0 = analytic_kernel_state(y)

    beta_even = quadrature(grid, th * f1)
    beta_odd = quadrature(grid, y * th * f0)
    norm_th = quadrature(grid, th * th)
    norm_yth = quadrature(grid, (y * th) ** 2)

    entries = [
        ("overlap_even", beta_even, 3.0 * np.sqrt(15.0) * np.pi / 16.0, 2.28138),
        ("residual_even", norm_th - beta_even**2, 16.0 / 3.0 - (3.0 * np.sqrt(15.0) * np.pi / 16.0) ** 2, 0.128659),
        ("overlap_odd", beta_odd, np.sqrt(5.0 / 3.0), 1.29099),
        ("residual_odd", norm_yth - beta_odd**2, (4.0 / 9.0) * (np.pi**2 - 6.0) - 5.0 / 3.0, 0.0531575),
        ("theta_norm_sq", norm_th, 16.0 / 3.0, 16.0 / 3.0),
        ("y_theta_norm_sq", norm_yth, (4.0 / 9.0) * (np.pi**2 - 6.0), (4.0 / 9.0) * (np.pi**2 - 6.0)),
    ]
    report = {}
    for name, computed, closed_form, printed in entries:
        report[name] = {
            "computed": float(computed),
            "closed_form": float(closed_form),
            "printed": float(printed),
            "ok": bool(abs(computed - printed) <= tol),
        }
    return report


def h1_gram(grid: GridSpec) -> np.ndarray:
    """Matrix of the H1 inner product (per unit dx): I + D1^T D1."""
    d1 = derivative_matrix(grid, 1)
    return np.eye(grid.n) + d1.T @ d1


def _complement_basis(constraints) -> np.ndarray:
    c = np.atleast_2d(np.asarray(constraints, dtype=float))
    if np.linalg.matrix_rank(c) < c.shape[0]:
        raise ValueError("constraint vectors are linearly dependent")
    return scipy.linalg.null_space(c)


def constrained_min_rayleigh(op: OperatorMatrix, constraints, norm: str = "l2") -> float:
    """Minimum of <A w, w> / ||w||**2 over the complement of the constraints.

    ``norm`` selects the normalization: ``"l2"`` uses ||w||_L2, ``"h1"``
    uses the full H1 norm (generalized eigenproblem with the H1 Gram).
    """
    if constraints is not None and len(constraints) > 0:
        q = _complement_basis(constraints)
    else:
        q = np.eye(op.grid.n)
    a = q.T @ op.matrix @ q
    a = 0.5 * (a + a.T)
    if norm == "l2":
        return float(scipy.linalg.eigh(a, eigvals_only=True, subset_by_index=[0, 0])[0])
    if norm != "h1":
        raise ValueError(f"unknown norm {norm!r}")
    g = q.T @ h1_gram(op.grid) @ q
    g = 0.5 * (g + g.T)
    return float(scipy.linalg.eigh(a, g, eigvals_only=True, subset_by_index=[0, 0])[0])


def odd_subspace_basis(grid: GridSpec) -> np.ndarray:
    """Orthonormal basis of functions odd about y = 0 on a symmetric grid."""
    if abs(grid.origin + 0.5 * grid.length) > 1e-12 * grid.length:
        raise ValueError("odd parity needs a grid symmetric about zero")
    n = grid.n
    basis = np.zeros((n, n // 2 - 1))
    for idx, j in enumerate(range(1, n // 2)):
        basis[j, idx] = 1.0 / np.sqrt(2.0)
        basis[n - j, idx] = -1.0 / np.sqrt(2.0)
    return basis


def mm_positivity_check(
    grid: GridSpec | None = None,
    constrained: bool = True,
    parity: str | None = None,
) -> float:
    """Constrained minimum of the augmented virial quadratic form.

    Minimizes (3/2) <L w, w> + (6/||theta||**2) <w, y theta'> <w, theta**2>
    over unit H1 vectors orthogonal to theta and y*theta (when
    ``constrained``); restricted to the odd-parity subspace when
    ``parity="odd"``, where the rank-one augmentation drops out.
    """
    if grid is None:
        grid = default_operator_grid()
    y = grid.x
    th = theta(y)
    op = virial_form_operator(grid)
    a_vec = y * theta(y, 1)
    b_vec = th * th
    norm_th = quadrature(grid, th * th)
    form = 1.5 * op.matrix + (6.0 / norm_th) * grid.dx * 0.5 * (
        np.outer(a_vec, b_vec) + np.outer(b_vec, a_vec)
    )
    form = 0.5 * (form + form.T)

    if parity == "odd":
        basis = odd_subspace_basis(grid)
    elif parity is None:
        basis = np.eye(grid.n)
    else:
        raise ValueError(f"unknown parity {parity!r}")

    if constrained:
        cons = np.stack([th, y * th]) @ basis
        keep = [i for i in range(cons.shape[0]) if np.linalg.norm(cons[i]) > 1e-12]
        q = _complement_basis(cons[keep]) if keep else np.eye(basis.shape[1])
        basis = basis @ q

    a = basis.T @ form @ basis
    g = basis.T @ h1_gram(grid) @ basis
    a = 0.5 * (a + a.T)
    g = 0.5 * (g + g.T)
    return float(scipy.linalg.eigh(a, g, eigvals_only=True, subset_by_index=[0, 0])[0])


def corollary_mm_form(v: FieldState, p: SolitonParams, weight, orth_tol: float = 1e-6):
    """Both sides of the scaled local-virial coercivity inequality.

    Returns (rhs, lhs) where rhs is the virial quadratic expression and
    lhs = int (v_x**2 + v**2) exp(-c |x - a| / A); coercivity asserts
    rhs >= lambda_0 * lhs for some positive lambda_0.  The input must
    satisfy the orthogonality conditions up to ``orth_tol`` (relative to
    the natural pairing scale).
    """
    g = v.grid
    jet = sample_eta_jet(g, p)
    d = g.wrap(g.x, p.a)
    scale = float(np.sqrt(quadrature(g, v.values**2) * quadrature(g, jet.eta**2))) + 1e-300
    r1 = quadrature(g, v.values * jet.eta)
    r2 = quadrature(g, v.values * d * jet.eta)
    if max(abs(r1), abs(r2)) > orth_tol * scale:
        raise ValueError(
            f"orthogonality residuals ({r1:.3g}, {r2:.3g}) too large for the virial form"
        )
    kv = 4.0 * p.c**2 * v.values - spectral_derivative(g, v.values, 2) - 6.0 * jet.eta * v.values
    dx_kv = spectral_derivative(g, kv)
    denom = quadrature(g, jet.d_x * d * jet.eta)
    rhs = -quadrature(g, weight.psi * v.values * dx_kv) + (
        quadrature(g, weight.psi * v.values * jet.d_x) * quadrature(g, dx_kv * d * jet.eta) / denom
    )
    vx = spectral_derivative(g, v.values)
    lhs = quadrature(g, (vx**2 + v.values**2) * np.exp(-p.c * np.abs(d) / weight.a_scale))
    return float(rhs), float(lhs)
