"""Effective dynamics of the soliton parameters in rescaled variables.

The reduced system is

    dA/dtau = 4 C**2 - b0(A, tau)
    dC/dtau = (1/3) C * d_A b0(A, tau)

integrated with an embedded Dormand-Prince 4(5) pair (scipy's RK45, the
ode45-equivalent) with dense output.  Integration stops either at tau_max
or at the exit time T*, the first time C leaves the band
[delta, 1/delta]; the exit is located by the solver's event root finder.

For time-independent b0 the quantity G = C**3 b0(A) - (12/5) C**5 is an
exact invariant of the system and serves as the integration oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .potentials import PotentialSpec

__all__ = [
    "ODEState",
    "ODETrajectory",
    "ode_rhs",
    "integrate",
    "physical_trajectory",
    "conserved_quantity",
]


@dataclass(frozen=True)
class ODEState:
    """Rescaled position A, scale C > 0 and time tau."""

    A: float
    C: float
    tau: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.C) and self.C > 0):
            raise ValueError(f"scale C must be positive, got {self.C}")


@dataclass
class ODETrajectory:
    """Dense samples of (tau, A, C), the exit time T* and band parameter."""

    tau: np.ndarray
    A: np.ndarray
    C: np.ndarray
    t_star: float
    delta: float
    _dense: object = None

    def evaluate(self, tau):
        """Evaluate the dense interpolant at times inside the solved span."""
        tau = np.asarray(tau, dtype=float)
        lo, hi = min(self.tau[0], self.tau[-1]), max(self.tau[0], self.tau[-1])
        if np.any(tau < lo - 1e-12) or np.any(tau > hi + 1e-12):
            raise ValueError("requested time outside the integrated span")
        out = self._dense(np.clip(tau, lo, hi))
        return out[0], out[1]


def ode_rhs(state: ODEState, b0: PotentialSpec) -> tuple[float, float]:
    """Right side (dA, dC) of the effective system at ``state``."""
    val = float(b0.b0(state.A, state.tau))
    slope = float(b0.b0(state.A, state.tau, x_order=1))
    return 4.0 * state.C**2 - val, state.C * slope / 3.0


def integrate(
    init: ODEState,
    b0: PotentialSpec,
    delta: float = 0.25,
    tau_max: float = 1.0,
    tol: float = 1e-10,
    n_samples: int = 401,
) -> ODETrajectory:
    """Integrate until min(tau_max, T*) and sample the dense solution.

    A negative ``tau_max`` integrates backward in time (useful for
    reversibility checks); the band-exit events remain active either way.
    """
    if not (0 < delta < 1):
        raise ValueError("delta must lie in (0, 1)")
    if not delta <= init.C <= 1.0 / delta:
        raise ValueError(f"initial scale {init.C} outside the band [{delta}, {1/delta}]")
    if tol <= 0 or tau_max == 0:
        raise ValueError("tol must be positive and tau_max nonzero")

    def rhs(t, y):
        st = ODEState(y[0], max(y[1], 1e-300), t)
        return ode_rhs(st, b0)

    def hit_lower(t, y):
        return y[1] - delta

    def hit_upper(t, y):
        return y[1] - 1.0 / delta

    hit_lower.terminal = True
    hit_lower.direction = -1.0
    hit_upper.terminal = True
    hit_upper.direction = 1.0

    sol = solve_ivp(
        rhs,
        (init.tau, init.tau + tau_max),
        [init.A, init.C],
        method="RK45",
        rtol=tol,
        atol=tol,
        dense_output=True,
        events=(hit_lower, hit_upper),
    )
    if sol.status == -1:
        raise RuntimeError(f"effective ODE integration failed: {sol.message}")

    t_star = math.inf
    t_end = init.tau + tau_max
    if sol.status == 1:
        hits = [te[0] for te in sol.t_events if te.size]
        t_star = min(hits) if tau_max > 0 else max(hits)
        t_end = t_star

    taus = np.linspace(init.tau, t_end, n_samples)
    ys = sol.sol(taus)
    return ODETrajectory(tau=taus, A=ys[0], C=ys[1], t_star=t_star, delta=delta, _dense=sol.sol)


def physical_trajectory(traj: ODETrajectory, h: float):
    """Rescale to the physical frame: t = tau/h, a = A/h, c = C."""
    if not 0.0 < h <= 1.0:
        raise ValueError(f"h must lie in (0, 1], got {h}")
    return traj.tau / h, traj.A / h, traj.C.copy()


def conserved_quantity(A, C, b0: PotentialSpec):
    """G = C**3 b0(A) - (12/5) C**5, invariant for time-independent b0."""
    A = np.asarray(A, dtype=float)
    C = np.asarray(C, dtype=float)
    return C**3 * np.asarray(b0.b0(A)) - 2.4 * C**5
