"""Slowly varying potentials b(x, t) = b0(h*x, h*t).

The potential is drawn from a small closed family so that all derivatives
needed by the solver and diagnostics (b, b_x, b_xxx, b_t) are exact:

* ``zero``        b0 = 0
* ``constant``    b0 = amplitude
* ``sinusoidal``  b0 = amplitude * sin(X)
* ``bump``        b0 = amplitude * exp(1 - 1/(1 - (X/W)**2)) on |X| < W

A time dependence can be switched on through a multiplicative envelope
cos(omega * T) in the slow time T = h*t; the default is time independent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["PotentialSpec"]

_FAMILIES = ("zero", "constant", "sinusoidal", "bump")


def _bump_profile(s: np.ndarray, order: int) -> np.ndarray:
    """Derivatives of exp(1 - 1/(1 - s**2)), supported on |s| < 1."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    si = s[inside]
    u = 1.0 / (1.0 - si * si)
    g = np.exp(1.0 - u)
    if order == 0:
        out[inside] = g
        return out
    u1 = 2.0 * si * u * u
    if order == 1:
        out[inside] = -u1 * g
        return out
    u2 = 2.0 * u * u + 8.0 * si * si * u**3
    if order == 2:
        out[inside] = (u1 * u1 - u2) * g
        return out
    u3 = 24.0 * si * u**3 + 48.0 * si**3 * u**4
    if order == 3:
        out[inside] = (-u3 + 3.0 * u1 * u2 - u1**3) * g
        return out
    raise ValueError(f"unsupported derivative order {order}")


@dataclass(frozen=True)
class PotentialSpec:
    """One member of the closed potential family, with scale parameter h.

    ``envelope_omega`` switches on the multiplicative time envelope
    cos(omega * T); ``None`` keeps the potential time independent.
    """

    family: str = "zero"
    amplitude: float = 0.0
    h: float = 1.0
    width: float = 1.0
    envelope_omega: float | None = None

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown potential family {self.family!r}; choose from {_FAMILIES}")
        if not 0.0 < self.h <= 1.0:
            raise ValueError(f"h must lie in (0, 1], got {self.h}")
        if self.family == "bump" and self.width <= 0:
            raise ValueError("bump width must be positive")

    @property
    def time_dependent(self) -> bool:
        return self.envelope_omega is not None

    def _spatial(self, X, order: int) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if self.family == "zero":
            return np.zeros_like(X)
        if self.family == "constant":
            return np.full_like(X, self.amplitude) if order == 0 else np.zeros_like(X)
        if self.family == "sinusoidal":
            cycle = (np.sin, np.cos, lambda z: -np.sin(z), lambda z: -np.cos(z))
            return self.amplitude * cycle[order % 4](X)
        w = self.width
        return self.amplitude * _bump_profile(X / w, order) / w**order

    def _envelope(self, T, t_order: int = 0):
        if self.envelope_omega is None:
            return 1.0 if t_order == 0 else 0.0
        om = self.envelope_omega
        phase = om * np.asarray(T, dtype=float)
        if t_order == 0:
            return np.cos(phase)
        return -om * np.sin(phase)

    def b0(self, X, T=0.0, x_order: int = 0, t_order: int = 0) -> np.ndarray:
        """Slow-variable profile b0(X, T) and its X/T derivatives."""
        return self._spatial(X, x_order) * self._envelope(T, t_order)

    # -- physical frame: b(x, t) = b0(h x, h t) --------------------------

    def physical(self, x, t=0.0, x_order: int = 0, t_order: int = 0) -> np.ndarray:
        scale = self.h ** (x_order + t_order)
        return scale * self.b0(self.h * np.asarray(x, dtype=float), self.h * t, x_order, t_order)

    # -- solver frame: B(X, S) = h**-2 b0(X, S/h**2) ----------------------

    def solver(self, X, S=0.0, x_order: int = 0, t_order: int = 0) -> np.ndarray:
        scale = self.h ** (-2 - 2 * t_order)
        return scale * self.b0(X, S / self.h**2, x_order, t_order)
