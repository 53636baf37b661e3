"""Run configuration: a flat, diffable ``key = value`` text format.

Keys are dotted section names (``potential.h``, ``grid.n``, ...).  Every
field has a default; parsing unknown keys or malformed values raises
:class:`ConfigError`.  ``emit`` produces a canonical sorted rendering that
round-trips losslessly (floats via ``repr``), and whose SHA-256 identifies
the run in the manifest.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace

import numpy as np

from .grids import GridSpec
from .potentials import PotentialSpec

__all__ = ["ConfigError", "RunConfig", "parse_config", "parse_config_file", "emit_config", "config_hash"]


class ConfigError(ValueError):
    """Invalid configuration input (bad key, bad value, failed validation)."""


@dataclass
class RunConfig:
    potential_family: str = "sinusoidal"
    potential_amplitude: float = 8.0
    potential_h: float = 0.2
    potential_width: float = 1.0
    potential_envelope_omega: float | None = None
    run_k_horizon: float = 1.0
    initial_a0: float = 2.5
    initial_c0: float = 1.0
    initial_noise_amplitude: float = 0.0
    initial_noise_seed: int = 0
    grid_n: int = 1024
    grid_length: float = 8.0 * np.pi
    grid_origin: float = 0.0
    stepper_dt: float = 0.0  # <= 0 selects the resolution-based default
    stepper_dealias: bool = True
    stepper_contour_points: int = 32
    stepper_snapshot_stride: int = 0  # <= 0 targets ~120 snapshots
    diagnostics_eps: float = 0.0  # <= 0 selects 0.5*min(c0, 1)
    diagnostics_a_scale: float = 10.0
    ode_delta: float = 0.25
    ode_tol: float = 1e-10
    fit_tol: float = 1e-9

    # -- derived objects -------------------------------------------------

    def potential(self) -> PotentialSpec:
        try:
            return PotentialSpec(
                family=self.potential_family,
                amplitude=self.potential_amplitude,
                h=self.potential_h,
                width=self.potential_width,
                envelope_omega=self.potential_envelope_omega,
            )
        except ValueError as exc:
            raise ConfigError(str(exc))

    def grid(self) -> GridSpec:
        try:
            return GridSpec(self.grid_n, self.grid_length, self.grid_origin)
        except ValueError as exc:
            raise ConfigError(str(exc))

    def dt(self) -> float:
        if self.stepper_dt > 0:
            return self.stepper_dt
        return 0.1 * (self.grid_length / self.grid_n) ** 3

    def s_end(self) -> float:
        return self.run_k_horizon * self.potential_h**2

    def n_steps(self) -> int:
        s = self.s_end()
        return 0 if s == 0 else max(1, int(np.ceil(s / self.dt() - 1e-12)))

    def snapshot_stride(self) -> int:
        if self.stepper_snapshot_stride > 0:
            return self.stepper_snapshot_stride
        return max(1, round(self.n_steps() / 120))

    def eps(self) -> float:
        if self.diagnostics_eps > 0:
            return self.diagnostics_eps
        return 0.5 * min(self.initial_c0, 1.0)

    def validate(self) -> "RunConfig":
        self.potential()
        self.grid()
        if self.run_k_horizon < 0:
            raise ConfigError("run.k_horizon must be nonnegative")
        if self.initial_c0 <= 0:
            raise ConfigError("initial.c0 must be positive")
        if not 0 < self.ode_delta < 1:
            raise ConfigError("ode.delta must lie in (0, 1)")
        if not self.ode_delta <= self.initial_c0 <= 1.0 / self.ode_delta:
            raise ConfigError("initial.c0 must lie inside the [delta, 1/delta] band")
        if self.ode_tol <= 0 or self.fit_tol <= 0:
            raise ConfigError("tolerances must be positive")
        if self.stepper_contour_points < 16 or self.stepper_contour_points % 2:
            raise ConfigError("stepper.contour_points must be an even integer >= 16")
        if self.initial_noise_amplitude < 0:
            raise ConfigError("initial.noise_amplitude must be nonnegative")
        if self.diagnostics_a_scale <= 0:
            raise ConfigError("diagnostics.a_scale must be positive")
        return self

    def with_overrides(self, **kwargs) -> "RunConfig":
        return replace(self, **kwargs)


def _parse_bool(text: str) -> bool:
    if text.lower() in ("true", "1", "yes", "on"):
        return True
    if text.lower() in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_optional_float(text: str):
    return None if text.lower() == "none" else float(text)


_KEYS: dict[str, tuple[str, object]] = {
    "potential.family": ("potential_family", str),
    "potential.amplitude": ("potential_amplitude", float),
    "potential.h": ("potential_h", float),
    "potential.width": ("potential_width", float),
    "potential.envelope_omega": ("potential_envelope_omega", _parse_optional_float),
    "run.k_horizon": ("run_k_horizon", float),
    "initial.a0": ("initial_a0", float),
    "initial.c0": ("initial_c0", float),
    "initial.noise_amplitude": ("initial_noise_amplitude", float),
    "initial.noise_seed": ("initial_noise_seed", int),
    "grid.n": ("grid_n", int),
    "grid.length": ("grid_length", float),
    "grid.origin": ("grid_origin", float),
    "stepper.dt": ("stepper_dt", float),
    "stepper.dealias": ("stepper_dealias", _parse_bool),
    "stepper.contour_points": ("stepper_contour_points", int),
    "stepper.snapshot_stride": ("stepper_snapshot_stride", int),
    "diagnostics.eps": ("diagnostics_eps", float),
    "diagnostics.a_scale": ("diagnostics_a_scale", float),
    "ode.delta": ("ode_delta", float),
    "ode.tol": ("ode_tol", float),
    "fit.tol": ("fit_tol", float),
}

_ATTR_TO_KEY = {attr: key for key, (attr, _) in _KEYS.items()}


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    cfg = base or RunConfig()
    overrides = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        attr, conv = _KEYS[key]
        try:
            overrides[attr] = conv(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}")
    return cfg.with_overrides(**overrides).validate()


def parse_config_file(path, base: RunConfig | None = None) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    return parse_config(text, base)


def _render(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_config(cfg: RunConfig) -> str:
    lines = [f"{key} = {_render(getattr(cfg, attr))}" for key, (attr, _) in sorted(_KEYS.items())]
    return "\n".join(lines) + "\n"


def config_hash(cfg: RunConfig) -> str:
    return hashlib.sha256(emit_config(cfg).encode()).hexdigest()
