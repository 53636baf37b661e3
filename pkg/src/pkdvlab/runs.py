"""Run orchestration: simulation, fitting, diagnostics, ODE comparison.

The PDE is integrated in the rescaled frame (X = h x, S = h**3 t) where
the paper's example is posed; fits are performed on the rescaled snapshots
and converted to the common (X, T) frame, T = S/h**2, where the effective
ODE lives.  Diagnostics are assembled in the physical frame.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import diagnostics as diag
from .config import RunConfig, emit_config, parse_config
from .effective import ODEState, ODETrajectory, integrate
from .etdrk4 import SimulationResult, StepperConfig, simulate
from .fitting import PeakFit, RefitResult, orthogonality_refit, peak_fit
from .functionals import hamiltonian, momentum
from .grids import FieldState, quadrature, rescale_to_physical
from .solitons import SolitonParams, sample_eta_jet, sample_soliton

__all__ = [
    "FitRow",
    "SimRun",
    "CompareResult",
    "ConvergenceReport",
    "run_simulation",
    "compare_run",
    "convergence_study",
    "fit_slope",
]


@dataclass
class FitRow:
    """Per-snapshot fit record in the rescaled frame."""

    S: float
    a_tilde: float
    c_tilde: float
    a_refit: float
    c_refit: float
    iters: int
    res1: float
    res2: float


@dataclass
class SimRun:
    config: RunConfig
    potential: object
    grid: object
    snapshots: list
    fit_rows: list
    records: list = field(default_factory=list)
    dt: float = 0.0
    n_steps: int = 0

    @property
    def h(self) -> float:
        return self.config.potential_h

    def times_T(self) -> np.ndarray:
        return np.array([r.S for r in self.fit_rows]) / self.h**2

    def peak_AC(self):
        A = np.array([r.a_tilde for r in self.fit_rows])
        C = self.h * np.array([r.c_tilde for r in self.fit_rows])
        return A, C

    def refit_AC(self):
        A = np.array([r.a_refit for r in self.fit_rows])
        C = self.h * np.array([r.c_refit for r in self.fit_rows])
        return A, C


def _initial_field(cfg: RunConfig, grid) -> FieldState:
    h = cfg.potential_h
    p0 = SolitonParams(cfg.initial_a0, cfg.initial_c0 / h)
    fld = sample_soliton(grid, p0)
    if cfg.initial_noise_amplitude > 0:
        rng = np.random.default_rng(cfg.initial_noise_seed)
        coeffs = np.zeros(grid.n // 2 + 1, dtype=complex)
        m = max(4, grid.n // 16)
        j = np.arange(1, m)
        coeffs[1:m] = (rng.standard_normal(m - 1) + 1j * rng.standard_normal(m - 1)) / (1.0 + j)
        noise = np.fft.irfft(coeffs, n=grid.n)
        noise /= max(np.max(np.abs(noise)), 1e-300)
        fld = FieldState(grid, fld.values + cfg.initial_noise_amplitude * noise, fld.time)
    return fld


def run_simulation(cfg: RunConfig, with_diagnostics: bool = True) -> SimRun:
    """Integrate the configured run and fit every snapshot."""
    cfg.validate()
    grid = cfg.grid()
    pot = cfg.potential()
    h = cfg.potential_h
    stepper = StepperConfig(
        dt=cfg.dt(),
        dealias=cfg.stepper_dealias,
        contour_points=cfg.stepper_contour_points,
        snapshot_stride=cfg.snapshot_stride(),
    )
    result: SimulationResult = simulate(_initial_field(cfg, grid), pot, stepper, cfg.s_end())

    # Fits run in the physical frame, where the scale c stays O(1) for
    # every h and the absolute orthogonality tolerance is meaningful; the
    # rescaled-frame peak fit is recorded as is.
    c_band = (cfg.ode_delta, 1.0 / cfg.ode_delta)
    rows = []
    refits = []
    for snap in result.snapshots:
        pk: PeakFit = peak_fit(snap)
        phys = rescale_to_physical(snap, h)
        seed = SolitonParams(pk.a_tilde / h, h * pk.c_tilde)
        rf: RefitResult = orthogonality_refit(phys, seed, tol=cfg.fit_tol, c_band=c_band)
        refits.append(rf)
        rows.append(
            FitRow(
                S=snap.time,
                a_tilde=pk.a_tilde,
                c_tilde=pk.c_tilde,
                a_refit=h * rf.params.a,
                c_refit=rf.params.c / h,
                iters=rf.iters,
                res1=rf.residuals[0],
                res2=rf.residuals[1],
            )
        )

    run = SimRun(
        config=cfg,
        potential=pot,
        grid=grid,
        snapshots=result.snapshots,
        fit_rows=rows,
        dt=result.dt,
        n_steps=result.n_steps,
    )
    if with_diagnostics:
        run.records = build_diagnostics(run, refits)
    return run


def build_diagnostics(run: SimRun, refits) -> list:
    """Physical-frame diagnostics records, one per snapshot."""
    cfg = run.config
    h = run.h
    pot = run.potential
    eps = cfg.eps()

    times = np.array([s.time for s in run.snapshots]) / h**3
    a_phys = np.array([r.params.a for r in refits])
    c_phys = np.array([r.params.c for r in refits])

    phys0 = rescale_to_physical(run.snapshots[0], h)
    wrap_period = phys0.grid.length
    if len(times) >= 3:
        res_a, res_c = diag.parameter_residuals(times, a_phys, c_phys, pot, wrap_period=wrap_period)
        cons = diag.conservation_residuals(
            [rescale_to_physical(s, h) for s in run.snapshots], pot, frame="physical"
        )
        p_res = cons["p_residual"]
    else:
        res_a = res_c = p_res = np.zeros(len(times))

    records = []
    for i, (snap, rf) in enumerate(zip(run.snapshots, refits)):
        u = rescale_to_physical(snap, h)
        p = rf.params
        v = rf.v
        jet = sample_eta_jet(u.grid, p)
        d = u.grid.wrap(u.grid.x, p.a)
        weight = diag.VirialWeight.build(u.grid, p.a, cfg.diagnostics_a_scale)
        records.append(
            diag.DiagnosticsRecord(
                time=times[i],
                P=momentum(u),
                H=hamiltonian(u, pot, t=times[i], frame="physical"),
                a=p.a,
                c=p.c,
                h1_norm_v=diag.h1_norm(v),
                weighted_h1_v=diag.weighted_h1(v, p.a, eps),
                orth1=quadrature(u.grid, v.values * jet.eta),
                orth2=quadrature(u.grid, v.values * d * jet.eta),
                energy_E=diag.energy_functional(v, p),
                virial_psi_v2=diag.virial_quantity(v, weight),
                res_a=res_a[i],
                res_c=res_c[i],
                momentum_law_residual=p_res[i],
            )
        )
    return records


@dataclass
class CompareResult:
    """PDE fit trajectories against the effective ODE in the (X, T) frame."""

    run: SimRun
    trajectory: ODETrajectory
    T: np.ndarray
    A_peak: np.ndarray
    C_peak: np.ndarray
    A_refit: np.ndarray
    C_refit: np.ndarray
    A_ode: np.ndarray
    C_ode: np.ndarray

    def sup_errors(self) -> dict:
        return {
            "A_peak": float(np.max(np.abs(self.A_peak - self.A_ode))),
            "C_peak": float(np.max(np.abs(self.C_peak - self.C_ode))),
            "A_refit": float(np.max(np.abs(self.A_refit - self.A_ode))),
            "C_refit": float(np.max(np.abs(self.C_refit - self.C_ode))),
        }

    def terminal_errors(self) -> dict:
        return {
            "A_refit": float(abs(self.A_refit[-1] - self.A_ode[-1])),
            "C_refit": float(abs(self.C_refit[-1] - self.C_ode[-1])),
        }


def effective_trajectory(cfg: RunConfig) -> ODETrajectory:
    return integrate(
        ODEState(cfg.initial_a0, cfg.initial_c0),
        cfg.potential(),
        delta=cfg.ode_delta,
        tau_max=max(cfg.run_k_horizon, 1e-12),
        tol=cfg.ode_tol,
    )


def compare_run(cfg: RunConfig, run: SimRun | None = None) -> CompareResult:
    """Run (or reuse) a simulation and overlay it with the effective ODE."""
    if run is None:
        run = run_simulation(cfg, with_diagnostics=False)
    traj = effective_trajectory(cfg)
    T = run.times_T()
    if math.isfinite(traj.t_star):
        keep = T <= traj.t_star + 1e-12
        T = T[keep]
    A_pk, C_pk = run.peak_AC()
    A_rf, C_rf = run.refit_AC()
    n = T.size
    A_ode, C_ode = traj.evaluate(T)
    return CompareResult(
        run=run,
        trajectory=traj,
        T=T,
        A_peak=A_pk[:n],
        C_peak=C_pk[:n],
        A_refit=A_rf[:n],
        C_refit=C_rf[:n],
        A_ode=A_ode,
        C_ode=C_ode,
    )


def fit_slope(hs, errors):
    """OLS slope of log(err) vs log(h) with a 95% confidence half-width."""
    x = np.log(np.asarray(hs, dtype=float))
    y = np.log(np.asarray(errors, dtype=float))
    n = x.size
    if n < 2:
        raise ValueError("need at least two points for a slope")
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = ym - slope * xm
    if n > 2:
        resid = y - (intercept + slope * x)
        s2 = float(np.sum(resid**2) / (n - 2))
        stderr = math.sqrt(s2 / sxx)
        from scipy.stats import t as tdist

        half = float(tdist.ppf(0.975, n - 2) * stderr)
    else:
        half = math.inf
    return slope, half


@dataclass
class ConvergenceReport:
    """Errors against the effective ODE across an h sweep plus fitted slopes."""

    h_values: list
    errors: dict  # name -> list of per-h errors (None for failed runs)
    slopes: dict  # name -> (slope, ci_half_width)
    failures: dict  # h -> error message

    def to_json_dict(self) -> dict:
        return {
            "h_values": list(self.h_values),
            "errors": self.errors,
            "slopes": {k: {"slope": v[0], "ci95_half_width": v[1]} for k, v in self.slopes.items()},
            "failures": {repr(k): v for k, v in self.failures.items()},
        }


_ERROR_KEYS = ("A_peak", "C_peak", "A_refit", "C_refit", "v_h1_sup", "v_weighted_sup")


def _one_h_errors(cfg: RunConfig) -> dict:
    run = run_simulation(cfg, with_diagnostics=True)
    comp = compare_run(cfg, run=run)
    out = dict(comp.sup_errors())
    out["v_h1_sup"] = float(max(r.h1_norm_v for r in run.records))
    out["v_weighted_sup"] = float(max(r.weighted_h1_v for r in run.records))
    out["terminal"] = comp.terminal_errors()
    return out


def _converge_worker(cfg_text: str) -> dict:
    return _one_h_errors(parse_config(cfg_text))


def convergence_study(base_cfg: RunConfig, h_values, workers: int | None = None) -> ConvergenceReport:
    """Sweep h, collect PDE-vs-ODE errors and fit log-log slopes.

    Runs are independent; with ``workers`` > 1 they execute in separate
    processes and the collected numbers are identical to a serial sweep.
    Failed runs are recorded and skipped when fitting slopes.
    """
    h_values = list(h_values)
    if len(h_values) < 3:
        raise ValueError("need at least 3 h values for a convergence study")
    cfgs = [base_cfg.with_overrides(potential_h=float(h)).validate() for h in h_values]
    results: list[dict | None] = [None] * len(h_values)
    failures: dict = {}
    if workers is not None and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futs = [pool.submit(_converge_worker, emit_config(c)) for c in cfgs]
            for i, fut in enumerate(futs):
                try:
                    results[i] = fut.result()
                except Exception as exc:  # noqa: BLE001 - record and continue
                    failures[h_values[i]] = f"{type(exc).__name__}: {exc}"
    else:
        for i, c in enumerate(cfgs):
            try:
                results[i] = _one_h_errors(c)
            except Exception as exc:  # noqa: BLE001
                failures[h_values[i]] = f"{type(exc).__name__}: {exc}"

    errors = {key: [r[key] if r is not None else None for r in results] for key in _ERROR_KEYS}
    slopes = {}
    for key in _ERROR_KEYS:
        hs = [h for h, r in zip(h_values, results) if r is not None and r[key] > 0]
        es = [r[key] for r in results if r is not None and r[key] > 0]
        if len(hs) >= 2:
            slopes[key] = fit_slope(hs, es)
    return ConvergenceReport(h_values=h_values, errors=errors, slopes=slopes, failures=failures)
