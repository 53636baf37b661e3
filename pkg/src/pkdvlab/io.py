"""Artifact readers/writers: CSV schemas, JSON reports, run manifest.

All CSV files are comma separated with a single ``#``-prefixed header line
naming the columns; floats are rendered as ``%.17e`` so reruns of the same
configuration are byte identical.  Snapshot rows follow the documented
order (S, N, L, origin, v0..v{N-1}) with values at X ascending from the
origin.
"""

from __future__ import annotations

import hashlib
import json
import math
import os

import numpy as np

from .config import RunConfig, config_hash, emit_config
from .diagnostics import DiagnosticsRecord
from .effective import ODETrajectory
from .grids import FieldState, GridSpec

__all__ = [
    "write_snapshots_csv",
    "read_snapshots_csv",
    "write_fit_csv",
    "write_diagnostics_csv",
    "write_compare_csv",
    "write_ode_csv",
    "write_json",
    "sha256_file",
    "write_manifest",
]

_FMT = "%.17e"


def _write_table(path, header: list[str], rows: np.ndarray):
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# " + ",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_FMT % x for x in row) + "\n")


def write_snapshots_csv(path, snapshots: list[FieldState]):
    g = snapshots[0].grid
    header = ["S", "N", "L", "origin"] + [f"v{i}" for i in range(g.n)]
    rows = [np.concatenate([[s.time, s.grid.n, s.grid.length, s.grid.origin], s.values]) for s in snapshots]
    _write_table(path, header, rows)


def read_snapshots_csv(path, row: int = -1) -> FieldState:
    """Read one snapshot record back into a FieldState."""
    try:
        data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    except (OSError, ValueError) as exc:
        raise ValueError(f"cannot parse snapshot file {path}: {exc}")
    if data.shape[0] == 0:
        raise ValueError(f"snapshot file {path} holds no rows")
    try:
        rec = data[row]
    except IndexError:
        raise ValueError(f"snapshot row {row} out of range (file has {data.shape[0]} rows)")
    s, n, length, origin = rec[0], int(rec[1]), rec[2], rec[3]
    values = rec[4:]
    if values.size != n:
        raise ValueError(f"snapshot row declares N={n} but carries {values.size} values")
    return FieldState(GridSpec(n, length, origin), values, s)


def write_fit_csv(path, fit_rows):
    header = ["S", "a_tilde", "c_tilde", "a_refit", "c_refit", "iters", "res1", "res2"]
    rows = [
        [r.S, r.a_tilde, r.c_tilde, r.a_refit, r.c_refit, r.iters, r.res1, r.res2]
        for r in fit_rows
    ]
    _write_table(path, header, rows)


def write_diagnostics_csv(path, records: list[DiagnosticsRecord]):
    _write_table(path, DiagnosticsRecord.header(), [r.row() for r in records])


def write_compare_csv(path, comp):
    header = ["T", "A_pde", "C_pde", "A_refit", "C_refit", "A_ode", "C_ode"]
    rows = np.column_stack(
        [comp.T, comp.A_peak, comp.C_peak, comp.A_refit, comp.C_refit, comp.A_ode, comp.C_ode]
    )
    _write_table(path, header, rows)


def write_ode_csv(path, traj: ODETrajectory):
    _write_table(path, ["tau", "A", "C"], np.column_stack([traj.tau, traj.A, traj.C]))
    meta = {
        "t_star": traj.t_star if math.isfinite(traj.t_star) else "inf",
        "delta": traj.delta,
    }
    write_json(str(path) + ".meta.json", meta)


def write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(outdir, cfg: RunConfig, artifact_names: list[str], extra: dict | None = None):
    """Record the canonical config, its hash, and artifact digests.

    Identical config hash implies identical CSV/JSON artifacts; SVG figures
    are supplementary and hashed informationally.
    """
    manifest = {
        "config": emit_config(cfg),
        "config_sha256": config_hash(cfg),
        "artifacts": {
            name: sha256_file(os.path.join(outdir, name)) for name in sorted(artifact_names)
        },
    }
    if extra:
        manifest["extra"] = extra
    write_json(os.path.join(outdir, "manifest.json"), manifest)
