"""Static figure emission (SVG) for run artifacts.

Figures are rendered with the Agg backend and written as SVG next to the
delimited data they visualize.  The SVG hash salt and metadata are pinned
so repeated renders of the same data are reproducible.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "pkdvlab"

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "save_svg",
    "waterfall_figure",
    "compare_figure",
    "convergence_figure",
    "spectrum_figure",
]


def save_svg(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def waterfall_figure(snapshots, max_lines: int = 60, title: str = "evolution"):
    """Stacked profiles V(X, S) with vertical offsets increasing in S."""
    take = snapshots
    if len(snapshots) > max_lines:
        idx = np.linspace(0, len(snapshots) - 1, max_lines).round().astype(int)
        take = [snapshots[i] for i in idx]
    amp = max(float(np.max(np.abs(s.values))) for s in take)
    offset = 0.8 * amp
    fig, ax = plt.subplots(figsize=(7, 6))
    for i, s in enumerate(take):
        ax.plot(s.grid.x, s.values + i * offset, lw=0.7, color="navy")
    ax.set_xlabel("X")
    ax.set_ylabel("V(X, S) + offset")
    ax.set_title(title)
    fig.tight_layout()
    return fig


def compare_figure(comp):
    """Two panels: T vs position and T vs scale, fits against the ODE."""
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 7), sharex=True)
    ax1.plot(comp.T, comp.A_peak, color="tab:blue", lw=1.5, label="PDE peak fit")
    ax1.plot(comp.T, comp.A_refit, color="tab:cyan", lw=1.0, ls="--", label="PDE refit")
    ax1.plot(comp.T, comp.A_ode, color="tab:green", lw=1.5, label="effective ODE")
    ax1.set_ylabel("A(T)")
    ax1.legend(loc="best", fontsize=8)
    ax2.plot(comp.T, comp.C_peak, color="tab:blue", lw=1.5)
    ax2.plot(comp.T, comp.C_refit, color="tab:cyan", lw=1.0, ls="--")
    ax2.plot(comp.T, comp.C_ode, color="tab:green", lw=1.5)
    ax2.set_xlabel("T")
    ax2.set_ylabel("C(T)")
    fig.tight_layout()
    return fig


def convergence_figure(report):
    fig, ax = plt.subplots(figsize=(6, 5))
    hs = np.asarray(report.h_values, dtype=float)
    for key, errs in report.errors.items():
        pts = [(h, e) for h, e in zip(hs, errs) if e is not None and e > 0]
        if not pts:
            continue
        hh, ee = zip(*pts)
        label = key
        if key in report.slopes:
            label += f" (slope {report.slopes[key][0]:.2f})"
        ax.loglog(hh, ee, "o-", label=label, lw=1.0, ms=4)
    ax.set_xlabel("h")
    ax.set_ylabel("sup error")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    return fig


def spectrum_figure(eigenvalues):
    fig, ax = plt.subplots(figsize=(6, 4))
    vals = np.asarray(eigenvalues, dtype=float)
    ax.plot(np.arange(vals.size), vals, "o", ms=4)
    for ref in (-5.0, 0.0, 3.0, 4.0):
        ax.axhline(ref, color="gray", lw=0.6, ls=":" if ref == 4.0 else "-")
    ax.set_xlabel("index")
    ax.set_ylabel("eigenvalue")
    fig.tight_layout()
    return fig
