from __future__ import annotations
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from ..core.energy import EnergyReport
from ..core.errors import DomainError
from ..core.paircorr import PairCorrCurve

plt.rcParams["svg.fonttype"] = "none"
plt.rcParams["svg.hashsalt"] = "ppclab"


def _save(fig, path: str | Path) -> None:
    try:
        fig.savefig(path, format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)


def _plot_curve(curve: PairCorrCurve, path: str | Path) -> None:
    if curve.s_grid.size == 0:
        raise DomainError("cannot plot an empty curve")
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.set_gid("axes")
    ax.plot(curve.s_grid, curve.r2, marker="o", label="empirical", gid="curve-empirical")
    ax.plot(
        curve.s_grid,
        curve.reference,
        linestyle="--",
        label=f"(2s)^{curve.d}" if curve.norm.value == "sup" else "ball volume",
        gid="curve-reference",
    )
    ax.set_xlabel("s")
    ax.set_ylabel("R2")
    ax.set_title(f"pair correlation, N={curve.N}, d={curve.d}, {curve.norm.value}")
    ax.legend()
    _save(fig, path)


def _plot_report(report: EnergyReport, path: str | Path) -> None:
    if not report.Ns:
        raise DomainError("cannot plot an empty report")
    Ns = np.asarray(report.Ns, dtype=np.float64)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.set_gid("axes")
    ax.loglog(Ns, report.counts, linestyle="none", marker="o", label="counts", gid="curve-counts")
    fitted = np.exp(report.intercept) * Ns**report.slope
    ax.loglog(
        Ns,
        fitted,
        label=f"slope={report.slope:.3f}±{report.slope_stderr:.3f}",
        gid="curve-fit",
    )
    ax.set_xlabel("N")
    ax.set_ylabel("energy")
    ax.legend()
    _save(fig, path)


def emit_plot(obj: PairCorrCurve | EnergyReport, path: str | Path) -> Path:
    """
    Write a standalone SVG of a pair correlation curve or an energy report.

    :raises DomainError: on empty data.
    :raises OSError: when `path` cannot be written.
    """
    if isinstance(obj, PairCorrCurve):
        _plot_curve(obj, path)
    elif isinstance(obj, EnergyReport):
        _plot_report(obj, path)
    else:
        raise TypeError(f"cannot plot {type(obj).__name__}")
    return Path(path)
