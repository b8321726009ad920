from __future__ import annotations
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable

import numpy as np

from ..core.bounds import (
    exponent_verdict,
    joint_threshold,
    power_energy_exponent,
    same_component_threshold,
)
from ..core.energy import EnergyReport, energy_report, watt_ratio
from ..core.harmonic import MeasureSpec, SelbergCheck, check_selberg, mu_sample, stream
from ..core.paircorr import PairCorrCurve, mean_curve, r2_curve
from ..core.sequences import Family, SequenceMatrix, build_sequence
from ..core.torus import NormKind, dilate_frac
from ..core.utils import parallel_map
from ..core.variance import variance_decay
from ..log import logger
from .config import ExperimentConfig, TaskType
from .encoding import (
    CsvEncoder,
    JsonEncoder,
    alpha_table,
    energy_sidecar,
    energy_table,
    paircorr_table,
    selberg_table,
    variance_table,
    watt_table,
)


@dataclass
class TaskResult:
    """
    Everything a task emits, held in memory until the runner writes it.

    :param texts: encoded CSV and JSON documents by file name.
    :param plots: curves and reports to render, by file name.
    """

    task: TaskType
    texts: dict[str, str] = field(default_factory=dict)
    plots: dict[str, PairCorrCurve | EnergyReport] = field(default_factory=dict)


@dataclass
class RunContext:
    config: ExperimentConfig
    threads: int | None = None

    @property
    def required_rows(self) -> int:
        """Rows the listed tasks read from the sequence."""
        c = self.config
        rows = max(c.N_grid, default=1)
        if TaskType.ENERGY in c.tasks and c.window == "block":
            rows = 2 * rows
        if TaskType.WATT_CHECK in c.tasks and c.watt.omega == "sequence":
            rows = max(rows, max(c.watt.A))
        return rows

    @cached_property
    def sequence(self) -> SequenceMatrix:
        spec = self.config.sequence
        logger.info(f"generating {spec.family} sequence with {self.required_rows} rows")
        return build_sequence(spec.family, self.required_rows, spec.n0, **spec.params)

    def dilations(self) -> np.ndarray:
        """Dilation vectors for the pair correlation task, one per row."""
        alpha = self.config.alpha
        if alpha.measure == "fixed":
            return np.asarray(alpha.values, dtype=np.float64)
        spec = MeasureSpec.uniform(self.config.dim, alpha.gamma)
        return np.stack(
            [mu_sample(spec, 1, rng=stream(self.config.seed, i))[0] for i in range(alpha.samples)]
        )


def paircorr_task(ctx: RunContext) -> TaskResult:
    c = ctx.config
    norm = NormKind(c.norm)
    alphas = ctx.dilations()
    curves = {}
    for N in c.N_grid:
        x = ctx.sequence.head(N)
        logger.info(f"pair correlation {N=} over {len(alphas)} dilations")
        per_alpha = parallel_map(
            lambda a: r2_curve(dilate_frac(x, a), c.s_grid, norm, threads=1), alphas, ctx.threads
        )
        curves[N] = (per_alpha, mean_curve(per_alpha))

    result = TaskResult(TaskType.PAIRCORR)
    result.texts["paircorr.csv"] = CsvEncoder.encode(paircorr_table(curves))
    result.texts["paircorr_alphas.csv"] = CsvEncoder.encode(alpha_table({N: alphas for N in c.N_grid}))
    for N, (_, mean) in curves.items():
        result.plots[f"paircorr_N{N}.svg"] = mean
    return result


def _energy_annotations(ctx: RunContext, report: EnergyReport) -> dict[str, Any]:
    d, k = ctx.sequence.d, len(report.subset)
    bound = joint_threshold(d, k)
    out = {
        "joint_threshold": bound,
        "same_component_threshold": same_component_threshold(d),
        "below_joint_threshold": exponent_verdict(report.slope, report.slope_stderr, bound),
    }
    if ctx.sequence.meta.family == Family.POWER:
        thetas = np.asarray(ctx.config.sequence.thetas)[report.subset]
        out["predicted_exponent"] = power_energy_exponent(thetas)
    return out


def energy_task(ctx: RunContext) -> TaskResult:
    c = ctx.config
    report = energy_report(ctx.sequence, c.thresholds, c.N_grid, c.subset, c.window, ctx.threads)
    logger.info(f"energy exponent {report.slope:.3f} +- {report.slope_stderr:.3f}")
    result = TaskResult(TaskType.ENERGY)
    result.texts["energy.csv"] = CsvEncoder.encode(energy_table(report))
    result.texts["energy.json"] = JsonEncoder.encode(
        energy_sidecar(report, **_energy_annotations(ctx, report))
    )
    result.plots["energy.svg"] = report
    return result


def variance_task(ctx: RunContext) -> TaskResult:
    c = ctx.config
    estimates, decay = [], []
    for s in c.s_grid:
        report = variance_decay(
            ctx.sequence, c.N_grid, s, c.r, c.samples, c.seed, gamma=c.alpha.gamma, threads=ctx.threads
        )
        estimates.extend(report.estimates)
        decay.append(
            {
                "s": s,
                "slope": report.slope,
                "slope_stderr": report.slope_stderr,
                "decreasing": report.decreasing(),
            }
        )
    result = TaskResult(TaskType.VARIANCE)
    result.texts["variance.csv"] = CsvEncoder.encode(variance_table(estimates))
    result.texts["variance.json"] = JsonEncoder.encode({"estimates": estimates, "decay": decay})
    return result


def selberg_checks(
    triples: int, seed: int, max_degree: int, grid: int, tensor_points: int
) -> list[SelbergCheck]:
    """Random (K, s, scale) triples with 2s/scale < 1, each checked on its own stream."""
    rng = stream(seed, 0)
    checks = []
    for t in range(triples):
        K = int(rng.integers(1, max_degree + 1))
        scale = float(rng.uniform(2.0, 100.0))
        s = float(rng.uniform(0.01, 0.49)) * scale
        check = check_selberg(K, s, scale, grid, tensor_points, rng=stream(seed, t + 1))
        if not check.passed():
            logger.warning(f"polynomial check failed for {K=} {s=} {scale=}: {check}")
        checks.append(check)
    return checks


def selberg_task(ctx: RunContext) -> TaskResult:
    c = ctx.config
    checks = selberg_checks(
        c.selberg.triples, c.seed, c.selberg.max_degree, c.selberg.grid, c.selberg.tensor_points
    )
    result = TaskResult(TaskType.SELBERG_CHECK)
    result.texts["selberg.csv"] = CsvEncoder.encode(selberg_table(checks))
    return result


def watt_task(ctx: RunContext) -> TaskResult:
    w = ctx.config.watt
    A = np.asarray(w.A, dtype=np.int64)
    if w.omega == "sequence":
        table = ctx.sequence.values[A - 1]
    else:
        table = A.astype(np.float64).reshape(-1, 1)
    rows = []
    for delta in w.deltas:
        for M in w.Ms:
            diag = watt_ratio(A, table, [delta] * table.shape[1], M, threads=ctx.threads)
            logger.info(f"solution count {delta=} {M=}: V={diag.V} ratio={diag.ratio:.4f}")
            rows.append((delta, M, diag))
    result = TaskResult(TaskType.WATT_CHECK)
    result.texts["watt.csv"] = CsvEncoder.encode(watt_table(rows))
    return result


TASKS: dict[TaskType, Callable[[RunContext], TaskResult]] = {
    TaskType.PAIRCORR: paircorr_task,
    TaskType.ENERGY: energy_task,
    TaskType.VARIANCE: variance_task,
    TaskType.SELBERG_CHECK: selberg_task,
    TaskType.WATT_CHECK: watt_task,
}
