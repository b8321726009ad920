from __future__ import annotations
from abc import ABC
from dataclasses import asdict, dataclass, field, is_dataclass
from enum import Enum
from typing import Any
import csv
import io
import json

import numpy as np

from ..core.energy import EnergyReport, WattDiagnostic
from ..core.harmonic import SelbergCheck
from ..core.paircorr import PairCorrCurve
from ..core.torus import NormKind
from ..core.variance import VarianceEstimate


@dataclass
class Table:
    """A header and rows of numbers or strings, the unit of CSV output."""

    header: list[str]
    rows: list[list[Any]] = field(default_factory=list)

    def column(self, name: str) -> list[Any]:
        i = self.header.index(name)
        return [row[i] for row in self.rows]


def format_number(v: Any) -> str:
    """Integers verbatim, floats in shortest round-trip form (at most 17 significant digits)."""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _parse_cell(cell: str) -> Any:
    for kind in (int, float):
        try:
            return kind(cell)
        except ValueError:
            pass
    return {"true": True, "false": False}.get(cell, cell)


def _plain(obj: Any) -> Any:
    if is_dataclass(obj):
        return _plain(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


class Encoder(ABC):

    @staticmethod
    def encode(obj: Any) -> str:
        raise NotImplementedError()

    @staticmethod
    def decode(encoding: str) -> Any:
        raise NotImplementedError()


class CsvEncoder(Encoder):

    @staticmethod
    def encode(table: Table) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(table.header)
        for row in table.rows:
            writer.writerow([format_number(v) for v in row])
        return buf.getvalue()

    @staticmethod
    def decode(encoding: str) -> Table:
        reader = csv.reader(io.StringIO(encoding))
        header = next(reader)
        return Table(header, [[_parse_cell(c) for c in row] for row in reader if row])


class JsonEncoder(Encoder):

    @staticmethod
    def encode(obj: Any) -> str:
        return json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n"

    @staticmethod
    def decode(encoding: str) -> Any:
        return json.loads(encoding)


def paircorr_table(curves: dict[int, tuple[list[PairCorrCurve], PairCorrCurve]]) -> Table:
    """
    One row per (N, s): R2 for every dilation, their mean and the Poisson reference.

    :param curves: per N, the per-dilation curves and their mean curve.
    """
    width = max(len(per_alpha) for per_alpha, _ in curves.values())
    header = ["N", "s"] + [f"alpha_{i}" for i in range(width)] + ["mean", "reference"]
    table = Table(header)
    for N, (per_alpha, mean) in sorted(curves.items()):
        for i, s in enumerate(mean.s_grid):
            values = [c.r2[i] for c in per_alpha] + [""] * (width - len(per_alpha))
            table.rows.append([N, float(s), *values, float(mean.r2[i]), float(mean.reference[i])])
    return table


def read_paircorr(encoding: str, d: int, norm: NormKind = NormKind.SUP) -> list[PairCorrCurve]:
    """Mean curves, one per N, from a pair correlation table."""
    table = CsvEncoder.decode(encoding)
    out = []
    for N in sorted(set(table.column("N"))):
        rows = [r for r in table.rows if r[0] == N]
        i_mean, i_ref = table.header.index("mean"), table.header.index("reference")
        out.append(
            PairCorrCurve(
                np.array([r[1] for r in rows], dtype=np.float64),
                np.array([r[i_mean] for r in rows], dtype=np.float64),
                np.array([r[i_ref] for r in rows], dtype=np.float64),
                int(N),
                d,
                norm,
            )
        )
    return out


def alpha_table(alphas: dict[int, np.ndarray]) -> Table:
    d = next(iter(alphas.values())).shape[1]
    table = Table(["N", "draw"] + [f"alpha_{l}" for l in range(d)])
    for N, draws in sorted(alphas.items()):
        for i, a in enumerate(draws):
            table.rows.append([N, i, *(float(v) for v in a)])
    return table


def energy_table(report: EnergyReport) -> Table:
    return Table(["N", "count"], [[int(N), int(c)] for N, c in zip(report.Ns, report.counts)])


def energy_sidecar(report: EnergyReport, **extra: Any) -> dict[str, Any]:
    out = {
        "slope": report.slope,
        "stderr": report.slope_stderr,
        "intercept": report.intercept,
        "gamma": report.gamma,
        "subset": report.subset,
        "window": report.window,
    }
    out.update(extra)
    return out


def read_energy(table_encoding: str, sidecar_encoding: str) -> EnergyReport:
    table = CsvEncoder.decode(table_encoding)
    side = JsonEncoder.decode(sidecar_encoding)
    return EnergyReport(
        [int(v) for v in table.column("N")],
        [int(v) for v in table.column("count")],
        side["gamma"],
        side["subset"],
        side["slope"],
        side["stderr"],
        side["intercept"],
        side["window"],
    )


def variance_table(estimates: list[VarianceEstimate]) -> Table:
    return Table(
        ["N", "s", "mean_stat", "centre", "var_stat", "stderr"],
        [[e.N, e.s, e.mean_stat, e.centre, e.var_stat, e.stderr] for e in estimates],
    )


def read_variance(encoding: str) -> list[VarianceEstimate]:
    return [VarianceEstimate(**e) for e in JsonEncoder.decode(encoding)["estimates"]]


def selberg_table(checks: list[SelbergCheck]) -> Table:
    header = ["K", "s", "scale", "c0_error", "coef_margin", "sandwich_margin", "tensor_margin", "passed"]
    rows = [
        [c.K, c.s, c.scale, c.c0_error, c.coef_margin, c.sandwich_margin, c.tensor_margin, c.passed()]
        for c in checks
    ]
    return Table(header, rows)


def read_selberg(encoding: str) -> list[SelbergCheck]:
    table = CsvEncoder.decode(encoding)
    return [SelbergCheck(*row[:-1]) for row in table.rows]


def watt_table(results: list[tuple[float, int, WattDiagnostic]]) -> Table:
    """One row per (delta, M) of the sweep."""
    return Table(
        ["delta", "M", "V", "scaled_W", "ratio", "resolution"],
        [[delta, M, w.V, w.scaled_W, w.ratio, w.resolution] for delta, M, w in results],
    )


def read_watt(encoding: str) -> list[tuple[float, int, WattDiagnostic]]:
    table = CsvEncoder.decode(encoding)
    return [(float(r[0]), int(r[1]), WattDiagnostic(*r[2:])) for r in table.rows]
