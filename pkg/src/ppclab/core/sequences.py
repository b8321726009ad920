from __future__ import annotations
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any
import csv

import numpy as np

from .errors import (
    DomainError,
    MalformedSequenceRow,
    MissingSequenceFile,
    NonIncreasingColumn,
)
from ..log import logger


class Family(Enum):
    POWER = "power"
    NLOG = "nlog"
    FILE = "file"


@dataclass
class SequenceMeta:
    """
    Where a sequence came from.

    :param family: generating family.
    :param params: family parameters, `thetas` for power and `A` for nlog.
    :param n0: index of the first row.
    """

    family: Family
    params: dict[str, Any] = field(default_factory=dict)
    n0: int = 1


@dataclass
class SequenceMatrix:
    """
    Raw sequence (x_n^(1), ..., x_n^(d)) for n = n0, ..., n0+N-1, before dilation.

    :param values: array of shape (N, d).
    :param meta: family descriptor.
    """

    values: np.ndarray
    meta: SequenceMeta = field(default_factory=lambda: SequenceMeta(Family.FILE))

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim == 1:
            values = values.reshape(-1, 1)
        self.values = np.ascontiguousarray(values)
        self.check_validity()

    @property
    def N(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def column(self, l: int) -> np.ndarray:
        return self.values[:, l]

    def head(self, N: int) -> SequenceMatrix:
        """First `N` rows."""
        if not 1 <= N <= self.N:
            raise DomainError(f"cannot take {N} rows of a sequence of length {self.N}")
        return SequenceMatrix(self.values[:N], self.meta)

    def select(self, subset: list[int]) -> SequenceMatrix:
        """Columns listed in `subset`, in that order."""
        if not subset:
            raise DomainError("column subset must be nonempty")
        if any(not 0 <= l < self.d for l in subset):
            raise DomainError(f"column subset {subset} out of range for d={self.d}")
        return SequenceMatrix(self.values[:, subset], self.meta)

    def check_validity(self) -> None:
        assert self.values.ndim == 2, "values must be an N x d matrix"
        assert self.N >= 1, "a sequence has at least one row"
        assert self.d >= 1, "a sequence has at least one column"
        assert np.all(np.isfinite(self.values)), "entries must be finite"
        assert np.all(np.diff(self.values, axis=0) > 0), "columns must be strictly increasing"


@dataclass
class SpacingCertificate:
    """
    Outcome of a consecutive-gap scan.

    :param c: required minimal gap.
    :param holds: whether every gap in every column is at least `c`.
    :param worst_gap: the smallest gap found.
    :param worst_index: row i such that x[i+1] - x[i] is the smallest gap.
    :param worst_column: column of the smallest gap.
    :param column_gaps: smallest gap per column.
    """

    c: float
    holds: bool
    worst_gap: float
    worst_index: int
    worst_column: int = 0
    column_gaps: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        self.check_validity()

    def check_validity(self) -> None:
        assert self.c > 0
        assert self.holds == (self.worst_gap >= self.c)


def gen_power(thetas, N: int, n0: int = 1) -> SequenceMatrix:
    """
    Power sequence with entry (n, l) equal to (n0 + n - 1)^theta_l.

    :raises DomainError: when a theta is not positive, or N, n0 < 1.
    """
    thetas = np.atleast_1d(np.asarray(thetas, dtype=np.float64))
    if thetas.size == 0 or np.any(thetas <= 0) or not np.all(np.isfinite(thetas)):
        raise DomainError(f"power exponents must be positive, got {thetas.tolist()}")
    if N < 1 or n0 < 1:
        raise DomainError(f"need N >= 1 and n0 >= 1, got {N=} {n0=}")
    m = np.arange(n0, n0 + N, dtype=np.float64)
    values = m[:, np.newaxis] ** thetas[np.newaxis, :]
    meta = SequenceMeta(Family.POWER, {"thetas": thetas.tolist()}, n0)
    return SequenceMatrix(values, meta)


def gen_nlog(A: float, N: int, n0: int = 2) -> SequenceMatrix:
    """
    Two-column sequence (m, m (ln m)^A) with m = n0 + n - 1.

    :raises DomainError: when n0 < 2, A < 1 or N < 1.
    """
    if n0 < 2:
        raise DomainError(f"nlog sequences start at n0 >= 2, got {n0=}")
    if A < 1:
        raise DomainError(f"nlog exponent must be at least 1, got {A=}")
    if N < 1:
        raise DomainError(f"need N >= 1, got {N=}")
    m = np.arange(n0, n0 + N, dtype=np.float64)
    values = np.column_stack([m, m * np.log(m) ** A])
    meta = SequenceMeta(Family.NLOG, {"A": float(A)}, n0)
    return SequenceMatrix(values, meta)


def load_sequence(path: str | Path) -> SequenceMatrix:
    """
    Read a sequence file: one row per n, d comma separated decimals, no header.

    :raises MissingSequenceFile: when `path` does not exist.
    :raises MalformedSequenceRow: on unparsable rows, ragged rows or an empty file.
    :raises NonIncreasingColumn: when a column is not strictly increasing.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingSequenceFile(str(path), "no such file")

    rows: list[list[float]] = []
    with path.open(newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                vals = [float(cell) for cell in row]
            except ValueError:
                raise MalformedSequenceRow(str(path), f"line {lineno} is not numeric: {row}")
            if not all(np.isfinite(vals)):
                raise MalformedSequenceRow(str(path), f"line {lineno} holds non-finite values")
            if rows and len(vals) != len(rows[0]):
                raise MalformedSequenceRow(
                    str(path), f"line {lineno} has {len(vals)} columns, expected {len(rows[0])}"
                )
            rows.append(vals)
    if not rows:
        raise MalformedSequenceRow(str(path), "file holds no rows")

    values = np.array(rows, dtype=np.float64)
    steps = np.diff(values, axis=0)
    if np.any(steps <= 0):
        i, l = np.argwhere(steps <= 0)[0]
        raise NonIncreasingColumn(str(path), f"column {l} does not increase at line {i + 2}")
    logger.debug(f"loaded sequence {path=} shape={values.shape}")
    return SequenceMatrix(values, SequenceMeta(Family.FILE, {"path": str(path)}, 1))


def save_sequence(x: SequenceMatrix, path: str | Path) -> None:
    """Write `x` in the sequence file format, bit exact under `load_sequence`."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        for row in x.values:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def check_spacing(x: SequenceMatrix, c: float | None = None) -> SpacingCertificate:
    """
    Check x[n+1] - x[n] >= c in every column.

    Without `c`, the smallest gap between the first two rows is used.

    :raises DomainError: when N < 2 or c is not positive.
    """
    if x.N < 2:
        raise DomainError("spacing needs at least two rows")
    if c is None:
        c = float(np.min(x.values[1] - x.values[0]))
    if not c > 0:
        raise DomainError(f"spacing constant must be positive, got {c=}")
    gaps = np.diff(x.values, axis=0)
    worst_index, worst_column = np.unravel_index(np.argmin(gaps), gaps.shape)
    worst = float(gaps[worst_index, worst_column])
    return SpacingCertificate(
        c=float(c),
        holds=worst >= c,
        worst_gap=worst,
        worst_index=int(worst_index),
        worst_column=int(worst_column),
        column_gaps=tuple(float(g) for g in gaps.min(axis=0)),
    )


def build_sequence(family: Family | str, N: int, n0: int | None = None, **params) -> SequenceMatrix:
    """
    Generate N rows of a named family.

    `params` carries `thetas` for the power family and `A` for nlog.
    """
    family = Family(family)
    match family:
        case Family.POWER:
            return gen_power(params["thetas"], N, 1 if n0 is None else n0)
        case Family.NLOG:
            return gen_nlog(params.get("A", 1.0), N, 2 if n0 is None else n0)
        case Family.FILE:
            return load_sequence(params["path"]).head(N)
        case _:
            raise ValueError(f"unknown sequence family {family}")
