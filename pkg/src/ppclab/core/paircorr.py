from __future__ import annotations
from dataclasses import dataclass
from enum import Enum
import itertools
import math

import numpy as np
from scipy.special import gamma as gamma_fn

from ..log import logger
from . import kernels
from .errors import DomainError
from .torus import NormKind, TorusPointSet
from .utils import as_vector, parallel_block_sum

# upper bound on the number of grid cells; coarser cells never lose pairs
MAX_CELLS = 1 << 22


class CountMethod(Enum):
    BRUTE = "brute"
    GRID = "grid"


@dataclass
class PairCorrCurve:
    """
    Empirical pair correlation R2 sampled on a grid of radii.

    :param s_grid: strictly increasing positive radii.
    :param r2: R2 at each radius.
    :param reference: Poisson reference omega s^d (1 - 1/N), capped at N - 1.
    :param N: number of points.
    :param d: dimension.
    :param norm: norm the distances were measured in.
    """

    s_grid: np.ndarray
    r2: np.ndarray
    reference: np.ndarray
    N: int
    d: int
    norm: NormKind = NormKind.SUP

    def __post_init__(self) -> None:
        self.s_grid = np.asarray(self.s_grid, dtype=np.float64)
        self.r2 = np.asarray(self.r2, dtype=np.float64)
        self.reference = np.asarray(self.reference, dtype=np.float64)
        self.check_validity()

    def check_validity(self) -> None:
        assert self.s_grid.ndim == 1 and self.s_grid.size >= 1
        assert self.r2.shape == self.s_grid.shape == self.reference.shape
        assert np.all(self.s_grid > 0) and np.all(np.diff(self.s_grid) > 0)
        assert np.all(self.r2 >= 0), "R2 is nonnegative"
        assert np.all(np.diff(self.r2) >= -1e-12), "R2 is nondecreasing in s"
        assert np.all(self.r2 <= max(self.N - 1, 0) + 1e-9), "R2 never exceeds N - 1"

    @property
    def deviation(self) -> np.ndarray:
        """|R2 - omega s^d| at every radius."""
        return np.abs(self.r2 - poisson_reference(self.s_grid, self.d, self.norm))


def threshold(s: float, N: int, d: int) -> float:
    """Distance threshold s / N^(1/d) of the pair correlation at radius s."""
    return s / N ** (1.0 / d)


def poisson_reference(s, d: int, norm: NormKind = NormKind.SUP):
    """
    Volume of the norm ball of radius s in R^d.

    (2s)^d for the sup norm, pi^(d/2) / Gamma(d/2 + 1) s^d for the euclidean norm.
    """
    s = np.asarray(s, dtype=np.float64)
    match norm:
        case NormKind.SUP:
            out = (2.0 * s) ** d
        case NormKind.EUCLID:
            out = math.pi ** (d / 2) / gamma_fn(d / 2 + 1) * s**d
        case _:
            raise ValueError(f"unknown norm {norm}")
    return float(out) if out.ndim == 0 else out


def uniform_expectation(N: int, d: int, s: float) -> float:
    """
    Expected R2 of N i.i.d. uniform points under the sup norm.

    Exact while the threshold ball fits the torus, i.e. s <= N^(1/d) / 2.
    """
    if s > N ** (1.0 / d) / 2:
        raise DomainError(f"uniform expectation needs s <= N^(1/d)/2, got {s=} {N=} {d=}")
    return (N - 1) * (2.0 * s) ** d / N


def _cells_per_axis(N: int, d: int, s: float, thr: float) -> int:
    cap = max(1, int(MAX_CELLS ** (1.0 / d)))
    while cap > 1 and cap**d > MAX_CELLS:
        cap -= 1
    m = min(cap, max(1, int(math.floor(N ** (1.0 / d) / s))))
    # cell width must exceed the threshold after rounding
    while m > 1 and m * thr > 1.0 - 1e-9:
        m -= 1
    return m


def pair_count(
    points: TorusPointSet,
    s: float,
    norm: NormKind = NormKind.SUP,
    method: CountMethod = CountMethod.GRID,
    threads: int | None = None,
) -> int:
    """
    Number of ordered pairs m != n with torus distance at most s / N^(1/d).

    Brute force and grid bucketing return the same integer.
    """
    if not s > 0:
        raise DomainError(f"radius must be positive, got {s=}")
    y, N, d = points.points, points.N, points.d
    if N < 2:
        return 0
    thr = threshold(s, N, d)
    euclid = norm == NormKind.EUCLID

    m = _cells_per_axis(N, d, s, thr) if method == CountMethod.GRID else 0
    if m < 3:
        return parallel_block_sum(
            lambda lo, hi: kernels.brute_pair_count(y, thr, euclid, lo, hi), N, threads
        )

    cells = np.minimum((y * m).astype(np.int64), m - 1)
    cid = (cells * (m ** np.arange(d, dtype=np.int64))[np.newaxis, :]).sum(axis=1)
    order = np.argsort(cid, kind="stable").astype(np.int64)
    starts = np.searchsorted(cid[order], np.arange(m**d + 1, dtype=np.int64)).astype(np.int64)
    offsets = np.array(list(itertools.product((-1, 0, 1), repeat=d)), dtype=np.int64)
    logger.debug(f"grid pair count {N=} {d=} {m=}")
    return parallel_block_sum(
        lambda lo, hi: kernels.grid_pair_count(
            y, thr, euclid, cells, order, starts, m, offsets, lo, hi
        ),
        N,
        threads,
    )


def r2_count(
    points: TorusPointSet,
    s: float,
    norm: NormKind = NormKind.SUP,
    method: CountMethod = CountMethod.GRID,
    threads: int | None = None,
) -> float:
    """
    Empirical pair correlation R2(s): ordered close pairs divided by N.

    The threshold s / N^(1/d) is inclusive.
    """
    if points.N < 2:
        return 0.0
    return pair_count(points, s, norm, method, threads) / points.N


def r2_curve(
    points: TorusPointSet,
    s_grid,
    norm: NormKind = NormKind.SUP,
    method: CountMethod = CountMethod.GRID,
    threads: int | None = None,
) -> PairCorrCurve:
    """
    R2 over a grid of radii together with its Poisson reference.

    :raises DomainError: when the grid is empty, not positive or not increasing.
    """
    s_grid = as_vector(s_grid, "s_grid") if np.size(s_grid) else np.empty(0)
    if s_grid.size == 0:
        raise DomainError("radius grid is empty")
    if np.any(s_grid <= 0) or np.any(np.diff(s_grid) <= 0):
        raise DomainError(f"radius grid must be positive and increasing, got {s_grid.tolist()}")
    N, d = points.N, points.d
    r2 = np.array([r2_count(points, s, norm, method, threads) for s in s_grid])
    return PairCorrCurve(s_grid, r2, reference_curve(s_grid, N, d, norm), N, d, norm)


def reference_curve(s_grid, N: int, d: int, norm: NormKind = NormKind.SUP) -> np.ndarray:
    ref = np.asarray(poisson_reference(np.asarray(s_grid, dtype=np.float64), d, norm))
    return np.minimum(ref * (1.0 - 1.0 / N), max(N - 1, 0))


def mean_curve(curves: list[PairCorrCurve]) -> PairCorrCurve:
    """Across-dilation mean of curves sharing radii, N, d and norm."""
    if not curves:
        raise DomainError("cannot average an empty list of curves")
    first = curves[0]
    for c in curves[1:]:
        assert np.array_equal(c.s_grid, first.s_grid) and (c.N, c.d, c.norm) == (
            first.N,
            first.d,
            first.norm,
        ), "curves must share radii, N, d and norm"
    r2 = np.mean([c.r2 for c in curves], axis=0)
    return PairCorrCurve(first.s_grid, r2, first.reference, first.N, first.d, first.norm)
