from __future__ import annotations
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.random import Generator, PCG64

from .errors import DomainError
from .utils import as_matrix, as_vector, frac, frac_product


class NormKind(Enum):
    SUP = "sup"
    EUCLID = "euclid"


@dataclass(frozen=True)
class TorusPoint:
    """
    A point on the d-dimensional torus [0,1)^d.

    :param coords: coordinates, each in [0,1).
    """

    coords: tuple[float, ...]

    def __post_init__(self) -> None:
        self.check_validity()

    @property
    def d(self) -> int:
        return len(self.coords)

    def check_validity(self) -> None:
        assert self.d >= 1, "a torus point has at least one coordinate"
        assert all(0.0 <= c < 1.0 for c in self.coords), "coordinates must lie in [0,1)"


@dataclass
class TorusPointSet:
    """
    N points on the torus [0,1)^d, stored as an N x d array.

    :param points: array of shape (N, d) with entries in [0,1).
    """

    points: np.ndarray

    def __post_init__(self) -> None:
        self.points = np.ascontiguousarray(self.points, dtype=np.float64)
        self.check_validity()

    @property
    def N(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.N

    def __getitem__(self, n: int) -> TorusPoint:
        return TorusPoint(tuple(float(c) for c in self.points[n]))

    def check_validity(self) -> None:
        assert self.points.ndim == 2, "points must be an N x d array"
        assert self.d >= 1
        assert np.all((self.points >= 0.0) & (self.points < 1.0)), "points must lie in [0,1)^d"


def intdist(y, norm: NormKind = NormKind.SUP) -> float:
    """
    Distance of `y` to the integer lattice Z^d under `norm`.

    For the sup norm this is the largest per-coordinate distance to the
    nearest integer, hence a value in [0, 1/2].

    :raises DomainError: on non-finite input.
    """
    y = as_vector(y, "y")
    return float(intdist_rows(y.reshape(1, -1), norm)[0])


def intdist_rows(Y: np.ndarray, norm: NormKind = NormKind.SUP) -> np.ndarray:
    """Row-wise `intdist` of an (M, d) array."""
    Y = np.asarray(Y, dtype=np.float64)
    if not np.all(np.isfinite(Y)):
        raise DomainError("intdist of non-finite input")
    # np.rint rounds half to even, so ties land on exactly 0.5
    per = np.abs(Y - np.rint(Y))
    match norm:
        case NormKind.SUP:
            return per.max(axis=1)
        case NormKind.EUCLID:
            return np.sqrt((per * per).sum(axis=1))
        case _:
            raise ValueError(f"unknown norm {norm}")


def dilate_frac(x, alpha) -> TorusPointSet:
    """
    Coordinate-wise dilation of a sequence onto the torus.

    Point n, coordinate l is the fractional part of x[n, l] * alpha[l].

    :param x: a `SequenceMatrix` or an (N, d) array.
    :param alpha: d dilation factors.
    :raises DomainError: on a dimension mismatch or non-finite input.
    """
    values = x.values if hasattr(x, "values") else as_matrix(x, "x")
    alpha = as_vector(alpha, "alpha")
    if values.shape[1] != alpha.shape[0]:
        raise DomainError(
            f"sequence has {values.shape[1]} columns but alpha has {alpha.shape[0]} entries"
        )
    return TorusPointSet(frac_product(values, alpha[np.newaxis, :]))


def translate(points: TorusPointSet, shift) -> TorusPointSet:
    """Shift every point by `shift` on the torus."""
    shift = as_vector(shift, "shift")
    if shift.shape[0] != points.d:
        raise DomainError(f"shift has {shift.shape[0]} entries, points have d={points.d}")
    return TorusPointSet(frac(points.points + shift[np.newaxis, :]))


def uniform_points(N: int, d: int, seed: int) -> TorusPointSet:
    """N i.i.d. uniform points on [0,1)^d."""
    if N < 1 or d < 1:
        raise DomainError(f"need N >= 1 and d >= 1, got {N=} {d=}")
    rng = Generator(PCG64(seed))
    return TorusPointSet(rng.random((N, d)))
