from __future__ import annotations
from multiprocessing.pool import ThreadPool
from typing import Callable, Iterable, Sequence, TypeVar
import math
import os

import numpy as np

from .errors import DomainError

T = TypeVar("T")
R = TypeVar("R")

# Veltkamp splitting constant for binary64: 2**27 + 1
_SPLITTER = 134217729.0


def as_matrix(values, name: str = "values") -> np.ndarray:
    """
    Coerce `values` into a 2-dimensional float64 array.

    A 1-dimensional input is read as a single column.

    :raises DomainError: when the input is empty, has more than 2 axes or
        holds non-finite entries.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.size == 0:
        raise DomainError(f"{name} must be a non-empty matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} holds non-finite entries")
    return arr


def as_vector(values, name: str = "vector") -> np.ndarray:
    """Coerce `values` into a 1-dimensional float64 array of finite entries."""
    arr = np.atleast_1d(np.asarray(values, dtype=np.float64))
    if arr.ndim != 1:
        raise DomainError(f"{name} must be 1-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} holds non-finite entries")
    return arr


def _split(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_product(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Error-free product: returns (p, e) with p = fl(a*b) and a*b = p + e exactly.

    Dekker's algorithm, so it does not depend on a fused multiply-add.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    p = a * b
    a_hi, a_lo = _split(a)
    b_hi, b_lo = _split(b)
    e = ((a_hi * b_hi - p) + a_hi * b_lo + a_lo * b_hi) + a_lo * b_lo
    return p, e


def frac(y: np.ndarray) -> np.ndarray:
    """Fractional part with the floor convention, always in [0,1)."""
    f = y - np.floor(y)
    # y slightly below an integer can round up to exactly 1.0
    return np.where(f >= 1.0, 0.0, f)


def frac_product(x: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """Fractional part of x*alpha, keeping the low-order bits of the product."""
    p, e = two_product(x, alpha)
    return frac(frac(p) + e)


class KahanSummation:
    """
    Running sum with Kahan compensation.

    Values must be added in a fixed order for the result to be reproducible.
    """

    def __init__(self) -> None:
        self.sum = 0.0
        self.carry = 0.0

    def add(self, value: float) -> None:
        y = value - self.carry
        t = self.sum + y
        self.carry = (t - self.sum) - y
        self.sum = t

    def extend(self, values: Iterable[float]) -> KahanSummation:
        for v in values:
            self.add(float(v))
        return self


def kahan_sum(values: Iterable[float]) -> float:
    return KahanSummation().extend(values).sum


def resolve_threads(threads: int | None = None) -> int:
    """
    Number of workers to use.

    Falls back to `PPCLAB_THREADS` and then to the number of cpus.
    """
    if threads is None:
        threads = int(os.environ.get("PPCLAB_THREADS", os.cpu_count() or 1))
    assert threads >= 1, "at least one worker is required"
    return threads


def parallel_map(
    func: Callable[[T], R], items: Sequence[T], threads: int | None = None
) -> list[R]:
    """
    Apply `func` to every item on a thread pool, preserving item order.

    Only pays off for functions that release the GIL (numba nogil kernels,
    numpy linear algebra).
    """
    threads = min(resolve_threads(threads), max(len(items), 1))
    if threads == 1:
        return [func(it) for it in items]
    with ThreadPool(processes=threads) as tp:
        return tp.map(func, items)


def row_blocks(n: int, threads: int, per_worker: int = 4) -> list[tuple[int, int]]:
    """Split range(n) into contiguous [lo, hi) blocks, a few per worker."""
    if n <= 0:
        return []
    count = max(1, min(n, threads * per_worker))
    edges = np.linspace(0, n, count + 1).astype(np.int64)
    return [(int(lo), int(hi)) for lo, hi in zip(edges[:-1], edges[1:]) if hi > lo]


def parallel_block_sum(
    kernel: Callable[[int, int], int], n: int, threads: int | None = None
) -> int:
    """Sum `kernel(lo, hi)` over row blocks of range(n); an exact integer total."""
    threads = resolve_threads(threads)
    blocks = row_blocks(n, threads) if threads > 1 else [(0, n)]
    return int(sum(parallel_map(lambda b: int(kernel(*b)), blocks, threads)))


def integer_root_ceil(value: int, d: int) -> int:
    """Smallest integer k >= 1 with k**d >= value."""
    assert d >= 1
    if value <= 1:
        return 1
    k = max(1, int(math.ceil(value ** (1.0 / d))))
    while k > 1 and (k - 1) ** d >= value:
        k -= 1
    while k**d < value:
        k += 1
    return k
