from __future__ import annotations
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterator
import itertools
import math

import numpy as np
from scipy import stats

from ..log import logger
from . import kernels
from .errors import DomainError, QuadratureError
from .sequences import SequenceMatrix
from .utils import as_matrix, parallel_block_sum


@dataclass(frozen=True)
class DyadicBlock:
    """
    Dyadic box of dilation integers: 2^(u_l - 1) <= j_l < 2^u_l in every coordinate.

    :param u: block exponents, one per coordinate.
    """

    u: tuple[int, ...]

    def __post_init__(self) -> None:
        self.check_validity()

    def check_validity(self) -> None:
        assert len(self.u) >= 1, "a block has at least one coordinate"
        assert all(int(v) == v and v >= 1 for v in self.u), "block exponents are positive integers"

    @property
    def dim(self) -> int:
        return len(self.u)

    def ranges(self) -> list[range]:
        return [range(2 ** (v - 1), 2**v) for v in self.u]

    @property
    def size(self) -> int:
        """Number of integer tuples j in the block."""
        return math.prod(2 ** (v - 1) for v in self.u)

    def tuples(self) -> Iterator[tuple[int, ...]]:
        return itertools.product(*self.ranges())


@dataclass
class EnergyReport:
    """
    Exact (joint) additive energies over a grid of N, with a log-log fit.

    :param Ns: increasing sequence lengths.
    :param counts: exact tallies, one per N.
    :param gamma: thresholds of the constrained columns.
    :param subset: constrained column indices.
    :param slope: fitted exponent of count against N.
    :param slope_stderr: standard error of the slope.
    :param intercept: fitted log-intercept.
    :param window: `prefix` for indices [1, N], `block` for [N, 2N].
    """

    Ns: list[int]
    counts: list[int]
    gamma: list[float]
    subset: list[int]
    slope: float
    slope_stderr: float
    intercept: float = 0.0
    window: str = "prefix"

    def __post_init__(self) -> None:
        self.check_validity()

    def window_size(self, N: int) -> int:
        return N + 1 if self.window == "block" else N

    def check_validity(self) -> None:
        assert len(self.Ns) == len(self.counts) >= 1
        assert all(a < b for a, b in zip(self.Ns, self.Ns[1:])), "Ns must increase"
        assert len(self.gamma) == len(self.subset) >= 1
        assert all(0 < g for g in self.gamma)
        assert self.window in ("prefix", "block")
        for N, count in zip(self.Ns, self.counts):
            n = self.window_size(N)
            assert count >= 2 * n * n - n, f"tally {count} below the degenerate tuples at {N=}"
        if self.window == "prefix":
            assert all(a <= b for a, b in zip(self.counts, self.counts[1:])), "tallies grow with N"


@dataclass
class WattDiagnostic:
    """
    Solution count of the sum system against its scaled integral.

    :param V: exact number of solutions.
    :param scaled_W: delta_1 ... delta_K times the quadrature of |T|^(2M).
    :param ratio: V / scaled_W.
    :param resolution: quadrature points per axis at convergence.
    """

    V: int
    scaled_W: float
    ratio: float
    resolution: int = field(default=0)


def _values(x) -> np.ndarray:
    if isinstance(x, SequenceMatrix):
        return x.values
    return as_matrix(x, "x")


def _check_gamma(gamma, k: int, upper: float | None = 1.0) -> np.ndarray:
    g = np.atleast_1d(np.asarray(gamma, dtype=np.float64))
    if g.size == 1 and k > 1:
        g = np.full(k, g[0])
    if g.shape != (k,):
        raise DomainError(f"expected {k} thresholds, got {g.tolist()}")
    if np.any(~np.isfinite(g)) or np.any(g <= 0) or (upper is not None and np.any(g > upper)):
        bound = f"(0, {upper}]" if upper is not None else "(0, inf)"
        raise DomainError(f"thresholds must lie in {bound}, got {g.tolist()}")
    return g


def _per_subset(gamma, subset: list[int], d: int):
    """
    Thresholds for the columns of `subset`, in subset order.

    A full vector of d thresholds is indexed by column; a shorter one lists
    the thresholds of the subset columns in subset order.
    """
    g = np.atleast_1d(np.asarray(gamma, dtype=np.float64))
    if g.size == d:
        return g[subset]
    return g


def _check_subset(subset, d: int) -> list[int]:
    subset = list(range(d)) if subset is None else [int(l) for l in subset]
    if not subset:
        raise DomainError("constrained column subset must be nonempty")
    if len(set(subset)) != len(subset) or any(not 0 <= l < d for l in subset):
        raise DomainError(f"invalid column subset {subset} for d={d}")
    return subset


def near_collision_count(
    points: np.ndarray,
    gamma: np.ndarray,
    weights: np.ndarray | None = None,
    threads: int | None = None,
) -> int:
    """
    Weighted tally over ordered pairs (p, q), p = q included, of w_p w_q when
    |points[p, l] - points[q, l]| < gamma[l] in every column.

    Points are sorted along the column with the largest spread relative to
    its threshold and scanned with a sliding window on that column.
    """
    points = np.asarray(points, dtype=np.float64)
    M, k = points.shape
    if M == 0:
        return 0
    w = np.ones(M, dtype=np.int64) if weights is None else np.asarray(weights, dtype=np.int64)
    spread = (points.max(axis=0) - points.min(axis=0)) / gamma
    lead = int(np.argmax(spread))
    cols = [lead] + [l for l in range(k) if l != lead]
    order = np.argsort(points[:, lead], kind="stable")
    s = np.ascontiguousarray(points[order][:, cols])
    ws = np.ascontiguousarray(w[order])
    g = np.ascontiguousarray(gamma[cols])
    off_diagonal = parallel_block_sum(lambda lo, hi: kernels.window_count(s, ws, g, lo, hi), M, threads)
    return int(np.sum(w * w)) + 2 * off_diagonal


def _pair_sums(cols: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sums x_a + x_b over a <= b with multiplicity 1 on the diagonal and 2 off it."""
    n = cols.shape[0]
    a, b = np.triu_indices(n)
    sums = cols[a] + cols[b]
    weights = np.where(a == b, 1, 2).astype(np.int64)
    return sums, weights


def window_energy(
    x,
    gamma,
    lo: int,
    hi: int,
    subset: list[int] | None = None,
    threads: int | None = None,
    gamma_upper: float | None = 1.0,
) -> int:
    """
    Number of 4-tuples in [lo, hi]^4 (1-based, inclusive) with
    |x_n1 + x_n2 - x_n3 - x_n4| < gamma_l in every column l of `subset`.

    :raises DomainError: on an invalid window, subset or threshold.
    """
    values = _values(x)
    subset = _check_subset(subset, values.shape[1])
    g = _check_gamma(_per_subset(gamma, subset, values.shape[1]), len(subset), gamma_upper)
    if lo < 1 or hi < lo:
        raise DomainError(f"invalid index window [{lo}, {hi}]")
    if hi > values.shape[0]:
        raise DomainError(f"window [{lo}, {hi}] exceeds sequence length {values.shape[0]}")
    cols = np.ascontiguousarray(values[lo - 1 : hi, subset])
    sums, weights = _pair_sums(cols)
    count = near_collision_count(sums, g, weights, threads)
    logger.debug(f"window energy [{lo}, {hi}] {subset=} -> {count}")
    return count


def energy_1d(x, gamma: float = 1.0, N: int | None = None, threads: int | None = None) -> int:
    """
    Additive energy #{n in [1,N]^4 : |x_n1 + x_n2 - x_n3 - x_n4| < gamma}.

    :param x: a single column of reals with at least N entries.
    :raises DomainError: when gamma is outside (0, 1] or x is too short.
    """
    col = np.asarray(x, dtype=np.float64).reshape(-1, 1)
    N = col.shape[0] if N is None else N
    return window_energy(col, gamma, 1, N, [0], threads)


def joint_energy(
    x,
    gamma,
    subset: list[int] | None = None,
    N: int | None = None,
    threads: int | None = None,
) -> int:
    """
    Joint additive energy: 4-tuples in [1,N]^4 nearly colliding in every
    column of `subset` at once.

    :param gamma: a scalar, d thresholds indexed by column, or one threshold
        per entry of `subset`.
    :raises DomainError: on an empty subset or thresholds outside (0, 1].
    """
    values = _values(x)
    N = values.shape[0] if N is None else N
    return window_energy(values, gamma, 1, N, subset, threads)


def block_energy(
    x,
    gamma,
    N: int,
    subset: list[int] | None = None,
    clip: bool = False,
    threads: int | None = None,
) -> int:
    """
    Tally over the window n in [N, 2N]^4.

    Any positive threshold is accepted. With `clip` the window is cut at the
    end of the sequence; otherwise a short sequence is an error.
    """
    values = _values(x)
    hi = 2 * N
    if clip:
        hi = min(hi, values.shape[0])
    if values.shape[0] < hi or N < 1:
        raise DomainError(f"window [{N}, {2 * N}] needs {2 * N} rows, have {values.shape[0]}")
    return window_energy(values, gamma, N, hi, subset, threads, gamma_upper=None)


def dyadic_block_counts(
    x,
    gamma,
    N: int,
    subset: list[int] | None = None,
    threads: int | None = None,
) -> list[int]:
    """
    Tallies over the dyadic windows (2^(l-1), 2^l] cut to [1, N], l = 0, 1, ...

    The windows are disjoint, so the tallies add up to at most the energy
    over [1, N].
    """
    counts = [window_energy(x, gamma, 1, 1, subset, threads, gamma_upper=None)]
    l = 1
    while 2 ** (l - 1) < N:
        lo, hi = 2 ** (l - 1) + 1, min(2**l, N)
        counts.append(window_energy(x, gamma, lo, hi, subset, threads, gamma_upper=None))
        l += 1
    return counts


def brute_energy(
    x,
    gamma,
    subset: list[int] | None = None,
    N: int | None = None,
    threads: int | None = None,
) -> int:
    """O(N^4) enumeration with the same arithmetic as the fast counter."""
    values = _values(x)
    subset = _check_subset(subset, values.shape[1])
    g = _check_gamma(_per_subset(gamma, subset, values.shape[1]), len(subset))
    N = values.shape[0] if N is None else N
    cols = np.ascontiguousarray(values[:N, subset])
    return parallel_block_sum(lambda lo, hi: kernels.brute_energy(cols, g, lo, hi), N, threads)


def fit_exponent(Ns, counts) -> tuple[float, float]:
    """
    Least-squares slope of log(count) against log(N) and its standard error.

    :raises DomainError: with fewer than 3 distinct N or a nonpositive count.
    """
    slope, stderr, _ = _fit(Ns, counts)
    return slope, stderr


def _fit(Ns, counts) -> tuple[float, float, float]:
    Ns = np.asarray(Ns, dtype=np.float64)
    counts = np.asarray(counts, dtype=np.float64)
    if Ns.shape != counts.shape or np.unique(Ns).size < 3:
        raise DomainError("an exponent fit needs at least 3 distinct N")
    if np.any(Ns <= 0) or np.any(counts <= 0):
        raise DomainError("an exponent fit needs positive N and counts")
    fit = stats.linregress(np.log(Ns), np.log(counts))
    return float(fit.slope), float(fit.stderr), float(fit.intercept)


def energy_report(
    x,
    gamma,
    Ns: list[int],
    subset: list[int] | None = None,
    window: str = "prefix",
    threads: int | None = None,
) -> EnergyReport:
    """Tally the energy at every N of `Ns` and fit the scaling exponent."""
    values = _values(x)
    subset = _check_subset(subset, values.shape[1])
    upper = 1.0 if window == "prefix" else None
    g = _check_gamma(_per_subset(gamma, subset, values.shape[1]), len(subset), upper)
    by_column = np.ones(values.shape[1])
    by_column[subset] = g
    counts = []
    for N in Ns:
        logger.info(f"counting energy {N=} {subset=} {window=}")
        if window == "prefix":
            counts.append(joint_energy(values, by_column, subset, N, threads))
        else:
            counts.append(block_energy(values, by_column, N, subset, threads=threads))
    slope, stderr, intercept = _fit(Ns, counts)
    return EnergyReport(list(Ns), counts, g.tolist(), subset, slope, stderr, intercept, window)


def pair_differences(x, subset: list[int] | None = None) -> np.ndarray:
    """Componentwise |x_n - x_m| over ordered pairs n != m, one row per pair."""
    values = _values(x)
    subset = _check_subset(subset, values.shape[1])
    cols = values[:, subset]
    n = cols.shape[0]
    diffs = np.abs(cols[:, np.newaxis, :] - cols[np.newaxis, :, :])
    mask = ~np.eye(n, dtype=bool)
    return diffs[mask]


def dyadic_blocks(N: int, r: int, d: int, d_prime: int) -> list[DyadicBlock]:
    """
    Dyadic blocks covering 1 <= j_l <= (rN)^(1/d) in d' coordinates.

    U is the least integer with 2^U >= (rN)^(1/d).
    """
    if N < 1 or r < 1 or d < 1 or d_prime < 1:
        raise DomainError(f"invalid block parameters {N=} {r=} {d=} {d_prime=}")
    U = 1
    while 2 ** (U * d) < r * N:
        U += 1
    return [DyadicBlock(u) for u in itertools.product(range(1, U + 1), repeat=d_prime)]


def locked_pairs(block: DyadicBlock) -> Iterator[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Pairs (j, t) of block tuples with j_1/t_1 = ... = j_d/t_d."""
    ranges = block.ranges()
    for j0, t0 in itertools.product(ranges[0], ranges[0]):
        options = _completions(j0, t0, ranges[1:])
        for combo in itertools.product(*options):
            yield (j0, *(c[0] for c in combo)), (t0, *(c[1] for c in combo))


def _completions(j0: int, t0: int, ranges: list[range]) -> list[list[tuple[int, int]]]:
    g = math.gcd(j0, t0)
    p, q = j0 // g, t0 // g
    out = []
    for r in ranges:
        k_max = (r.stop - 1) // max(p, q)
        out.append([(k * p, k * q) for k in range(1, k_max + 1) if k * p in r and k * q in r])
    return out


def ratio_locked_pairs(block: DyadicBlock) -> int:
    """Number of ratio-locked pairs (j, t) in the block."""
    ranges = block.ranges()
    return sum(
        math.prod(len(o) for o in _completions(j0, t0, ranges[1:]))
        for j0, t0 in itertools.product(ranges[0], ranges[0])
    )


def _cross(a: np.ndarray, b: np.ndarray, threads: int | None) -> int:
    b = np.ascontiguousarray(b[np.argsort(b[:, 0], kind="stable")])
    a = np.ascontiguousarray(a)
    return parallel_block_sum(lambda lo, hi: kernels.cross_count(a, b, lo, hi), a.shape[0], threads)


def dilated_pair_count(
    z,
    block: DyadicBlock,
    pairing: str = "all",
    threads: int | None = None,
) -> int:
    """
    Tally of (j, t, m, n) with j, t in the block and ||j z_m - t z_n||_inf < 1,
    products taken componentwise.

    :param pairing: `all` for every (j, t), `locked` for ratio-locked pairs
        only, `diagonal` for j = t.
    """
    z = as_matrix(z, "z")
    if z.shape[1] != block.dim:
        raise DomainError(f"z has {z.shape[1]} columns, block has {block.dim}")
    ones = np.ones(block.dim)
    match pairing:
        case "all":
            pooled = np.concatenate([z * np.asarray(j, dtype=np.float64) for j in block.tuples()])
            return near_collision_count(pooled, ones, threads=threads)
        case "diagonal":
            return sum(
                near_collision_count(z * np.asarray(j, dtype=np.float64), ones, threads=threads)
                for j in block.tuples()
            )
        case "locked":
            return sum(
                _cross(z * np.asarray(j, dtype=np.float64), z * np.asarray(t, dtype=np.float64), threads)
                for j, t in locked_pairs(block)
            )
        case _:
            raise DomainError(f"unknown pairing {pairing!r}")


def same_component_bound(
    z,
    block: DyadicBlock,
    axis: int | None = None,
    threads: int | None = None,
) -> int:
    """
    One-coordinate tally weighted by the number of ratio-locked completions.

    Dropping every constraint but the one on `axis` (default: the largest
    block exponent) can only add solutions, so this never falls below
    `dilated_pair_count(z, block, "locked")`. For a replicated column the two
    agree when every entry of the axis range exceeds every entry of the other
    ranges, or when the block holds the single tuple (1, ..., 1); see
    `same_component_count` for the exact tally.
    """
    z = as_matrix(z, "z")
    axis = int(np.argmax(block.u)) if axis is None else axis
    ranges = block.ranges()
    others = [r for l, r in enumerate(ranges) if l != axis]
    col = z[:, [axis]]
    total = 0
    for j, t in itertools.product(ranges[axis], ranges[axis]):
        weight = math.prod(len(o) for o in _completions(j, t, others))
        if weight:
            total += weight * _cross(col * j, col * t, threads)
    return total


def same_component_count(
    w,
    block: DyadicBlock,
    pairing: str = "locked",
    threads: int | None = None,
) -> int:
    """
    `dilated_pair_count` of the single column `w` replicated over every block
    coordinate, assembled from one-dimensional tallies.

    For ratio-locked (j, t) = (k_l p, k_l q) each coordinate constraint reads
    k_l |p w_m - q w_n| < 1, so only the coordinate with the largest j_l binds;
    the same holds for j = t. Each (j, t) contributes the 1-d tally of that
    coordinate, and equal binding pairs are tallied once with a multiplicity.
    """
    w = np.asarray(w, dtype=np.float64).reshape(-1, 1)
    match pairing:
        case "locked":
            pairs = locked_pairs(block)
        case "diagonal":
            pairs = ((j, j) for j in block.tuples())
        case _:
            raise DomainError(f"pairing {pairing!r} does not reduce to one coordinate")
    binding = Counter()
    for j, t in pairs:
        l = int(np.argmax(j))
        binding[(j[l], t[l])] += 1
    return sum(mult * _cross(w * j, w * t, threads) for (j, t), mult in sorted(binding.items()))


def _fold_sums(omega: np.ndarray, M: int) -> np.ndarray:
    sums = omega
    for _ in range(M - 1):
        sums = (sums[:, np.newaxis, :] + omega[np.newaxis, :, :]).reshape(-1, omega.shape[1])
    return sums


def _midpoint_power_integral(omega: np.ndarray, D: np.ndarray, M: int, n: int) -> float:
    K = omega.shape[1]
    h = 2.0 * D / n
    axes = [-D[k] + (np.arange(n) + 0.5) * h[k] for k in range(K)]
    grid = np.stack([a.ravel() for a in np.meshgrid(*axes, indexing="ij")], axis=1)
    total = 0.0
    chunk = max(1, (1 << 22) // max(omega.shape[0], 1))
    for start in range(0, grid.shape[0], chunk):
        phase = grid[start : start + chunk] @ omega.T
        T = np.exp(2j * np.pi * phase).sum(axis=1)
        total += float(np.sum(np.abs(T) ** (2 * M)))
    return total * float(np.prod(h))


def watt_ratio(
    A,
    omega: Callable[[np.ndarray], np.ndarray] | np.ndarray,
    delta,
    M: int,
    resolution: int = 64,
    tol: float = 0.01,
    max_points: int = 1 << 22,
    threads: int | None = None,
) -> WattDiagnostic:
    """
    Compare the number V of solutions of |omega(u_1)+...+omega(u_M) -
    omega(v_1)-...-omega(v_M)| < delta (componentwise, u, v in A^M) with
    delta_1...delta_K times the integral of |sum_u e(omega(u).x)|^(2M) over
    the box [-D_k, D_k], 2 delta_k D_k = 1.

    The integral uses the composite midpoint rule, doubling the points per
    axis until two successive estimates agree to `tol`.

    :raises QuadratureError: when the refinement exceeds `max_points`.
    """
    A = np.asarray(A, dtype=np.int64).ravel()
    if A.size == 0 or M < 1:
        raise DomainError(f"need a nonempty integer set and M >= 1, got {A.size=} {M=}")
    table = omega(A) if callable(omega) else omega
    table = np.asarray(table, dtype=np.float64).reshape(A.size, -1)
    K = table.shape[1]
    delta = _check_gamma(delta, K, upper=None)
    D = 1.0 / (2.0 * delta)

    V = near_collision_count(_fold_sums(table, M), delta, threads=threads)

    n = max(2, int(resolution))
    previous = _midpoint_power_integral(table, D, M, n)
    while True:
        n *= 2
        if n**K > max_points:
            raise QuadratureError(
                f"quadrature did not settle to {tol:.0%} within {max_points} points"
            )
        current = _midpoint_power_integral(table, D, M, n)
        if abs(current - previous) <= tol * abs(current):
            break
        previous = current
    scaled_W = float(np.prod(delta)) * current
    logger.debug(f"watt ratio {V=} {scaled_W=} points per axis {n}")
    return WattDiagnostic(int(V), scaled_W, V / scaled_W, n)
