from __future__ import annotations
from dataclasses import dataclass, field
from typing import Callable
import math

import numpy as np

from ..log import logger
from . import kernels
from .energy import fit_exponent
from .errors import DomainError
from .harmonic import MeasureSpec, Sign, TrigPolynomial, mu_sample, selberg_poly, stream
from .paircorr import r2_count
from .sequences import SequenceMatrix
from .torus import dilate_frac
from .utils import integer_root_ceil, kahan_sum, parallel_map

DEFAULT_SAMPLES = 200


@dataclass
class VarianceEstimate:
    """
    Monte Carlo estimate of the variance of the pair statistic over dilations.

    :param N: sequence length.
    :param r: degree multiplier, the polynomial degree is ceil((rN)^(1/d)).
    :param s: radius.
    :param samples: number of dilation draws.
    :param mean_stat: average pair statistic over the draws.
    :param var_stat: average squared deviation from the analytic centre.
    :param stderr: jackknife standard error of `var_stat`.
    :param seed: seed of the draws.
    :param d: dimension.
    :param sign: plus or minus polynomial.
    :param degree: polynomial degree K.
    :param centre: analytic mean (N-1) times the integral of the polynomial.
    :param mean_offset: c_0 - 2s/N^(1/d), the +-1/(K+1) left at finite r.
    """

    N: int
    r: int
    s: float
    samples: int
    mean_stat: float
    var_stat: float
    stderr: float
    seed: int
    d: int = 1
    sign: str = Sign.PLUS.value
    degree: int = 0
    centre: float = 0.0
    mean_offset: float = 0.0

    def __post_init__(self) -> None:
        self.check_validity()

    def check_validity(self) -> None:
        assert self.var_stat >= 0
        assert self.stderr >= 0
        assert self.samples >= 2
        assert self.N >= 1 and self.d >= 1


@dataclass
class MeanCalibration:
    """
    Monte Carlo mean of the pair statistic next to N times the polynomial mean.

    The gap is expected to be of order 1/N.
    """

    mc_mean: float
    target: float
    gap: float
    stderr: float


@dataclass
class DecayReport:
    """Variance estimates over increasing N with their log-log slope."""

    Ns: list[int]
    estimates: list[VarianceEstimate] = field(default_factory=list)
    slope: float = float("nan")
    slope_stderr: float = float("nan")

    def decreasing(self, k_sigma: float = 2.0) -> bool:
        """Whether each estimate drops below the previous one by k_sigma combined standard errors."""
        pairs = zip(self.estimates, self.estimates[1:])
        return all(
            a.var_stat - b.var_stat > k_sigma * math.hypot(a.stderr, b.stderr) for a, b in pairs
        )


def majorant_degree(N: int, r: int, d: int) -> int:
    """ceil((rN)^(1/d)), computed in integers."""
    if N < 1 or r < 1 or d < 1:
        raise DomainError(f"invalid degree parameters {N=} {r=} {d=}")
    return integer_root_ceil(r * N, d)


def _scale(N: int, d: int) -> float:
    return N ** (1.0 / d)


def selberg_factor(N: int, s: float, r: int, d: int, sign: Sign | str) -> TrigPolynomial:
    """One coordinate factor of the d-fold product polynomial for N points."""
    return selberg_poly(majorant_degree(N, r, d), s, _scale(N, d), sign)


def polynomial_mean(N: int, s: float, r: int, d: int, sign: Sign | str) -> float:
    """
    Integral of the d-dimensional polynomial over the torus.

    c_0^d for the majorant; for the minorant the product combination
    d c0- (c0+)^(d-1) - (d-1) (c0+)^d.
    """
    sign = Sign(sign)
    K = majorant_degree(N, r, d)
    width = 2.0 * s / _scale(N, d)
    plus = width + 1.0 / (K + 1)
    if sign is Sign.PLUS:
        return plus**d
    minus = width - 1.0 / (K + 1)
    return d * minus * plus ** (d - 1) - (d - 1) * plus**d


def statistic_centre(N: int, d: int, s: float, r: int, sign: Sign | str) -> float:
    """Analytic mean of the pair statistic, (N-1) times the polynomial mean."""
    return (N - 1) * polynomial_mean(N, s, r, d, sign)


def _outer(vectors: list[np.ndarray]) -> np.ndarray:
    out = vectors[0]
    for v in vectors[1:]:
        out = np.multiply.outer(out, v)
    return out


def coefficient_tensor(N: int, s: float, r: int, d: int, sign: Sign | str) -> np.ndarray:
    """Coefficients of the d-dimensional polynomial indexed by (|j_1|, ..., |j_d|)."""
    sign = Sign(sign)
    plus = selberg_factor(N, s, r, d, Sign.PLUS).coeffs
    if sign is Sign.PLUS:
        return _outer([plus] * d)
    minus = selberg_factor(N, s, r, d, Sign.MINUS).coeffs
    if d == 1:
        return minus
    total = -(d - 1) * _outer([plus] * d)
    for l in range(d):
        total = total + _outer([minus if k == l else plus for k in range(d)])
    return total


def _value_at_zero(C: np.ndarray) -> float:
    # each nonzero |j_l| stands for both j_l and -j_l
    w = np.full(C.shape[0], 2.0)
    w[0] = 1.0
    return float(np.sum(C * _outer([w] * C.ndim)))


def _fourier_pair_sum(y: np.ndarray, C: np.ndarray) -> float:
    """sum_j C[|j|] |sum_n e(j . y_n)|^2 for d >= 2 through per-coordinate power tables."""
    N, d = y.shape
    K = C.shape[0] - 1
    k = np.arange(-K, K + 1, dtype=np.float64)
    tables = []
    for l in range(d):
        t = np.outer(y[:, l], k)
        tables.append(np.exp(2j * np.pi * (t - np.floor(t))))
    P = tables[0]
    for E in tables[1:-1]:
        P = (P[:, :, np.newaxis] * E[:, np.newaxis, :]).reshape(N, -1)
    S = (P.T @ tables[-1]).reshape((2 * K + 1,) * d)
    idx = np.abs(np.arange(-K, K + 1))
    C_full = C[np.ix_(*([idx] * d))]
    return float(np.sum(C_full * (S.real**2 + S.imag**2)))


def pair_statistic(
    x: SequenceMatrix,
    alpha,
    s: float,
    r: int = 1,
    sign: Sign | str = Sign.PLUS,
    coefficients: np.ndarray | None = None,
) -> float:
    """
    (1/N) sum over m != n of the d-dimensional polynomial at the dilated differences.

    Evaluated as (sum_j C_j |S_j|^2 - N F(0)) / N with S_j the exponential
    sums of the dilated points, so the cost is linear in N per frequency.

    :param coefficients: precomputed `coefficient_tensor`, reused across dilations.
    """
    N, d = x.N, x.d
    if N < 2:
        return 0.0
    C = coefficient_tensor(N, s, r, d, sign) if coefficients is None else coefficients
    y = dilate_frac(x, alpha).points
    if d == 1:
        total = kernels.fourier_pair_sum_1d(np.ascontiguousarray(y[:, 0]), np.ascontiguousarray(C))
    else:
        total = _fourier_pair_sum(y, C)
    return (total - N * _value_at_zero(C)) / N


def exact_pair_statistic(x: SequenceMatrix, alpha, s: float) -> float:
    """(1/N) number of ordered pairs whose dilated difference is within s / N^(1/d)."""
    return r2_count(dilate_frac(x, alpha), s)


def _draw(spec: MeasureSpec, seed: int, index: int) -> np.ndarray:
    return mu_sample(spec, 1, rng=stream(seed, index))[0]


def _jackknife_mean_stderr(values: np.ndarray) -> float:
    n = values.size
    total = kahan_sum(values)
    leave_one_out = (total - values) / (n - 1)
    centred = leave_one_out - kahan_sum(leave_one_out) / n
    return math.sqrt((n - 1) / n * kahan_sum(centred * centred))


def monte_carlo_variance(
    statistic: Callable[[np.ndarray], float],
    centre: float,
    samples: int,
    seed: int,
    spec: MeasureSpec,
    threads: int | None = None,
) -> tuple[float, float, float]:
    """
    Mean of `statistic` and mean squared deviation from `centre` over draws
    from `spec`, with the jackknife standard error of the latter.

    Draw i uses the stream (seed, i); sums run in index order, so the result
    does not depend on the number of workers.
    """
    if samples < 2:
        raise DomainError(f"need at least 2 draws, got {samples=}")
    values = np.array(
        parallel_map(lambda i: float(statistic(_draw(spec, seed, i))), range(samples), threads)
    )
    squared = (values - centre) ** 2
    mean_stat = kahan_sum(values) / samples
    var_stat = kahan_sum(squared) / samples
    return mean_stat, var_stat, _jackknife_mean_stderr(squared)


def mean_calibration(
    x: SequenceMatrix,
    s: float,
    r: int = 1,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    sign: Sign | str = Sign.PLUS,
    gamma: float = 0.5,
    threads: int | None = None,
) -> MeanCalibration:
    """Monte Carlo mean of the pair statistic against N times the polynomial mean."""
    if samples < 2:
        raise DomainError(f"need at least 2 draws, got {samples=}")
    N, d = x.N, x.d
    target = N * polynomial_mean(N, s, r, d, sign)
    if N < 2:
        return MeanCalibration(0.0, target, abs(target), 0.0)
    C = coefficient_tensor(N, s, r, d, sign)
    spec = MeasureSpec.uniform(d, gamma)
    values = np.array(
        parallel_map(
            lambda i: pair_statistic(x, _draw(spec, seed, i), s, r, sign, C), range(samples), threads
        )
    )
    mc_mean = kahan_sum(values) / samples
    return MeanCalibration(mc_mean, target, abs(mc_mean - target), _jackknife_mean_stderr(values))


def variance_estimate(
    x: SequenceMatrix,
    s: float,
    r: int = 1,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    sign: Sign | str = Sign.PLUS,
    gamma: float = 0.5,
    threads: int | None = None,
) -> VarianceEstimate:
    """
    Estimate the variance of the pair statistic over dilations drawn from
    the sin^2 measure, centred at its analytic mean.
    """
    sign = Sign(sign)
    N, d = x.N, x.d
    K = majorant_degree(N, r, d)
    centre = statistic_centre(N, d, s, r, sign)
    offset = sign.factor / (K + 1)
    if N < 2:
        return VarianceEstimate(N, r, s, samples, 0.0, 0.0, 0.0, seed, d, sign.value, K, centre, offset)
    C = coefficient_tensor(N, s, r, d, sign)
    logger.info(f"estimating variance {N=} {d=} {K=} {samples=} {seed=}")
    mean_stat, var_stat, stderr = monte_carlo_variance(
        lambda a: pair_statistic(x, a, s, r, sign, C),
        centre,
        samples,
        seed,
        MeasureSpec.uniform(d, gamma),
        threads,
    )
    return VarianceEstimate(
        N, r, s, samples, mean_stat, var_stat, stderr, seed, d, sign.value, K, centre, offset
    )


def variance_decay(
    x: SequenceMatrix,
    Ns: list[int],
    s: float,
    r: int = 1,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    sign: Sign | str = Sign.PLUS,
    gamma: float = 0.5,
    threads: int | None = None,
) -> DecayReport:
    """Variance estimates on the prefixes of `x` of every length in `Ns`."""
    report = DecayReport(list(Ns))
    for N in Ns:
        report.estimates.append(variance_estimate(x.head(N), s, r, samples, seed, sign, gamma, threads))
    vars_ = [e.var_stat for e in report.estimates]
    if len(Ns) >= 3 and all(v > 0 for v in vars_):
        report.slope, report.slope_stderr = fit_exponent(Ns, vars_)
    return report
