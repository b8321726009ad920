from __future__ import annotations
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable, Sequence
import math

import numpy as np
from numpy.random import Generator, PCG64
from scipy.integrate import trapezoid
from scipy.special import sici

from .errors import DomainError
from .utils import as_matrix, as_vector

# inverse-CDF table of the unit-bandwidth sin^2 law on the half line
_Y_MAX = 1.0e4
_KNOTS = 1 << 14
_BISECTIONS = 52


class Sign(Enum):
    PLUS = "plus"
    MINUS = "minus"

    @property
    def factor(self) -> int:
        return 1 if self is Sign.PLUS else -1


@dataclass
class TrigPolynomial:
    """
    Even real trigonometric polynomial c_0 + 2 sum_{j=1}^K c_j cos(2 pi j x).

    Built by `selberg_poly` as a majorant (plus) or minorant (minus) of the
    indicator of ||x|| <= s / scale on the circle.

    :param degree: K.
    :param coeffs: c_0, ..., c_K; c_{-j} = c_j.
    :param sign: plus for a majorant, minus for a minorant.
    :param s: radius.
    :param scale: length scale dividing the radius.
    """

    degree: int
    coeffs: np.ndarray
    sign: Sign
    s: float
    scale: float

    def __post_init__(self) -> None:
        self.coeffs = np.asarray(self.coeffs, dtype=np.float64)
        self.check_validity()

    @property
    def half_width(self) -> float:
        return self.s / self.scale

    @property
    def mean(self) -> float:
        """Integral over one period, the constant coefficient."""
        return float(self.coeffs[0])

    def coefficient(self, j: int) -> float:
        j = abs(int(j))
        return float(self.coeffs[j]) if j <= self.degree else 0.0

    def full_coefficients(self) -> np.ndarray:
        """Coefficients for j = -K, ..., K as a complex array."""
        c = self.coeffs.astype(np.complex128)
        return np.concatenate([c[:0:-1], c])

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        flat = x.ravel()
        h = np.arange(1, self.degree + 1, dtype=np.float64)
        out = np.empty_like(flat)
        step = max(1, (1 << 22) // self.degree)
        for lo in range(0, flat.size, step):
            part = flat[lo : lo + step]
            phase = 2.0 * np.pi * np.outer(part, h)
            out[lo : lo + step] = self.coeffs[0] + 2.0 * np.cos(phase) @ self.coeffs[1:]
        out = out.reshape(x.shape)
        return float(out) if out.ndim == 0 else out

    def check_validity(self) -> None:
        assert self.degree >= 1
        assert self.coeffs.shape == (self.degree + 1,)
        assert self.s > 0 and self.scale > 0
        width = 2.0 * self.half_width
        tail = 1.0 / (self.degree + 1)
        assert abs(self.coeffs[0] - (width + self.sign.factor * tail)) <= 1e-12
        j = np.arange(1, self.degree + 1)
        bound = np.minimum(width, 1.0 / (np.pi * j)) + tail
        assert np.all(np.abs(self.coeffs[1:]) <= bound + 1e-12)


def vaaler_weight(u):
    """pi u (1-u) cot(pi u) + u, the weight of the sawtooth approximation, for 0 < u < 1."""
    u = np.asarray(u, dtype=np.float64)
    return np.pi * u * (1.0 - u) / np.tan(np.pi * u) + u


def selberg_poly(K: int, s: float, scale: float, sign: Sign | str) -> TrigPolynomial:
    """
    Degree-K majorant or minorant of the indicator of ||x|| <= s/scale.

    Built from the sawtooth approximation with Fejer error term, which gives
    the mean 2s/scale +- 1/(K+1).

    :raises DomainError: when 2s/scale > 1, K < 1 or s, scale are not positive.
    """
    sign = Sign(sign)
    if K < 1:
        raise DomainError(f"degree must be at least 1, got {K=}")
    if not (s > 0 and scale > 0):
        raise DomainError(f"radius and scale must be positive, got {s=} {scale=}")
    delta = s / scale
    if 2.0 * delta > 1.0:
        raise DomainError(f"interval of length {2 * delta} exceeds the circle")
    h = np.arange(1, K + 1, dtype=np.float64)
    u = h / (K + 1)
    c = np.empty(K + 1)
    c[0] = 2.0 * delta + sign.factor / (K + 1)
    c[1:] = vaaler_weight(u) * np.sin(2 * np.pi * h * delta) / (np.pi * h) + sign.factor * (
        1.0 - u
    ) * np.cos(2 * np.pi * h * delta) / (K + 1)
    return TrigPolynomial(K, c, sign, float(s), float(scale))


def indicator(x, s: float, scale: float):
    """Inclusive indicator of ||x|| <= s/scale on the circle."""
    x = np.asarray(x, dtype=np.float64)
    return (np.abs(x - np.rint(x)) <= s / scale).astype(np.float64)


def _factor_values(polys: Sequence[TrigPolynomial], x) -> np.ndarray:
    x = as_matrix(np.atleast_2d(np.asarray(x, dtype=np.float64)), "x")
    if x.shape[1] != len(polys):
        raise DomainError(f"points have {x.shape[1]} coordinates, got {len(polys)} factors")
    return np.column_stack([p(x[:, l]) for l, p in enumerate(polys)])


def _squeeze(out: np.ndarray, x):
    return float(out[0]) if np.ndim(x) <= 1 else out


def tensor_eval(polys: Sequence[TrigPolynomial], x):
    """Product of the factor evaluations at a point (d-vector) or at rows of an (n, d) array."""
    return _squeeze(_factor_values(polys, x).prod(axis=1), x)


def tensor_coefficient(polys: Sequence[TrigPolynomial], j: Sequence[int]) -> float:
    """Coefficient of the product polynomial at the multi-index j."""
    if len(j) != len(polys):
        raise DomainError(f"multi-index {j} does not match {len(polys)} factors")
    return math.prod(p.coefficient(jl) for p, jl in zip(polys, j))


def tensor_minorant_eval(
    minus: Sequence[TrigPolynomial], plus: Sequence[TrigPolynomial], x
):
    """
    Minorant of the product indicator:
    sum_l f-_l prod_{k != l} f+_k - (d-1) prod_k f+_k.

    Equals the single minorant when d = 1.
    """
    lo = _factor_values(minus, x)
    hi = _factor_values(plus, x)
    d = lo.shape[1]
    total = -(d - 1) * hi.prod(axis=1)
    for l in range(d):
        others = np.delete(hi, l, axis=1).prod(axis=1)
        total = total + lo[:, l] * others
    return _squeeze(total, x)


def tensor_minorant_mean(minus: TrigPolynomial, plus: TrigPolynomial, d: int) -> float:
    """Integral over [0,1)^d of `tensor_minorant_eval` with identical factors."""
    return d * minus.mean * plus.mean ** (d - 1) - (d - 1) * plus.mean**d


@dataclass
class SelbergCheck:
    """
    Residuals of one (K, s, scale) triple; a margin is negative only when a
    property is violated.

    :param c0_error: largest |c_0 - (2s/scale +- 1/(K+1))| over both signs.
    :param coef_margin: smallest slack in |c_j| <= min(2s/scale, 1/(pi j)) + 1/(K+1).
    :param sandwich_margin: smallest slack in f- <= indicator <= f+ on the grid.
    :param tensor_margin: the same for the d-fold product majorant and minorant.
    """

    K: int
    s: float
    scale: float
    c0_error: float
    coef_margin: float
    sandwich_margin: float
    tensor_margin: float

    def passed(self, tol: float = 1e-12) -> bool:
        return (
            self.c0_error <= tol
            and self.coef_margin >= -tol
            and self.sandwich_margin >= -1e-9
            and self.tensor_margin >= -1e-9
        )


def _coef_margin(p: TrigPolynomial) -> float:
    j = np.arange(1, p.degree + 1)
    bound = np.minimum(2.0 * p.half_width, 1.0 / (np.pi * j)) + 1.0 / (p.degree + 1)
    return float(np.min(bound - np.abs(p.coeffs[1:])))


def check_selberg(
    K: int,
    s: float,
    scale: float,
    grid: int = 10_000,
    tensor_points: int = 1_000,
    d: int = 3,
    rng: Generator | None = None,
) -> SelbergCheck:
    """
    Verify the coefficient identities of both polynomials and the pointwise
    sandwich on `grid` equispaced points and, for the d-fold products, on
    `tensor_points` uniform points.
    """
    plus = selberg_poly(K, s, scale, Sign.PLUS)
    minus = selberg_poly(K, s, scale, Sign.MINUS)
    width = 2.0 * s / scale
    c0_error = max(abs(plus.mean - (width + 1.0 / (K + 1))), abs(minus.mean - (width - 1.0 / (K + 1))))

    x = np.arange(grid, dtype=np.float64) / grid
    # the interval endpoints are where the sandwich is tightest
    x = np.concatenate([x, [s / scale, 1.0 - s / scale]])
    chi = indicator(x, s, scale)
    sandwich = min(float(np.min(plus(x) - chi)), float(np.min(chi - minus(x))))

    rng = rng if rng is not None else Generator(PCG64(0))
    pts = rng.random((tensor_points, d))
    chi_d = indicator(pts, s, scale).prod(axis=1)
    upper = tensor_eval([plus] * d, pts) - chi_d
    lower = chi_d - tensor_minorant_eval([minus] * d, [plus] * d, pts)
    tensor = min(float(np.min(upper)), float(np.min(lower)))

    return SelbergCheck(
        K, float(s), float(scale), c0_error, min(_coef_margin(plus), _coef_margin(minus)), sandwich, tensor
    )


@dataclass
class MeasureSpec:
    """
    Product measure with density prod_l sin^2(gamma_l x_l) / (pi gamma_l x_l^2).

    gamma = 1/2 in every coordinate gives density prod 2 sin^2(x_l/2) / (pi x_l^2).
    """

    gamma: tuple[float, ...]

    def __post_init__(self) -> None:
        self.gamma = tuple(float(g) for g in np.atleast_1d(self.gamma))
        self.check_validity()

    @classmethod
    def uniform(cls, d: int, gamma: float = 0.5) -> MeasureSpec:
        return cls(tuple([gamma] * d))

    @property
    def d(self) -> int:
        return len(self.gamma)

    def check_validity(self) -> None:
        assert self.d >= 1
        assert all(g > 0 and math.isfinite(g) for g in self.gamma), "bandwidths are positive"


def _fejer_density(x: np.ndarray, g: float) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    safe = np.where(x == 0.0, 1.0, x)
    val = np.sin(g * safe) ** 2 / (np.pi * g * safe**2)
    return np.where(x == 0.0, g / np.pi, val)


def mu_density(x, spec: MeasureSpec):
    """Density of the measure at a point or at rows of an (n, d) array."""
    pts = np.atleast_2d(np.asarray(x, dtype=np.float64))
    out = np.ones(pts.shape[0])
    for l, g in enumerate(spec.gamma):
        out = out * _fejer_density(pts[:, l], g)
    return _squeeze(out, x)


def mu_hat(t, spec: MeasureSpec) -> float:
    """Fourier transform prod_l max(1 - |t_l| / (2 gamma_l), 0)."""
    t = as_vector(t, "t")
    if t.shape[0] != spec.d:
        raise DomainError(f"frequency has {t.shape[0]} coordinates, measure has {spec.d}")
    g = np.asarray(spec.gamma)
    return float(np.prod(np.maximum(1.0 - np.abs(t) / (2.0 * g), 0.0)))


def _half_cdf(y: np.ndarray) -> np.ndarray:
    """CDF of |Y| for Y with density sin^2(y) / (pi y^2)."""
    y = np.asarray(y, dtype=np.float64)
    safe = np.where(y == 0.0, 1.0, y)
    si, _ = sici(2.0 * safe)
    val = (2.0 / np.pi) * (si - np.sin(safe) ** 2 / safe)
    return np.where(y == 0.0, 0.0, val)


@lru_cache(maxsize=1)
def _cdf_table() -> tuple[np.ndarray, np.ndarray, float]:
    knots = np.linspace(0.0, _Y_MAX, _KNOTS)
    values = np.maximum.accumulate(_half_cdf(knots))
    return knots, values, float(values[-1])


def _inverse_half_cdf(u: np.ndarray) -> np.ndarray:
    knots, values, top = _cdf_table()
    y = np.empty_like(u)
    tail = u >= top
    # past the table the tail mass is 1/(pi y) to leading order
    y[tail] = 1.0 / (np.pi * (1.0 - u[tail]))
    body = u[~tail]
    idx = np.clip(np.searchsorted(values, body), 1, knots.size - 1)
    lo, hi = knots[idx - 1].copy(), knots[idx].copy()
    for _ in range(_BISECTIONS):
        mid = 0.5 * (lo + hi)
        below = _half_cdf(mid) < body
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    y[~tail] = 0.5 * (lo + hi)
    return y


def stream(seed: int, index: int = 0) -> Generator:
    """Independent generator for draw `index` of a run seeded with `seed`."""
    return Generator(PCG64([int(seed), int(index)]))


def mu_sample(spec: MeasureSpec, n: int, seed: int | None = None, rng: Generator | None = None) -> np.ndarray:
    """
    n i.i.d. draws from the measure, shape (n, d).

    Each coordinate is +-Y/gamma_l with |Y| drawn by inverting its exact CDF.
    """
    if n < 1:
        raise DomainError(f"need at least one draw, got {n=}")
    rng = rng if rng is not None else Generator(PCG64(seed))
    u = rng.random((n, spec.d))
    negative = rng.random((n, spec.d)) < 0.5
    y = _inverse_half_cdf(u.ravel()).reshape(n, spec.d)
    y = np.where(negative, -y, y)
    return y / np.asarray(spec.gamma)[np.newaxis, :]


def characteristic(samples: np.ndarray, t) -> tuple[float, float]:
    """Empirical E cos(t . X) with its standard error; the sine part vanishes by symmetry."""
    samples = np.atleast_2d(samples)
    vals = np.cos(samples @ as_vector(t, "t"))
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(vals.size))


@dataclass
class KernelParams:
    """
    Parameters of the kernel K.

    :param d: dimension.
    :param delta: positive excess.
    :param N: scale, at least 3 so that log N > 1.
    """

    d: int
    delta: float
    N: float

    def __post_init__(self) -> None:
        self.check_validity()

    @property
    def bandwidth(self) -> float:
        """(1/d + delta/d) log N."""
        return (1.0 + self.delta) / self.d * math.log(self.N)

    def check_validity(self) -> None:
        assert self.d >= 1
        assert self.delta > 0
        assert self.N >= 3


def k_kernel(xi, p: KernelParams):
    """sin^2(b xi) / (pi b xi^2) with b the bandwidth; K(0) = b/pi."""
    out = _fejer_density(xi, p.bandwidth)
    return float(out) if np.ndim(out) == 0 else out


def k_hat(v, p: KernelParams):
    """Fourier transform max(1 - |v| / (2b), 0)."""
    out = np.maximum(1.0 - np.abs(np.asarray(v, dtype=np.float64)) / (2.0 * p.bandwidth), 0.0)
    return float(out) if out.ndim == 0 else out


def k_hat_numeric(v: float, p: KernelParams, tail: float = 1e-4) -> float:
    """
    Trapezoid Fourier transform of `k_kernel` on [-R, R].

    R is chosen so that the mass of K outside [-R, R] is about `tail`.
    """
    b = p.bandwidth
    R = 1.0 / (np.pi * b * tail)
    h = np.pi / (16.0 * (2.0 * b + abs(v)))
    xi = np.linspace(0.0, R, int(math.ceil(R / h)) + 1)
    return float(2.0 * trapezoid(k_kernel(xi, p) * np.cos(v * xi), xi))


def exp_sum(phases) -> complex:
    """sum_n e(f(n)) for a table of phases f(n)."""
    phases = np.asarray(phases, dtype=np.float64)
    if phases.size == 0:
        raise DomainError("exponential sum over an empty interval")
    return complex(np.exp(2j * np.pi * phases).sum())


def vdc_bound(lam: float, alpha: float, length: int) -> float:
    """alpha |I| lam^(1/2) + lam^(-1/2), second-derivative bound on |sum e(f(n))|."""
    if not lam > 0 or alpha < 1:
        raise DomainError(f"need lam > 0 and alpha >= 1, got {lam=} {alpha=}")
    return alpha * length * math.sqrt(lam) + 1.0 / math.sqrt(lam)


@dataclass
class ExpSumDiagnostic:
    value: complex
    lam: float
    alpha: float
    bound: float


def exp_sum_diagnostic(f: Callable[[np.ndarray], np.ndarray], a: int, b: int) -> ExpSumDiagnostic:
    """
    Exponential sum of f over [a, b] next to its second-derivative bound.

    lam and alpha are read off the second differences of f, which stand in
    for f'' on the integers.
    """
    if b - a < 2:
        raise DomainError(f"interval [{a}, {b}] is too short for second differences")
    n = np.arange(a, b + 1, dtype=np.float64)
    phases = np.asarray(f(n), dtype=np.float64)
    second = np.abs(np.diff(phases, n=2))
    lam = float(second.min())
    if lam <= 0:
        raise DomainError("second differences vanish; no curvature bound applies")
    alpha = float(second.max()) / lam
    return ExpSumDiagnostic(exp_sum(phases), lam, alpha, vdc_bound(lam, alpha, n.size))
