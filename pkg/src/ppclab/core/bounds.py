"""Theoretical exponents and envelopes that annotate measured energies."""
from __future__ import annotations
import math

import numpy as np

from .errors import DomainError


def same_component_threshold(d: int) -> float:
    """Energy exponent below which a single dilated sequence is metric PPC in d dimensions."""
    if d < 1:
        raise DomainError(f"dimension must be positive, got {d=}")
    return 183 / 76 + (16 / 76) * (1 - 1 / d)


def joint_threshold(d: int, d_prime: int) -> float:
    """Exponent the joint energy of a d'-column subset has to stay below."""
    if not 1 <= d_prime <= d:
        raise DomainError(f"need 1 <= d' <= d, got {d=} {d_prime=}")
    return 4 - (2 * d_prime - 31 / 76) / d


def power_energy_exponent(thetas) -> float:
    """Predicted energy exponent max(2, 4 - max theta) of (n^theta_1, ..., n^theta_d)."""
    thetas = np.atleast_1d(np.asarray(thetas, dtype=np.float64))
    if np.any(thetas <= 0):
        raise DomainError("power exponents must be positive")
    return max(2.0, 4.0 - float(thetas.max()))


def robert_sargos_envelope(B: float, gamma: float, theta: float) -> float:
    """B^2 + gamma B^(4 - theta): the order of the window tally over [B, 2B]."""
    if B < 1 or gamma <= 0 or theta <= 0:
        raise DomainError(f"invalid envelope parameters {B=} {gamma=} {theta=}")
    return B**2 + gamma * B ** (4 - theta)


def nlog_joint_envelope(N: float, A: float) -> float:
    """N^2 (log N)^(A+2) + N^2 (log N)^(5-A) for the pair (n, n log^A n)."""
    if N < 3 or A < 1:
        raise DomainError(f"need N >= 3 and A >= 1, got {N=} {A=}")
    L = math.log(N)
    return N**2 * L ** (A + 2) + N**2 * L ** (5 - A)


def second_derivative_envelope(N: float, F2: float, M: float) -> float:
    """
    min{N^3, N^3/M + N^3 |F''| + N log M / |F''|} for (n, F(n)) with |F''|
    of constant size on [N, 2N].
    """
    if N < 1 or M < 2 or F2 == 0:
        raise DomainError(f"invalid envelope parameters {N=} {F2=} {M=}")
    F2 = abs(F2)
    return min(N**3, N**3 / M + N**3 * F2 + N * math.log(M) / F2)


def exponent_verdict(slope: float, stderr: float, threshold: float, k_sigma: float = 2.0) -> bool:
    """Whether a fitted exponent stays below `threshold` by `k_sigma` standard errors."""
    return slope + k_sigma * stderr < threshold
