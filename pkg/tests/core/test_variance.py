import itertools
import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from src.ppclab.core import (
    MeasureSpec,
    SequenceMatrix,
    Sign,
    VarianceEstimate,
    gen_power,
    pair_statistic,
    variance_decay,
    variance_estimate,
)
from src.ppclab.core.harmonic import mu_density, tensor_eval, tensor_minorant_eval
from src.ppclab.core.torus import dilate_frac
from src.ppclab.core.variance import (
    DecayReport,
    coefficient_tensor,
    exact_pair_statistic,
    majorant_degree,
    mean_calibration,
    monte_carlo_variance,
    polynomial_mean,
    selberg_factor,
    statistic_centre,
)
from .tools import random_sequence


def direct_statistic(x: SequenceMatrix, alpha, s: float, r: int, sign: Sign) -> float:
    """(1/N) sum over m != n of the d-dimensional polynomial at the dilated differences."""
    N, d = x.N, x.d
    y = dilate_frac(x, alpha).points
    diffs = np.array([y[n] - y[m] for m, n in itertools.permutations(range(N), 2)])
    plus = [selberg_factor(N, s, r, d, Sign.PLUS)] * d
    if sign is Sign.PLUS:
        values = tensor_eval(plus, diffs)
    else:
        minus = [selberg_factor(N, s, r, d, Sign.MINUS)] * d
        values = tensor_minorant_eval(minus, plus, diffs)
    return float(np.sum(values)) / N


class TestDegree:

    @pytest.mark.parametrize("N,r,d,K", [(1024, 1, 1, 1024), (1000, 1, 3, 10), (1001, 1, 3, 11), (50, 2, 2, 10)])
    def test_integer_ceiling(self, N, r, d, K):
        assert majorant_degree(N, r, d) == K

    def test_centre(self):
        N, s = 100, 1.0
        c0 = 2 * s / 10 + 1 / 11
        assert statistic_centre(N, 2, s, 1, Sign.PLUS) == pytest.approx(99 * c0**2)
        assert polynomial_mean(N, s, 1, 1, "plus") == pytest.approx(2 * s / 100 + 1 / 101)


class TestPairStatistic:

    def test_single_point(self):
        assert pair_statistic(SequenceMatrix([[3.0]]), [0.7], 0.5) == 0.0

    def test_zero_dilation(self):
        x = gen_power([1.5, 2.5], 16)
        f = selberg_factor(16, 0.5, 1, 2, Sign.PLUS)
        assert pair_statistic(x, [0.0, 0.0], 0.5) == pytest.approx(15 * f(0.0) ** 2)

    def test_two_points(self):
        x = SequenceMatrix([[1.0], [2.0]])
        f = selberg_factor(2, 0.5, 1, 1, Sign.PLUS)
        # both ordered pairs sit at +-1/2 and the polynomial is even
        assert pair_statistic(x, [0.5], 0.5) == pytest.approx(f(0.5))

    @pytest.mark.parametrize("d,sign", [(1, Sign.PLUS), (1, Sign.MINUS), (2, Sign.PLUS), (2, Sign.MINUS), (3, Sign.MINUS)])
    def test_matches_direct_evaluation(self, d, sign):
        rng = np.random.default_rng(31 + d)
        x = random_sequence(rng, 27, d)
        alpha = rng.uniform(-3, 3, d)
        assert pair_statistic(x, alpha, 1.0, 1, sign) == pytest.approx(
            direct_statistic(x, alpha, 1.0, 1, sign), abs=1e-9
        )

    def test_long_recurrence_stays_accurate(self):
        x = gen_power([2.5], 400)
        alpha = [0.8123]
        assert pair_statistic(x, alpha, 1.0, 1) == pytest.approx(
            direct_statistic(x, alpha, 1.0, 1, Sign.PLUS), abs=1e-8
        )

    def test_sandwiches_the_exact_statistic(self):
        rng = np.random.default_rng(40)
        x = random_sequence(rng, 64, 2)
        for _ in range(5):
            alpha = rng.uniform(-2, 2, 2)
            exact = exact_pair_statistic(x, alpha, 1.0)
            assert pair_statistic(x, alpha, 1.0, 1, Sign.MINUS) <= exact + 1e-9
            assert pair_statistic(x, alpha, 1.0, 1, Sign.PLUS) >= exact - 1e-9

    def test_reuses_coefficients(self):
        x = gen_power([2.5], 50)
        C = coefficient_tensor(50, 1.0, 1, 1, Sign.PLUS)
        assert pair_statistic(x, [0.3], 1.0, coefficients=C) == pair_statistic(x, [0.3], 1.0)


class TestMonteCarlo:

    def test_constant_statistic(self):
        mean, var, stderr = monte_carlo_variance(lambda a: 3.0, 1.0, 10, 0, MeasureSpec.uniform(1))
        assert (mean, var, stderr) == (3.0, 4.0, 0.0)

    def test_single_point_sequence(self):
        est = variance_estimate(SequenceMatrix([[2.0]]), 0.5, samples=10, seed=1)
        assert est.var_stat == 0.0 and est.mean_stat == 0.0

    def test_mean_calibration_single_point(self):
        cal = mean_calibration(SequenceMatrix([[2.0]]), 0.4, samples=10, seed=1)
        assert cal.mc_mean == 0.0
        assert cal.target == pytest.approx(0.8 + 0.5)

    def test_reproducible_across_workers(self):
        x = gen_power([2.5], 128)
        a = variance_estimate(x, 1.0, samples=16, seed=9, threads=1)
        b = variance_estimate(x, 1.0, samples=16, seed=9, threads=4)
        assert a == b
        assert a.degree == 128 and a.mean_offset == pytest.approx(1 / 129)

    def test_estimate_validity(self):
        with pytest.raises(AssertionError):
            VarianceEstimate(10, 1, 1.0, 20, 0.0, -1.0, 0.0, 0)

    def test_decreasing_verdict(self):
        def est(N, var, err):
            return VarianceEstimate(N, 1, 1.0, 200, 0.0, var, err, 0)

        report = DecayReport([1, 2, 3], [est(1, 10.0, 1.0), est(2, 5.0, 1.0), est(3, 1.0, 0.5)])
        assert report.decreasing()
        report.estimates[2] = est(3, 4.0, 0.5)
        assert not report.decreasing()

    def test_mean_is_close_to_polynomial_mean(self):
        # consecutive gaps exceed 1, so only the zero frequency survives the average
        x = gen_power([2.5], 256)
        cal = mean_calibration(x, 1.0, samples=200, seed=3)
        assert cal.gap <= cal.target / 256 + 4 * cal.stderr + 1e-9

    def test_variance_matches_quadrature(self):
        f = selberg_factor(16, 1.0, 1, 1, Sign.PLUS)
        spec = MeasureSpec.uniform(1)
        x = np.linspace(-1000.0, 1000.0, 2_000_001)
        truth = trapezoid((f(x) - f.mean) ** 2 * mu_density(x.reshape(-1, 1), spec), x)
        # the periodised density is flat, so the integral is the L2 mass of the non-constant part
        assert truth == pytest.approx(2.0 * np.sum(f.coeffs[1:] ** 2), rel=2e-3)
        mean, var, stderr = monte_carlo_variance(lambda a: f(a[0]), f.mean, 20_000, 17, spec)
        assert abs(var - truth) <= 4 * stderr + 2e-3 * truth
        assert mean == pytest.approx(f.mean, abs=4 * math.sqrt(truth / 20_000))

    @pytest.mark.slow
    def test_variance_decays_for_power_sequence(self):
        x = gen_power([2.5], 4096)
        report = variance_decay(x, [2**8, 2**10, 2**12], 1.0, 1, 200, seed=2024)
        assert report.decreasing(k_sigma=2.0)
        assert report.slope < 0
