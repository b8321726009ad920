import math

import numpy as np
import pytest

from src.ppclab.core import (
    DomainError,
    DyadicBlock,
    EnergyReport,
    QuadratureError,
    SequenceMatrix,
    block_energy,
    brute_energy,
    dilated_pair_count,
    energy_1d,
    energy_report,
    fit_exponent,
    gen_nlog,
    gen_power,
    joint_energy,
    watt_ratio,
)
from src.ppclab.core.energy import (
    dyadic_block_counts,
    dyadic_blocks,
    pair_differences,
    ratio_locked_pairs,
    same_component_bound,
    same_component_count,
    window_energy,
)
from .tools import closed_form_energy, integer_energy, oracle_energy, random_sequence


def naturals(N: int) -> np.ndarray:
    return np.arange(1, N + 1, dtype=np.float64)


class TestEnergy1d:

    def test_examples(self):
        assert energy_1d(naturals(3), 1.0) == 19
        assert energy_1d(naturals(2), 1.0) == 6
        assert energy_1d(np.array([math.pi]), 0.3) == 1

    def test_closed_form(self):
        x = naturals(64)
        for N in range(2, 65):
            assert energy_1d(x, 1.0, N) == closed_form_energy(N)
        assert energy_1d(x, 1.0, 64) == 174784

    def test_closed_form_against_brute_force(self):
        for N in range(2, 17):
            assert brute_energy(naturals(N).reshape(-1, 1), [1.0]) == closed_form_energy(N)

    def test_gamma_domain(self):
        with pytest.raises(DomainError):
            energy_1d(naturals(4), 1.5)
        with pytest.raises(DomainError):
            energy_1d(naturals(4), 0.0)

    def test_monotone_in_gamma_and_N(self):
        x = random_sequence(np.random.default_rng(9), 40, 1).values[:, 0]
        by_gamma = [energy_1d(x, g) for g in (0.1, 0.3, 0.6, 1.0)]
        assert by_gamma == sorted(by_gamma)
        by_N = [energy_1d(x, 0.5, N) for N in (5, 10, 20, 40)]
        assert by_N == sorted(by_N)
        assert all(c >= 2 * N * N - N for c, N in zip(by_N, (5, 10, 20, 40)))


class TestJointEnergy:

    def test_example(self):
        x = SequenceMatrix(np.column_stack([naturals(3), 2 * naturals(3)]))
        assert joint_energy(x, [1.0, 1.0], [0, 1]) == 19

    def test_subset_antitone(self):
        x = random_sequence(np.random.default_rng(10), 30, 3, spread=0.8)
        g = [0.7, 0.9, 0.5]
        full = joint_energy(x, g, [0, 1, 2])
        assert full <= joint_energy(x, [0.7, 0.9], [0, 1]) <= joint_energy(x, [0.7], [0])
        # thresholds given for every column are narrowed to the subset
        assert joint_energy(x, g, [1]) == joint_energy(x, [0.9], [1])

    def test_empty_subset(self):
        with pytest.raises(DomainError):
            joint_energy(gen_power([1.5, 2.5], 5), [1.0], [])

    def test_fast_counter_matches_enumeration(self):
        rng = np.random.default_rng(77)
        for trial in range(50):
            N = int(rng.integers(1, 25))
            d = int(rng.integers(1, 4))
            x = random_sequence(rng, N, d, spread=1.5)
            gamma = rng.uniform(0.05, 1.0, d)
            subset = list(range(d))
            assert joint_energy(x, gamma, subset, threads=2) == brute_energy(x, gamma, subset), trial

    def test_python_oracle(self):
        rng = np.random.default_rng(78)
        for _ in range(5):
            x = random_sequence(rng, 8, 2, spread=1.0)
            gamma = rng.uniform(0.1, 1.0, 2)
            assert joint_energy(x, gamma) == oracle_energy(x.values, gamma)

    def test_integer_columns_reduce_to_equality(self):
        rng = np.random.default_rng(12)
        ints = np.cumsum(rng.integers(1, 6, size=30))
        for gamma in (1.0, 0.5):
            assert energy_1d(ints.astype(np.float64), gamma) == integer_energy(ints.tolist())

    def test_thresholds_are_indexed_by_column(self):
        rng = np.random.default_rng(23)
        x = random_sequence(rng, 12, 2, spread=0.5)
        gamma = [0.3, 0.9]
        swapped = oracle_energy(x.values[:, [1, 0]], [0.9, 0.3])
        assert joint_energy(x, gamma, [1, 0]) == swapped
        assert brute_energy(x, gamma, [1, 0]) == swapped
        assert joint_energy(x, gamma, [1, 0]) == joint_energy(x, gamma, [0, 1])
        # a list as long as the subset follows the subset order
        assert joint_energy(x, [0.9], [1]) == joint_energy(x, gamma, [1])

    def test_report_with_permuted_subset(self):
        x = random_sequence(np.random.default_rng(24), 16, 2, spread=0.5)
        Ns = [4, 8, 16]
        straight = energy_report(x, [0.3, 0.9], Ns, [0, 1])
        permuted = energy_report(x, [0.3, 0.9], Ns, [1, 0])
        assert permuted.counts == straight.counts
        assert permuted.gamma == [0.9, 0.3]


class TestWindows:

    def test_block_energy(self):
        assert block_energy(naturals(4), 1.0, 1) == 6
        assert block_energy(np.array([[3.0]]), 1.0, 1, clip=True) == 1
        x = gen_power([2.5], 8)
        count = block_energy(x, 0.001, 2)
        assert count == oracle_energy(x.values[1:4], [0.001])
        assert count >= 2 * 9 - 3

    def test_block_accepts_large_gamma(self):
        assert block_energy(naturals(4), 2.5, 2) == oracle_energy(naturals(4)[1:4].reshape(-1, 1), [2.5])

    def test_block_needs_rows(self):
        with pytest.raises(DomainError):
            block_energy(naturals(5), 1.0, 3)

    def test_window_bounds(self):
        with pytest.raises(DomainError):
            window_energy(naturals(5), 1.0, 0, 3)
        with pytest.raises(DomainError):
            window_energy(naturals(5), 1.0, 2, 6)

    def test_dyadic_windows_bounded_by_full_energy(self):
        x = random_sequence(np.random.default_rng(13), 50, 1)
        parts = dyadic_block_counts(x, 0.8, 50)
        assert len(parts) == 7
        assert sum(parts) <= joint_energy(x, 0.8)


class TestFit:

    def test_naturals_slope(self):
        slope, stderr = fit_exponent([8, 16, 32, 64], [344, 2736, 21856, 174784])
        assert slope == pytest.approx(2.996, abs=2e-3)
        assert stderr >= 0

    def test_exact_power(self):
        Ns = [10, 20, 40, 80]
        slope, stderr = fit_exponent(Ns, [7 * N**2 for N in Ns])
        assert slope == pytest.approx(2.0, abs=1e-12)
        assert stderr == pytest.approx(0.0, abs=1e-12)

    def test_too_few_points(self):
        with pytest.raises(DomainError):
            fit_exponent([8, 16], [344, 2736])

    def test_report(self):
        report = energy_report(naturals(64), 1.0, [8, 16, 32, 64])
        assert report.counts == [344, 2736, 21856, 174784]
        assert report.slope == pytest.approx(2.996, abs=2e-3)
        assert report.subset == [0] and report.window == "prefix"

    def test_block_report(self):
        report = energy_report(naturals(64), 1.0, [4, 8, 16, 32], window="block")
        assert report.counts == [closed_form_energy(N + 1) for N in (4, 8, 16, 32)]

    def test_report_validity(self):
        with pytest.raises(AssertionError):
            EnergyReport([4, 8], [10, 20], [1.0], [0], 1.0, 0.1)

    @pytest.mark.slow
    def test_power_exponent_below_bound(self):
        Ns = [256, 512, 1024, 2048, 4096]
        report = energy_report(gen_power([2.5], 4096), 1.0, Ns)
        assert report.slope <= 2.4

    @pytest.mark.slow
    def test_nlog_joint_exponent(self):
        Ns = [256, 512, 1024, 2048, 4096]
        report = energy_report(gen_nlog(1.0, 4096), [1.0, 1.0], Ns, [0, 1])
        assert report.slope <= 2.35


class TestDilatedPairs:

    def test_examples(self):
        z = np.array([[1.0], [2.0]])
        assert dilated_pair_count(z, DyadicBlock((1,))) == 2
        assert dilated_pair_count(z, DyadicBlock((2,))) == 4

    def test_equal_points_on_diagonal(self):
        z = np.full((5, 1), 0.3)
        assert dilated_pair_count(z, DyadicBlock((2,)), "diagonal") == 2 * 25

    def test_pairings_are_nested(self):
        rng = np.random.default_rng(15)
        z = rng.uniform(0, 3, size=(12, 2))
        block = DyadicBlock((2, 3))
        diagonal = dilated_pair_count(z, block, "diagonal")
        locked = dilated_pair_count(z, block, "locked")
        every = dilated_pair_count(z, block, "all")
        assert diagonal <= locked <= every
        assert locked <= same_component_bound(z, block)

    @pytest.mark.parametrize("pairing", ["locked", "diagonal"])
    @pytest.mark.parametrize("u", [(1, 1), (2, 2), (2, 3), (3, 2), (2, 2, 3)])
    def test_replicated_column_reduces_to_one_coordinate(self, u, pairing):
        w = np.sort(np.random.default_rng(41).uniform(0, 10, 40))
        z = np.repeat(w[:, np.newaxis], len(u), axis=1)
        block = DyadicBlock(u)
        assert same_component_count(w, block, pairing) == dilated_pair_count(z, block, pairing)

    @pytest.mark.parametrize("u", [(1, 1), (1, 3), (2, 3), (2, 2, 3)])
    def test_bound_is_exact_when_axis_dominates(self, u):
        w = np.sort(np.random.default_rng(42).uniform(0, 10, 40))
        z = np.repeat(w[:, np.newaxis], len(u), axis=1)
        block = DyadicBlock(u)
        assert same_component_bound(z, block) == dilated_pair_count(z, block, "locked")

    def test_bound_with_equal_exponents(self):
        # j = t = (2, 3) binds on the second coordinate; the bound only sees the first
        w = np.sort(np.random.default_rng(43).uniform(0, 10, 40))
        z = np.repeat(w[:, np.newaxis], 2, axis=1)
        block = DyadicBlock((2, 2))
        assert same_component_bound(z, block) >= same_component_count(w, block)

    def test_reduction_needs_locked_pairing(self):
        with pytest.raises(DomainError):
            same_component_count(np.ones(3), DyadicBlock((1, 1)), "all")

    def test_ratio_locked_pairs(self):
        assert ratio_locked_pairs(DyadicBlock((2, 2))) == 6
        assert ratio_locked_pairs(DyadicBlock((3,))) == 16

    def test_unknown_pairing(self):
        with pytest.raises(DomainError):
            dilated_pair_count(np.ones((2, 1)), DyadicBlock((1,)), "none")

    def test_blocks_cover_degrees(self):
        blocks = dyadic_blocks(16, 1, 2, 2)
        assert len(blocks) == 4
        assert {b.u for b in blocks} == {(1, 1), (1, 2), (2, 1), (2, 2)}
        assert DyadicBlock((3, 1)).size == 4

    def test_pair_differences(self):
        diffs = pair_differences(SequenceMatrix([[1.0, 1.0], [3.0, 5.0], [4.0, 9.0]]))
        assert diffs.shape == (6, 2)
        assert sorted(diffs[:, 0].tolist()) == [1.0, 1.0, 2.0, 2.0, 3.0, 3.0]


class TestWatt:

    def test_analytic_case(self):
        diag = watt_ratio([1, 2, 3, 4], lambda u: u, 0.5, 1)
        assert diag.V == 4
        assert diag.scaled_W == pytest.approx(4.0, rel=0.01)
        assert diag.ratio == pytest.approx(1.0, rel=0.01)

    def test_single_point(self):
        diag = watt_ratio([1], lambda u: u, 0.3, 1)
        assert diag.V == 1
        assert 0.1 <= diag.ratio <= 10

    def test_fourth_moment(self):
        diag = watt_ratio([1, 2, 3], lambda u: u, 0.5, 2)
        assert diag.V == 19
        assert 0.1 <= diag.ratio <= 10

    @pytest.mark.slow
    def test_sweep_stays_in_band(self):
        for delta in (0.5, 0.25, 0.125):
            for M in (1, 2):
                diag = watt_ratio(list(range(1, 9)), lambda u: u, delta, M)
                assert 0.05 <= diag.ratio <= 20

    def test_non_convergence(self):
        with pytest.raises(QuadratureError):
            watt_ratio([1, 2, 3], lambda u: u, 0.5, 1, resolution=4, max_points=4)
