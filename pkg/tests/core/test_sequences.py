import math

import numpy as np
import pytest

from src.ppclab.core import (
    DomainError,
    Family,
    MalformedSequenceRow,
    MissingSequenceFile,
    NonIncreasingColumn,
    SequenceMatrix,
    build_sequence,
    check_spacing,
    gen_nlog,
    gen_power,
    load_sequence,
    save_sequence,
)
from .tools import random_sequence


class TestGenerators:

    def test_power_examples(self):
        assert gen_power([2.5], 1, n0=4).values.tolist() == [[32.0]]
        assert gen_power([1, 1], 2).values.tolist() == [[1.0, 1.0], [2.0, 2.0]]
        assert gen_power([2, 3], 2, n0=2).values.tolist() == [[4.0, 8.0], [9.0, 27.0]]

    def test_power_rejects_nonpositive_theta(self):
        with pytest.raises(DomainError):
            gen_power([2.5, 0.0], 10)
        with pytest.raises(DomainError):
            gen_power([], 10)

    def test_nlog_examples(self):
        assert gen_nlog(1, 1, n0=3).values[0] == pytest.approx([3, 3 * math.log(3)])
        assert gen_nlog(2, 1, n0=8).values[0] == pytest.approx([8, 8 * math.log(8) ** 2])
        x = gen_nlog(1, 2)
        assert x.values == pytest.approx(np.array([[2, 2 * math.log(2)], [3, 3 * math.log(3)]]))
        assert x.meta.n0 == 2

    def test_nlog_domain(self):
        with pytest.raises(DomainError):
            gen_nlog(1, 5, n0=1)
        with pytest.raises(DomainError):
            gen_nlog(0.5, 5)

    @pytest.mark.parametrize("x", [gen_power([2.5, 3.5], 200), gen_nlog(1.5, 200), gen_power([1.2], 50, n0=7)])
    def test_families_are_spaced_by_their_first_gap(self, x):
        cert = check_spacing(x)
        assert cert.holds
        assert cert.c == float(np.min(x.values[1] - x.values[0]))
        assert cert.worst_index == 0

    def test_build_sequence(self):
        x = build_sequence("power", 5, thetas=[2.0])
        assert x.meta.family == Family.POWER
        assert x.values[:, 0].tolist() == [1.0, 4.0, 9.0, 16.0, 25.0]
        assert build_sequence(Family.NLOG, 3, A=1.0).meta.n0 == 2


class TestSequenceMatrix:

    def test_rejects_non_increasing(self):
        with pytest.raises(AssertionError):
            SequenceMatrix([[1.0], [1.0]])

    def test_head_and_select(self):
        x = gen_power([1.5, 2.5, 3.5], 10)
        assert x.head(4).N == 4
        assert x.select([2, 0]).values[:, 0].tolist() == x.column(2).tolist()
        with pytest.raises(DomainError):
            x.head(11)
        with pytest.raises(DomainError):
            x.select([3])


class TestSpacing:

    def test_examples(self):
        cert = check_spacing(SequenceMatrix([1.0, 2.0, 3.0]), 1)
        assert cert.holds and cert.worst_gap == 1.0
        cert = check_spacing(SequenceMatrix([1.0, 1.5]), 1)
        assert not cert.holds and cert.worst_gap == 0.5
        assert check_spacing(gen_power([2.5], 10), 1).holds

    def test_reports_worst_column(self):
        cert = check_spacing(SequenceMatrix([[1.0, 1.0], [3.0, 1.25], [6.0, 2.0]]), 0.5)
        assert not cert.holds
        assert (cert.worst_index, cert.worst_column) == (0, 1)
        assert cert.column_gaps == (2.0, 0.25)

    def test_domain(self):
        with pytest.raises(DomainError):
            check_spacing(SequenceMatrix([1.0]), 1)
        with pytest.raises(DomainError):
            check_spacing(SequenceMatrix([1.0, 2.0]), 0)


class TestSequenceFiles:

    def test_load_examples(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("1\n2\n3\n")
        assert load_sequence(p).values.tolist() == [[1.0], [2.0], [3.0]]
        p.write_text("1,1\n2,4\n")
        assert load_sequence(p).values.shape == (2, 2)

    def test_distinct_errors(self, tmp_path):
        with pytest.raises(MissingSequenceFile) as missing:
            load_sequence(tmp_path / "nope.csv")
        p = tmp_path / "b.csv"
        p.write_text("2\n1\n")
        with pytest.raises(NonIncreasingColumn) as decreasing:
            load_sequence(p)
        p.write_text("1,2\nfoo,3\n")
        with pytest.raises(MalformedSequenceRow) as malformed:
            load_sequence(p)
        p.write_text("1,2\n3\n")
        with pytest.raises(MalformedSequenceRow):
            load_sequence(p)
        codes = {missing.value.code, decreasing.value.code, malformed.value.code}
        assert len(codes) == 3

    def test_round_trip_is_bit_exact(self, tmp_path):
        x = random_sequence(np.random.default_rng(5), 100, 3)
        p = tmp_path / "seq.csv"
        save_sequence(x, p)
        assert np.array_equal(load_sequence(p).values, x.values)
        assert p.read_bytes().count(b"\r") == 0
