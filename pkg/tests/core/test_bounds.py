import math

import pytest

from src.ppclab.core import DomainError
from src.ppclab.core.bounds import (
    exponent_verdict,
    joint_threshold,
    nlog_joint_envelope,
    power_energy_exponent,
    robert_sargos_envelope,
    same_component_threshold,
    second_derivative_envelope,
)


class TestThresholds:

    def test_same_component(self):
        assert same_component_threshold(1) == pytest.approx(183 / 76)
        assert same_component_threshold(2) == pytest.approx(191 / 76)
        # the threshold grows towards 199/76 with the dimension
        assert same_component_threshold(50) < 199 / 76

    def test_joint(self):
        assert joint_threshold(1, 1) == pytest.approx(2 + 31 / 76)
        assert joint_threshold(3, 2) == pytest.approx(4 - (4 - 31 / 76) / 3)
        with pytest.raises(DomainError):
            joint_threshold(2, 3)

    def test_power_exponent(self):
        assert power_energy_exponent([2.5]) == 2.0
        assert power_energy_exponent([1.5]) == 2.5
        assert power_energy_exponent([1.2, 3.5]) == 2.0
        with pytest.raises(DomainError):
            power_energy_exponent([0.0])


class TestEnvelopes:

    def test_robert_sargos(self):
        assert robert_sargos_envelope(100, 1.0, 2.5) == pytest.approx(100**2 + 100**1.5)

    def test_nlog(self):
        L = math.log(1000)
        assert nlog_joint_envelope(1000, 1) == pytest.approx(1000**2 * (L**3 + L**4))

    def test_second_derivative(self):
        assert second_derivative_envelope(10, 100.0, 10) == 1000
        small = second_derivative_envelope(1000, 1e-4, 100)
        assert small == pytest.approx(1e9 / 100 + 1e9 * 1e-4 + 1000 * math.log(100) / 1e-4)
        with pytest.raises(DomainError):
            second_derivative_envelope(10, 0.0, 10)

    def test_verdict(self):
        assert exponent_verdict(2.1, 0.05, 2.4)
        assert not exponent_verdict(2.35, 0.05, 2.4)
        assert exponent_verdict(2.35, 0.05, 2.4, k_sigma=0.5)
