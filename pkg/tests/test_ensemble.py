import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import ALL_STATS, log_rel_err
from qszilard.ensemble import (LogWeight, Statistics, fermion_newton_table, fermion_table,
                               free_energy, log_z_table, logsumexp, signed_logsumexp, z1,
                               z_many, z_sector)
from qszilard.errors import PauliCapacityError
from qszilard.oracle import enumerate_z
from qszilard.spectrum import Spectrum, box_spectrum, split_box

B, F, D = Statistics.BOSON, Statistics.FERMION, Statistics.DISTINGUISHABLE
TWO_LEVEL = box_spectrum(1, 2)


class TestLogWeight:
    def test_zero_normalises(self):
        z = LogWeight(3.0, 0)
        assert z.is_zero and z.log_magnitude == -math.inf and z.value == 0.0
        assert LogWeight(-math.inf, 1).is_zero

    def test_product_and_quotient(self):
        a, b = LogWeight.from_value(3.0), LogWeight.from_value(-0.5)
        assert (a * b).value == pytest.approx(-1.5)
        assert (a / b).value == pytest.approx(-6.0)
        assert (a * LogWeight.zero()).is_zero

    @pytest.mark.parametrize("x,y", [(3.0, 2.0), (3.0, -2.0), (-3.0, 2.0), (2.0, -2.0),
                                     (1e-300, 1e-300), (5.0, 0.0)])
    def test_signed_sum(self, x, y):
        s = LogWeight.from_value(x) + LogWeight.from_value(y)
        # exp(log x) loses about |log x| ulps
        assert s.value == pytest.approx(x + y, rel=1e-13, abs=1e-320)

    def test_sum_beyond_float_range(self):
        a = LogWeight(-5000.0)
        s = a + a
        assert s.log_magnitude == pytest.approx(-5000.0 + math.log(2), rel=1e-15)
        assert (a - a).is_zero

    def test_cancellation_keeps_sign(self):
        s = signed_logsumexp([LogWeight(1.0), LogWeight(1.0 + 1e-9, -1)])
        assert s.sign == -1
        assert s.value == pytest.approx(math.e - math.exp(1 + 1e-9), rel=1e-6)

    def test_log_requires_positive(self):
        with pytest.raises(ValueError):
            LogWeight.from_value(-1.0).log()

    def test_power(self):
        assert (LogWeight.from_value(-2.0) ** 3).value == pytest.approx(-8.0)
        assert (LogWeight.zero() ** 0).value == 1.0

    def test_logsumexp_handles_all_minus_inf(self):
        assert logsumexp([-math.inf, -math.inf]) == -math.inf
        assert logsumexp([]) == -math.inf


class TestSingleParticle:
    def test_two_levels(self):
        assert z1(TWO_LEVEL, 1.0).value == pytest.approx(math.exp(-1) + math.exp(-4), rel=1e-15)
        assert z1(TWO_LEVEL, 1.0).value == pytest.approx(0.3861950800601765, rel=1e-15)

    def test_degeneracy_multiplies(self):
        s = Spectrum((1.0,), (2,))
        assert z1(s, 1.0).value == pytest.approx(2 * math.exp(-1), rel=1e-15)

    def test_ground_state_limit(self):
        z = z1(box_spectrum(1, 30), 1e4)
        assert z.log() == pytest.approx(-1e4, rel=1e-15)

    def test_no_underflow_at_large_beta(self):
        assert z1(box_spectrum(0.01, 5), 1e3).log() == pytest.approx(-1e7)


class TestManyParticle:
    def test_boson_pair(self):
        expected = math.exp(-2) + math.exp(-5) + math.exp(-8)
        assert z_many(TWO_LEVEL, B, 2, 1.0).value == pytest.approx(expected, rel=1e-14)
        assert z_many(TWO_LEVEL, B, 2, 1.0).value == pytest.approx(0.1424087, abs=1e-7)

    def test_fermion_pair(self):
        assert z_many(TWO_LEVEL, F, 2, 1.0).value == pytest.approx(math.exp(-5), rel=1e-14)

    def test_distinguishable_pair(self):
        expected = (math.exp(-1) + math.exp(-4)) ** 2
        assert z_many(TWO_LEVEL, D, 2, 1.0).value == pytest.approx(expected, rel=1e-14)

    def test_empty_system(self, stat):
        assert z_many(box_spectrum(1, 5), stat, 0, 3.0).value == 1.0

    def test_pauli_capacity(self):
        with pytest.raises(PauliCapacityError, match="Pauli capacity"):
            z_many(TWO_LEVEL, F, 3, 1.0)
        assert z_many(Spectrum((1.0, 4.0), (2, 1)), F, 3, 1.0).value == pytest.approx(
            math.exp(-6), rel=1e-14)

    def test_fermion_table_marks_overfull_entries(self):
        table = fermion_table(TWO_LEVEL, 4, 1.0)
        assert np.isneginf(table[3:]).all()

    @pytest.mark.parametrize("beta", [0, -1.0])
    def test_beta_must_be_positive(self, beta):
        with pytest.raises(ValueError):
            z_many(TWO_LEVEL, B, 1, beta)

    @pytest.mark.parametrize("stat", ALL_STATS, ids=lambda s: s.value)
    @pytest.mark.parametrize("n", [1, 3, 5])
    def test_low_temperature_limits(self, stat, n):
        spectrum = box_spectrum(1, n + 12)
        beta = 1e3
        kt_log_z = z_many(spectrum, stat, n, beta).log() / beta
        if stat is F:
            assert kt_log_z == pytest.approx(-sum(k * k for k in range(1, n + 1)), rel=1e-12)
        else:
            assert kt_log_z == pytest.approx(-n * 1.0, rel=1e-12)

    def test_degenerate_fermi_level_fills_by_degeneracy(self):
        s = Spectrum((1.0, 4.0, 9.0), (1, 3, 2))
        beta = 500.0
        assert z_many(s, F, 3, beta).log() == pytest.approx(
            -beta * (1 + 4 + 4) + math.log(3), rel=1e-12)


@st.composite
def small_spectra(draw):
    k = draw(st.integers(2, 8))
    gaps = draw(st.lists(st.floats(0.05, 5.0), min_size=k, max_size=k))
    energies = np.cumsum(gaps).tolist()
    degeneracies = draw(st.lists(st.integers(1, 3), min_size=k, max_size=k))
    return Spectrum.from_levels(energies, degeneracies)


@settings(max_examples=150, deadline=None)
@given(small_spectra(), st.sampled_from(ALL_STATS), st.integers(0, 4),
       st.floats(0.1, 50.0))
def test_recursion_matches_enumeration(spectrum, stat, n, beta):
    if stat is F and spectrum.capacity < n:
        return
    fast = z_many(spectrum, stat, n, beta).log()
    slow = enumerate_z(spectrum, stat, n, beta).log()
    assert log_rel_err(fast, slow) <= 1e-10


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 0.95), st.sampled_from(ALL_STATS), st.integers(0, 5),
       st.floats(0.05, 20.0))
def test_sectors_sum_to_combined_system(lam, stat, n, beta):
    split = split_box(lam, 12)
    merged = Spectrum.from_levels(split.left.energies + split.right.energies,
                                  split.left.degeneracies + split.right.degeneracies)
    total = LogWeight.zero()
    for k in range(n + 1):
        total = total + z_sector(split, stat, k, n, beta, count_identities=True)
    assert log_rel_err(total.log(), z_many(merged, stat, n, beta).log()) <= 1e-10


def test_symmetric_boson_sector():
    split = split_box(0.5, 2)
    z = z_sector(split, B, 1, 2, 1.0)
    assert z.value == pytest.approx(z_many(box_spectrum(0.5, 2), B, 1, 1.0).value ** 2,
                                    rel=1e-14)


def test_distinguishable_sector_counts_identities():
    split = split_box(0.5, 2)
    zl = z1(split.left, 1.0).value
    zr = z1(split.right, 1.0).value
    assert z_sector(split, D, 1, 2, 1.0, count_identities=True).value == pytest.approx(
        2 * zl * zr, rel=1e-14)
    assert z_sector(split, D, 1, 2, 1.0).value == pytest.approx(zl * zr, rel=1e-14)


def test_distinguishable_binomial_theorem():
    split = split_box(0.3, 10)
    beta, n = 0.7, 5
    total = sum(z_sector(split, D, k, n, beta, count_identities=True).value
                for k in range(n + 1))
    expected = (z1(split.left, beta).value + z1(split.right, beta).value) ** n
    assert total == pytest.approx(expected, rel=1e-12)


def test_sector_capacity_error():
    split = split_box(0.5, 2)
    with pytest.raises(PauliCapacityError):
        z_sector(split, F, 3, 3, 1.0)


@pytest.mark.parametrize("stat", ALL_STATS, ids=lambda s: s.value)
def test_monotone_in_beta(stat):
    spectrum = box_spectrum(1, 30)
    betas = np.geomspace(0.05, 50, 40)
    logs = [z_many(spectrum, stat, 3, b).log() for b in betas]
    assert all(b < a for a, b in zip(logs, logs[1:]))
    energies = [free_energy(z_many(spectrum, stat, 3, b), 1 / b) for b in betas]
    assert all(b >= a - 1e-12 for a, b in zip(energies, energies[1:]))


class TestFreeEnergy:
    def test_unit_partition_function(self):
        assert free_energy(LogWeight.one(), 0.3) == 0.0

    def test_simple(self):
        assert free_energy(LogWeight(-5.0), 1.0) == 5.0

    def test_ground_state_dominance(self):
        temp = 1e-3
        z = z_many(box_spectrum(1, 20), B, 3, 1 / temp)
        assert free_energy(z, temp) == pytest.approx(3.0, rel=1e-12)

    def test_rejects_non_positive(self):
        with pytest.raises(ValueError):
            free_energy(LogWeight.zero(), 1.0)
        with pytest.raises(ValueError):
            free_energy(LogWeight(-1.0, -1), 1.0)


class TestNewtonFermions:
    @pytest.mark.parametrize("beta", [0.01, 0.1, 0.5])
    def test_agrees_at_high_temperature(self, beta):
        spectrum = box_spectrum(1, 8)
        newton = fermion_newton_table(spectrum, 4, beta)
        levels = log_z_table(spectrum, F, 4, beta)
        for n in range(5):
            assert newton[n].sign == 1
            assert log_rel_err(newton[n].log_magnitude, levels[n]) <= 1e-10

    def test_cancels_catastrophically_at_low_temperature(self):
        # why the level-by-level path is the default
        spectrum = box_spectrum(1, 8)
        newton = fermion_newton_table(spectrum, 3, 50.0)
        exact = -50.0 * (1 + 4 + 9)
        assert newton[3].is_zero or log_rel_err(newton[3].log_magnitude, exact) > 1e-3
        assert z_many(spectrum, F, 3, 50.0).log() == pytest.approx(exact, rel=1e-14)


def test_large_boson_system_condenses():
    # once the excited levels saturate, each added boson goes to the ground level
    spectrum = box_spectrum(1, 400)
    beta = 0.2
    table = log_z_table(spectrum, B, 300, beta)
    assert np.isfinite(table).all()
    assert np.diff(table)[-1] == pytest.approx(-beta * spectrum.ground, rel=1e-10)
