import math

import pytest
from hypothesis import assume, given, strategies as st

from qszilard.asymptotics import (binomial_count_entropy, compare_to_engine, fermi_split,
                                  ground_log_degeneracy, is_degenerate, lowT_extraction_work,
                                  lowT_insertion_work, lowT_sector_probabilities, lowT_total,
                                  relevant_gap, scheme_entropy)
from qszilard.engine import EngineConfig, MeasurementScheme
from qszilard.ensemble import Statistics
from qszilard.spectrum import Spectrum, SplitSpectrum, split_box

B, F, D = Statistics.BOSON, Statistics.FERMION, Statistics.DISTINGUISHABLE
COUNT, TRIVIAL, RESOLVED = (MeasurementScheme.count(), MeasurementScheme.trivial(),
                            MeasurementScheme.resolved())


class TestFermiSplit:
    def test_centred_odd(self):
        fs = fermi_split(split_box(0.5, 5), 3)
        assert fs.j in (1, 2) and fs.degenerate

    def test_centred_even(self):
        fs = fermi_split(split_box(0.5, 5), 2)
        assert (fs.j, fs.degenerate) == (1, False)

    def test_off_centre(self):
        fs = fermi_split(split_box(0.4, 5), 2)
        assert (fs.j, fs.degenerate) == (1, False)

    def test_capacity(self):
        with pytest.raises(ValueError, match="capacity"):
            fermi_split(split_box(0.5, 1), 3)

    def test_empty(self):
        assert fermi_split(split_box(0.3, 2), 0).j == 0

    @given(st.floats(0.02, 0.98), st.integers(1, 8))
    def test_mirror(self, lam, n):
        a, b = fermi_split(split_box(lam, 12), n), fermi_split(split_box(1 - lam, 12), n)
        assume(not a.degenerate and not b.degenerate)
        assert a.j + b.j == n

    @given(st.floats(0.02, 0.98), st.integers(1, 8))
    def test_fill_is_balanced(self, lam, n):
        # no particle can lower the energy by hopping across the piston
        split = split_box(lam, 12)
        j = fermi_split(split, n).j
        el = (-math.inf,) + split.left.energies + (math.inf,)
        er = (-math.inf,) + split.right.energies + (math.inf,)
        assert max(el[j], er[n - j]) <= min(el[j + 1], er[n - j + 1])


class TestClosedForms:
    def test_boson_insertion(self):
        w = lowT_insertion_work(B, split_box(0.5, 5), 3, 0.01)
        assert w == pytest.approx(0.01 * math.log(4) + 3 * (1 - 4), rel=1e-15)
        assert w == pytest.approx(-8.98614, abs=1e-5)

    def test_distinguishable_insertion(self):
        w = lowT_insertion_work(D, split_box(0.5, 5), 2, 0.01)
        assert w == pytest.approx(-5.98614, abs=1e-5)

    def test_fermion_insertion(self):
        w = lowT_insertion_work(F, split_box(0.4, 5), 2, 1e-9)
        assert w == pytest.approx(5 - (6.25 + 1 / 0.36), rel=1e-12)
        assert w == pytest.approx(-4.0278, abs=1e-4)

    def test_boson_extraction(self):
        assert lowT_extraction_work(B, split_box(0.5, 5), 3, 0.01) == pytest.approx(9.0)

    def test_fermion_extraction(self):
        assert lowT_extraction_work(F, split_box(0.4, 5), 2, 0.01) == pytest.approx(4.0278,
                                                                                   abs=1e-4)

    def test_empty(self, stat):
        assert lowT_extraction_work(stat, split_box(0.3, 5), 0, 0.1) == 0.0
        assert lowT_insertion_work(stat, split_box(0.3, 5), 0, 0.1) == 0.0

    def test_asymmetric_boson_has_no_entropy_term(self):
        w = lowT_insertion_work(B, split_box(0.37, 5), 2, 0.5)
        assert w == pytest.approx(2 * (1 - 1 / 0.63**2), rel=1e-14)

    def test_rejects_degenerate_levels(self):
        s = Spectrum((1.0, 4.0), (2, 1))
        with pytest.raises(ValueError, match="non-degenerate"):
            lowT_insertion_work(B, SplitSpectrum(s, s, 0.5), 1, 0.1)

    @given(st.sampled_from([B, F, D]), st.floats(0.05, 0.95), st.integers(1, 6),
           st.floats(1e-4, 1.0))
    def test_steps_sum_to_ground_entropy(self, stat, lam, n, temp):
        # the energy terms cancel; only kT ln D of the split ground survives
        split = split_box(lam, 14)
        total = (lowT_insertion_work(stat, split, n, temp)
                 + lowT_extraction_work(stat, split, n, temp))
        assert total == pytest.approx(temp * ground_log_degeneracy(stat, split, n),
                                      abs=1e-11 * max(1.0, n * n / min(lam, 1 - lam) ** 2))


class TestTotals:
    def test_values(self):
        assert lowT_total(B, 3, COUNT) == pytest.approx(math.log(4))
        assert lowT_total(F, 7, COUNT) == pytest.approx(math.log(2))
        assert lowT_total(D, 3, RESOLVED) == pytest.approx(3 * math.log(2))
        assert lowT_total(D, 2, COUNT) == pytest.approx(1.5 * math.log(2))
        assert lowT_total(B, 3, TRIVIAL) == 0.0

    def test_coarse_uses_group_probabilities(self):
        s = lowT_total(B, 4, MeasurementScheme.coarse([[0, 1], [2, 3, 4]]))
        assert s == pytest.approx(-(0.4 * math.log(0.4) + 0.6 * math.log(0.6)))

    def test_degenerate_fermion_sectors(self):
        split = split_box(0.5, 6)
        assert lowT_sector_probabilities(F, split, 3) == {1: 0.5, 2: 0.5}
        assert lowT_sector_probabilities(F, split, 2) == {1: 1.0}
        assert scheme_entropy(F, split, 2, COUNT) == 0.0


class TestBinomialEntropy:
    def test_small(self):
        assert binomial_count_entropy(1) == pytest.approx(math.log(2), rel=1e-15)
        assert binomial_count_entropy(2) == pytest.approx(1.5 * math.log(2), rel=1e-15)
        assert binomial_count_entropy(2) == pytest.approx(1.039721, abs=1e-6)

    def test_large(self):
        s = binomial_count_entropy(100)
        assert s == pytest.approx(3.028, abs=1e-3)
        assert s == pytest.approx(0.5 * math.log(2 * math.pi * math.e * 100 / 4), abs=1e-2)

    @pytest.mark.parametrize("n", [0, -1, 2.5])
    def test_rejects(self, n):
        with pytest.raises(ValueError):
            binomial_count_entropy(n)

    def test_ratio_trend(self):
        ratios = [binomial_count_entropy(n) / math.log(n + 1) for n in (2, 5, 10, 50, 100, 10**4)]
        assert all(b < a for a, b in zip(ratios, ratios[1:]))
        assert ratios[0] == pytest.approx(1.5 * math.log(2) / math.log(3), rel=1e-14)
        assert ratios[0] == pytest.approx(0.9464, abs=1e-4)
        assert ratios[-1] > 0.5

    @given(st.integers(2, 2000))
    def test_below_boson_value(self, n):
        assert binomial_count_entropy(n) < math.log(n + 1) < n * math.log(2)


class TestDegeneracy:
    def test_centred(self):
        split = split_box(0.5, 6)
        assert is_degenerate(B, split, 2) and is_degenerate(D, split, 2)
        assert is_degenerate(F, split, 3) and not is_degenerate(F, split, 2)
        assert ground_log_degeneracy(B, split, 4) == pytest.approx(math.log(5))
        assert ground_log_degeneracy(D, split, 4) == pytest.approx(4 * math.log(2))

    def test_gap(self):
        split = split_box(0.5, 6)
        # bosons: ground 4 on both sides, next level 16; full box 1 -> 4
        assert relevant_gap(B, split, 3) == pytest.approx(3.0)
        # fermions N=3: split modes 4,4,16,16; full box 1,4,9,16 -> 16-9=7 and 16-4=12
        assert relevant_gap(F, split, 3) == pytest.approx(7.0)


class TestComparison:
    def test_low_temperature_agreement(self):
        cmp = compare_to_engine(EngineConfig(B, 3, 0.5, 0.01), COUNT)
        kt = 0.01
        assert cmp.regime_ok
        assert max(cmp.dW1, cmp.dW2, cmp.dnet) <= 1e-6 * kt

    def test_regime_warning(self):
        cmp = compare_to_engine(EngineConfig(B, 3, 0.5, 0.5), COUNT)
        assert not cmp.regime_ok
        assert cmp.beta_gap == pytest.approx(6.0)
        assert cmp.dW1 > 1e-3 * 0.5

    def test_trivial(self, stat):
        cmp = compare_to_engine(EngineConfig(stat, 3, 0.37, 0.02), TRIVIAL)
        assert cmp.net_closed == 0.0
        assert cmp.dnet == abs(cmp.net_exact)
        assert cmp.dnet <= 1e-12 * 0.02

    @pytest.mark.parametrize("stat,n,lam", [(F, 2, 0.4), (F, 3, 0.5), (F, 3, 0.4), (D, 3, 0.5),
                                            (B, 2, 0.37)])
    def test_steps(self, stat, n, lam):
        config = EngineConfig(stat, n, lam, 1.0)
        temp = relevant_gap(stat, config.split(), n, config.full_box()) / 25
        cmp = compare_to_engine(EngineConfig(stat, n, lam, temp), COUNT)
        assert cmp.dW1 <= 1e-5 * temp and cmp.dW2 <= 1e-5 * temp
