"""Low-temperature closed forms for the engine, used as analytic references.

Valid when kT is small against the relevant excitation gap.  The formulas
assume non-degenerate single-particle levels; degeneracy only enters
through the two sides of the piston having equal levels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import engine
from .engine import EngineConfig, MeasurementScheme, SchemeKind
from .ensemble import Statistics
from .spectrum import Spectrum, SplitSpectrum, box_spectrum, split_box

DEGENERACY_RTOL = 1e-9

#: beta * gap below which the closed forms are not trusted
REGIME_THRESHOLD = 10.0


def _equal(a: float, b: float) -> bool:
    return abs(a - b) <= DEGENERACY_RTOL * max(abs(a), abs(b))


def _require_simple(*spectra: Spectrum):
    for s in spectra:
        if any(g != 1 for g in s.degeneracies):
            raise ValueError("closed forms assume non-degenerate single-particle levels")


@dataclass(frozen=True)
class FermiSplit:
    """Fermion ground filling of a split cylinder.

    ``j`` counts filled levels left of the piston.  ``degenerate`` means the
    highest fermion could sit on the other side at no energy cost.
    """

    j: int
    degenerate: bool


def fermi_split(split: SplitSpectrum, n: int) -> FermiSplit:
    """Fill the ``n`` lowest side-tagged modes; ties go left first."""
    modes = split.tagged_modes()
    if len(modes) < n:
        raise ValueError(f"capacity {len(modes)} cannot hold {n} fermions")
    if n == 0:
        return FermiSplit(0, False)
    filled = modes[:n]
    j = sum(1 for _, side in filled if side == "L")
    degenerate = False
    if len(modes) > n:
        e_f, side_f = modes[n - 1]
        e_next, side_next = modes[n]
        degenerate = _equal(e_f, e_next) and side_f != side_next
    return FermiSplit(j, degenerate)


def _fill_energy(split: SplitSpectrum, n: int) -> float:
    return math.fsum(e for e, _ in split.tagged_modes()[:n])


def _default_full(full: Spectrum | None, n: int) -> Spectrum:
    return box_spectrum(1.0, n + 2) if full is None else full


def _needs_levels(spectrum: Spectrum, n: int, what: str):
    if len(spectrum) < n:
        raise ValueError(f"{what} spectrum has fewer than {n} levels")


def is_degenerate(stat: Statistics, split: SplitSpectrum, n: int) -> bool:
    """Whether the split ground state is degenerate across the piston."""
    stat = Statistics.parse(stat)
    if n == 0:
        return False
    if stat is Statistics.FERMION:
        return fermi_split(split, n).degenerate
    return _equal(split.left.ground, split.right.ground)


def ground_log_degeneracy(stat: Statistics, split: SplitSpectrum, n: int) -> float:
    """ln of the number of split ground states: ln(N+1), N ln 2, ln 2 or 0."""
    stat = Statistics.parse(stat)
    if not is_degenerate(stat, split, n):
        return 0.0
    if stat is Statistics.BOSON:
        return math.log(n + 1)
    if stat is Statistics.DISTINGUISHABLE:
        return n * math.log(2)
    return math.log(2)


def lowT_insertion_work(stat: Statistics, split: SplitSpectrum, n: int, temp: float,
                        full: Spectrum | None = None) -> float:
    """Insertion work W1 in the low-temperature limit."""
    stat = Statistics.parse(stat)
    full = _default_full(full, n)
    _require_simple(full, split.left, split.right)
    if n == 0:
        return 0.0
    if stat is Statistics.FERMION:
        _needs_levels(full, n, "full")
        w_n = math.fsum(full.energies[:n]) - _fill_energy(split, n)
    else:
        w_n = n * (full.ground - min(split.left.ground, split.right.ground))
    return temp * ground_log_degeneracy(stat, split, n) + w_n


def lowT_extraction_work(stat: Statistics, split: SplitSpectrum, n: int, temp: float,
                         full: Spectrum | None = None) -> float:
    """Movement/removal work W2 after a full measurement, low-temperature limit."""
    stat = Statistics.parse(stat)
    full = _default_full(full, n)
    _require_simple(full, split.left, split.right)
    if n == 0:
        return 0.0
    if stat is Statistics.FERMION:
        _needs_levels(full, n, "full")
        return _fill_energy(split, n) - math.fsum(full.energies[:n])
    return n * (min(split.left.ground, split.right.ground) - full.ground)


def binomial_count_entropy(n: int) -> float:
    """Entropy of the Binomial(n, 1/2) left count, in units of k."""
    if int(n) != n or n < 1:
        raise ValueError(f"N must be a positive integer, got {n!r}")
    m = np.arange(n + 1)
    log_p = gammaln(n + 1) - gammaln(m + 1) - gammaln(n - m + 1) - n * math.log(2)
    return -math.fsum((np.exp(log_p) * log_p).tolist())


def lowT_sector_probabilities(stat: Statistics, split: SplitSpectrum, n: int) -> dict[int, float]:
    """Left-count distribution over the split ground manifold."""
    stat = Statistics.parse(stat)
    if n == 0:
        return {0: 1.0}
    if stat is Statistics.FERMION:
        fs = fermi_split(split, n)
        if fs.degenerate:
            # the Fermi particle is the last one filled, on the left by tie order
            return {fs.j - 1: 0.5, fs.j: 0.5}
        return {fs.j: 1.0}
    if is_degenerate(stat, split, n):
        if stat is Statistics.BOSON:
            return {k: 1.0 / (n + 1) for k in range(n + 1)}
        return {k: math.comb(n, k) / 2.0**n for k in range(n + 1)}
    return {n: 1.0} if split.left.ground < split.right.ground else {0: 1.0}


def _entropy(ps) -> float:
    return -math.fsum(p * math.log(p) for p in ps if p > 0)


def scheme_entropy(stat: Statistics, split: SplitSpectrum, n: int,
                   scheme: MeasurementScheme) -> float:
    """Low-temperature information gain of ``scheme``, units of k."""
    stat = Statistics.parse(stat)
    scheme.validate(stat, n)
    sectors = lowT_sector_probabilities(stat, split, n)
    if scheme.kind is SchemeKind.TRIVIAL:
        return 0.0
    if scheme.kind is SchemeKind.COUNT:
        return _entropy(sectors.values())
    if scheme.kind is SchemeKind.COARSE:
        return _entropy(math.fsum(sectors.get(k, 0.0) for k in g) for g in scheme.groups)
    # resolved: each assignment with k particles left shares p(k) equally
    return _entropy(p / math.comb(n, k) for k, p in sectors.items()
                    for _ in range(math.comb(n, k)))


def lowT_total(stat: Statistics, n: int, scheme: MeasurementScheme,
               split: SplitSpectrum | None = None) -> float:
    """Net work in units of kT for an ideally placed piston.

    Full measurements give ln M with M = N + 1 (bosons, count), 2
    (fermions) or 2**N (distinguishable, resolved).  Distinguishable count
    measurements give the binomial entropy; coarse schemes use the sector
    probabilities of ``split`` (a centred box by default).
    """
    stat = Statistics.parse(stat)
    scheme.validate(stat, n)
    if n == 0 or scheme.kind is SchemeKind.TRIVIAL:
        return 0.0
    if scheme.kind is SchemeKind.COUNT:
        if stat is Statistics.BOSON:
            return math.log(n + 1)
        if stat is Statistics.FERMION:
            return math.log(2)
        return binomial_count_entropy(n)
    if scheme.kind is SchemeKind.RESOLVED:
        return n * math.log(2)
    if split is None:
        split = split_box(0.5, 2 * n + 2)
    return scheme_entropy(stat, split, n, scheme)


def _fermi_gap(energies: list[float], occupied: int) -> float:
    """Smallest positive excitation of a fermion filling of sorted modes."""
    if occupied == 0 or occupied >= len(energies):
        return math.inf
    e_f = energies[occupied - 1]
    above = [e for e in energies[occupied:] if not _equal(e, e_f)]
    gap = above[0] - e_f if above else math.inf
    if _equal(energies[occupied], e_f):
        # partially filled Fermi level: holes below it also cost energy
        below = [e for e in energies[:occupied] if not _equal(e, e_f)]
        if below:
            gap = min(gap, e_f - below[-1])
    return gap


def _bose_gap(energies: list[float]) -> float:
    e0 = energies[0]
    above = [e for e in energies if not _equal(e, e0)]
    return above[0] - e0 if above else math.inf


def relevant_gap(stat: Statistics, split: SplitSpectrum, n: int,
                 full: Spectrum | None = None) -> float:
    """Smallest excitation gap of the empty and the split cylinder."""
    stat = Statistics.parse(stat)
    full = _default_full(full, n)
    split_modes = [e for e, _ in split.tagged_modes()]
    if stat is Statistics.FERMION:
        return min(_fermi_gap(full.modes(), n), _fermi_gap(split_modes, n))
    return min(_bose_gap(full.modes()), _bose_gap(split_modes))


@dataclass(frozen=True)
class Comparison:
    W1_exact: float
    W1_closed: float
    W2_exact: float
    W2_closed: float
    net_exact: float
    net_closed: float
    gap: float
    beta_gap: float
    regime_ok: bool

    @property
    def dW1(self) -> float:
        return abs(self.W1_exact - self.W1_closed)

    @property
    def dW2(self) -> float:
        return abs(self.W2_exact - self.W2_closed)

    @property
    def dnet(self) -> float:
        return abs(self.net_exact - self.net_closed)


def compare_to_engine(config: EngineConfig, scheme: MeasurementScheme) -> Comparison:
    """Exact cycle against the closed forms; flags ``regime_ok`` if beta*gap < 10."""
    stat, n, temp = config.stat, config.n, config.temp
    split = config.split()
    full = config.full_box()
    ledger = engine.run_cycle(config, scheme)
    w1 = lowT_insertion_work(stat, split, n, temp, full)
    s = scheme_entropy(stat, split, n, scheme)
    # a partial measurement leaves ln(D) - S of the ground degeneracy unrecovered
    w2 = lowT_extraction_work(stat, split, n, temp, full) + temp * (
        s - ground_log_degeneracy(stat, split, n))
    gap = relevant_gap(stat, split, n, full)
    beta_gap = config.beta * gap
    if scheme.kind is SchemeKind.TRIVIAL:
        net_closed = 0.0
    else:
        net_closed = w1 + w2
    return Comparison(ledger.W1, w1, ledger.expected_W2, w2, ledger.net_work, net_closed,
                      gap, beta_gap, beta_gap >= REGIME_THRESHOLD)


def temperature_for(stat: Statistics, split: SplitSpectrum, n: int, beta_gap: float,
                    full: Spectrum | None = None) -> float:
    """Temperature at which beta times the relevant gap equals ``beta_gap``."""
    return relevant_gap(stat, split, n, full) / beta_gap

