"""Brute-force enumeration of many-body configurations.

Slow on purpose and independent of the recursions in :mod:`ensemble`: every
microstate (or occupation pattern with its exact multiplicity) is listed and
its Boltzmann weight summed with ``math.fsum``.  Instances above
``MAX_CONFIGURATIONS`` are refused rather than approximated.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from typing import Iterator, Sequence

from .ensemble import LogWeight, Statistics
from .errors import InstanceTooLargeError
from .spectrum import Spectrum, SplitSpectrum

MAX_CONFIGURATIONS = 10**7


def _occupations(caps: Sequence[int | None], n: int) -> Iterator[tuple[int, ...]]:
    """All (n_1, ..., n_K) with sum n and n_i <= caps[i] (None = unbounded)."""
    k = len(caps)
    if k == 0:
        if n == 0:
            yield ()
        return
    cap = caps[0] if caps[0] is not None else n
    for first in range(min(cap, n), -1, -1):
        for rest in _occupations(caps[1:], n - first):
            yield (first,) + rest


def count_configurations(degeneracies: Sequence[int], stat: Statistics, n: int) -> int:
    """Number of terms the oracle would enumerate."""
    stat = Statistics.parse(stat)
    k = len(degeneracies)
    if stat is Statistics.DISTINGUISHABLE:
        return k ** n
    if stat is Statistics.BOSON:
        return math.comb(n + k - 1, n) if k else int(n == 0)
    # occupation patterns with n_i <= g_i: coefficient of x**n in prod (1 + ... + x**g_i)
    poly = [1] + [0] * n
    for g in degeneracies:
        new = [0] * (n + 1)
        for i, c in enumerate(poly):
            if c:
                for m in range(0, min(g, n - i) + 1):
                    new[i + m] += c
        poly = new
    return poly[n]


def _refuse_if_large(count: int):
    if count > MAX_CONFIGURATIONS:
        raise InstanceTooLargeError(
            f"instance too large for enumeration: {count} configurations "
            f"(cap {MAX_CONFIGURATIONS})")


def _configurations(energies: Sequence[float], degeneracies: Sequence[int],
                    stat: Statistics, n: int) -> Iterator[tuple[tuple[int, ...], float, float]]:
    """Yield (occupations, log multiplicity, total energy) for every term."""
    if stat is Statistics.DISTINGUISHABLE:
        k = len(energies)
        for assignment in itertools.product(range(k), repeat=n):
            occ = [0] * k
            for i in assignment:
                occ[i] += 1
            log_mult = math.fsum(math.log(degeneracies[i]) for i in assignment)
            energy = math.fsum(energies[i] for i in assignment)
            yield tuple(occ), log_mult, energy
        return
    if stat is Statistics.BOSON:
        caps = [None] * len(energies)
    else:
        caps = list(degeneracies)
    for occ in _occupations(caps, n):
        if stat is Statistics.BOSON:
            log_mult = math.fsum(math.log(math.comb(m + g - 1, m))
                                 for m, g in zip(occ, degeneracies))
        else:
            log_mult = math.fsum(math.log(math.comb(g, m))
                                 for m, g in zip(occ, degeneracies))
        energy = math.fsum(m * e for m, e in zip(occ, energies))
        yield occ, log_mult, energy


def _sum_logs(logs: list[float]) -> LogWeight:
    if not logs:
        return LogWeight.zero()
    top = max(logs)
    return LogWeight(top + math.log(math.fsum(math.exp(x - top) for x in logs)))


def enumerate_z(spectrum: Spectrum, stat: Statistics, n: int, beta: float) -> LogWeight:
    """Partition function by direct summation over configurations."""
    stat = Statistics.parse(stat)
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta!r}")
    _refuse_if_large(count_configurations(spectrum.degeneracies, stat, n))
    logs = [lm - beta * energy for _, lm, energy in
            _configurations(spectrum.energies, spectrum.degeneracies, stat, n)]
    return _sum_logs(logs)


def enumerate_sector_probabilities(split: SplitSpectrum, stat: Statistics, n: int,
                                   beta: float) -> list[tuple[int, float]]:
    """Probability of finding n_left particles left of the piston, n_left = 0..n.

    Configurations of the combined two-sided system are enumerated and binned
    by how many particles sit on left-tagged levels.  For distinguishable
    particles this bins over which particles are left (identities unresolved).
    """
    stat = Statistics.parse(stat)
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta!r}")
    levels = split.tagged_levels()
    energies = [lv[0] for lv in levels]
    degeneracies = [lv[1] for lv in levels]
    is_left = [lv[2] == "L" for lv in levels]
    _refuse_if_large(count_configurations(degeneracies, stat, n))
    bins: dict[int, list[float]] = defaultdict(list)
    for occ, lm, energy in _configurations(energies, degeneracies, stat, n):
        n_left = sum(m for m, left in zip(occ, is_left) if left)
        bins[n_left].append(lm - beta * energy)
    sector = {k: _sum_logs(v).log_magnitude for k, v in bins.items()}
    top = max(sector.values())
    weights = {k: math.exp(v - top) for k, v in sector.items()}
    total = math.fsum(weights.values())
    return [(k, weights.get(k, 0.0) / total) for k in range(n + 1)]
