"""Canonical N-particle partition functions in the log domain.

Bosons use the Newton-type recursion over single-particle sums z1(k*beta),
which has only positive terms.  Fermions are built level by level from the
elementary symmetric polynomials of the Boltzmann factors; the alternating
Newton recursion is kept as :func:`fermion_newton_table` for comparison but
cancels catastrophically once beta times the level spacing is large.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import gammaln

from .errors import PauliCapacityError
from .spectrum import Spectrum, SplitSpectrum

NEG_INF = -math.inf


class Statistics(str, Enum):
    BOSON = "boson"
    FERMION = "fermion"
    DISTINGUISHABLE = "dist"

    @classmethod
    def parse(cls, name: str | "Statistics") -> "Statistics":
        if isinstance(name, Statistics):
            return name
        key = str(name).strip().lower()
        aliases = {"b": "boson", "bose": "boson", "bosons": "boson",
                   "f": "fermion", "fermi": "fermion", "fermions": "fermion",
                   "d": "dist", "distinguishable": "dist", "boltzmann": "dist"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ValueError(f"unknown statistics {name!r}") from None


@dataclass(frozen=True)
class LogWeight:
    """A real number stored as sign * exp(log_magnitude)."""

    log_magnitude: float
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or 1, got {self.sign!r}")
        if self.sign != 0 and self.log_magnitude == NEG_INF:
            object.__setattr__(self, "sign", 0)
        if self.sign == 0:
            object.__setattr__(self, "log_magnitude", NEG_INF)
        elif math.isnan(self.log_magnitude):
            raise ValueError("log magnitude is NaN")

    @classmethod
    def zero(cls) -> "LogWeight":
        return cls(NEG_INF, 0)

    @classmethod
    def one(cls) -> "LogWeight":
        return cls(0.0, 1)

    @classmethod
    def from_value(cls, x: float) -> "LogWeight":
        if x == 0:
            return cls.zero()
        return cls(math.log(abs(x)), 1 if x > 0 else -1)

    @property
    def is_zero(self) -> bool:
        return self.sign == 0

    @property
    def value(self) -> float:
        """Plain float; under/overflows for extreme magnitudes."""
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_magnitude)

    def log(self) -> float:
        if self.sign <= 0:
            raise ValueError("logarithm of a non-positive weight")
        return self.log_magnitude

    def __mul__(self, other: "LogWeight") -> "LogWeight":
        if self.sign == 0 or other.sign == 0:
            return LogWeight.zero()
        return LogWeight(self.log_magnitude + other.log_magnitude, self.sign * other.sign)

    def __truediv__(self, other: "LogWeight") -> "LogWeight":
        if other.sign == 0:
            raise ZeroDivisionError("division by a zero weight")
        if self.sign == 0:
            return LogWeight.zero()
        return LogWeight(self.log_magnitude - other.log_magnitude, self.sign * other.sign)

    def __neg__(self) -> "LogWeight":
        return LogWeight(self.log_magnitude, -self.sign)

    def __add__(self, other: "LogWeight") -> "LogWeight":
        return signed_logsumexp([self, other])

    def __sub__(self, other: "LogWeight") -> "LogWeight":
        return self + (-other)

    def __pow__(self, n: int) -> "LogWeight":
        if n == 0:
            return LogWeight.one()
        if self.sign == 0:
            return LogWeight.zero()
        return LogWeight(n * self.log_magnitude, self.sign ** n)


def logsumexp(logs) -> float:
    """log(sum(exp(logs))) with a compensated (exactly rounded) sum."""
    logs = np.asarray(logs, dtype=float)
    if logs.size == 0:
        return NEG_INF
    top = float(np.max(logs))
    if top == NEG_INF:
        return NEG_INF
    if top == math.inf:
        return math.inf
    return top + math.log(math.fsum(np.exp(logs - top).tolist()))


def _lse_columns(stack: np.ndarray) -> np.ndarray:
    top = np.max(stack, axis=0)
    safe = np.where(np.isfinite(top), top, 0.0)
    with np.errstate(divide="ignore"):
        return np.where(np.isfinite(top),
                        safe + np.log(np.sum(np.exp(stack - safe), axis=0)), NEG_INF)


def signed_logsumexp(weights) -> LogWeight:
    """Sum of signed log weights, accumulated with math.fsum."""
    live = [w for w in weights if w.sign != 0]
    if not live:
        return LogWeight.zero()
    top = max(w.log_magnitude for w in live)
    total = math.fsum(w.sign * math.exp(w.log_magnitude - top) for w in live)
    if total == 0.0:
        return LogWeight.zero()
    return LogWeight(top + math.log(abs(total)), 1 if total > 0 else -1)


def _log_z1(spectrum: Spectrum, beta: float) -> float:
    # ground level factored out so the residual sum lies in [1, sum(g)]
    e, g = spectrum.e, spectrum.g
    e0 = spectrum.ground
    return -beta * e0 + math.log(math.fsum((g * np.exp(-beta * (e - e0))).tolist()))


def z1(spectrum: Spectrum, beta: float) -> LogWeight:
    """Single-particle partition sum, sum_i g_i exp(-beta e_i)."""
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta!r}")
    return LogWeight(_log_z1(spectrum, beta))


def _check_args(n: int, beta: float):
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta!r}")
    if int(n) != n or n < 0:
        raise ValueError(f"particle number must be a non-negative integer, got {n!r}")


def boson_table(spectrum: Spectrum, n_max: int, beta: float) -> np.ndarray:
    """log Z_B(n) for n = 0..n_max via Z(n) = (1/n) sum_k z1(k beta) Z(n-k)."""
    _check_args(n_max, beta)
    log_zk = np.array([_log_z1(spectrum, k * beta) for k in range(1, n_max + 1)])
    table = np.empty(n_max + 1)
    table[0] = 0.0
    for n in range(1, n_max + 1):
        # pairs z1(k beta) with Z(n-k), k = 1..n
        terms = log_zk[:n] + table[n - 1::-1]
        table[n] = logsumexp(terms) - math.log(n)
    return table


def fermion_table(spectrum: Spectrum, n_max: int, beta: float) -> np.ndarray:
    """log Z_F(n) for n = 0..n_max, adding one level at a time.

    For each level with degeneracy g the update is
    Z(n) <- sum_m C(g, m) x**m Z(n - m) with x = exp(-beta (e - e_ground)),
    a sum of positive terms only.  Entries above the capacity are -inf.
    """
    _check_args(n_max, beta)
    e0 = spectrum.ground
    table = np.full(n_max + 1, NEG_INF)
    table[0] = 0.0
    for e, g in zip(spectrum.energies, spectrum.degeneracies):
        shifted = -beta * (e - e0)
        m = np.arange(0, min(g, n_max) + 1)
        log_coef = gammaln(g + 1) - gammaln(m + 1) - gammaln(g - m + 1) + m * shifted
        stack = np.full((m.size, n_max + 1), NEG_INF)
        for i in m:
            stack[i, i:] = log_coef[i] + table[:n_max + 1 - i]
        table = _lse_columns(stack)
    n = np.arange(n_max + 1)
    return np.where(np.isfinite(table), table - beta * e0 * n, NEG_INF)


def fermion_newton_table(spectrum: Spectrum, n_max: int, beta: float) -> list[LogWeight]:
    """Alternating recursion Z(n) = (1/n) sum_k (-1)**(k+1) z1(k beta) Z(n-k).

    Accumulated in signed log space with fsum.  Only reliable while
    beta * (level spacing) stays small; see the module docstring.
    """
    _check_args(n_max, beta)
    zk = [LogWeight(_log_z1(spectrum, k * beta)) for k in range(1, n_max + 1)]
    table = [LogWeight.one()]
    for n in range(1, n_max + 1):
        terms = []
        for k in range(1, n + 1):
            t = zk[k - 1] * table[n - k]
            terms.append(t if k % 2 == 1 else -t)
        s = signed_logsumexp(terms)
        table.append(LogWeight(s.log_magnitude - math.log(n), s.sign))
    return table


def dist_table(spectrum: Spectrum, n_max: int, beta: float) -> np.ndarray:
    """log z1**n for labelled particles, n = 0..n_max."""
    _check_args(n_max, beta)
    return np.arange(n_max + 1) * _log_z1(spectrum, beta)


def log_z_table(spectrum: Spectrum, stat: Statistics, n_max: int, beta: float) -> np.ndarray:
    """log Z(n), n = 0..n_max; -inf marks fillings beyond the Pauli capacity."""
    stat = Statistics.parse(stat)
    if stat is Statistics.BOSON:
        return boson_table(spectrum, n_max, beta)
    if stat is Statistics.FERMION:
        return fermion_table(spectrum, n_max, beta)
    if stat is Statistics.DISTINGUISHABLE:
        return dist_table(spectrum, n_max, beta)
    raise AssertionError(stat)


def z_many(spectrum: Spectrum, stat: Statistics, n: int, beta: float) -> LogWeight:
    """Canonical partition function of ``n`` particles."""
    stat = Statistics.parse(stat)
    _check_args(n, beta)
    if stat is Statistics.FERMION and spectrum.capacity < n:
        raise PauliCapacityError(
            f"Pauli capacity exceeded: {n} fermions in {spectrum.capacity} modes")
    return LogWeight(float(log_z_table(spectrum, stat, n, beta)[n]))


def log_binomial(n: int, k) -> np.ndarray:
    k = np.asarray(k)
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def sector_table(split: SplitSpectrum, stat: Statistics, n: int, beta: float,
                 count_identities: bool = True) -> np.ndarray:
    """log Z of every left-count sector n_left = 0..n; -inf if Pauli-forbidden."""
    stat = Statistics.parse(stat)
    left = log_z_table(split.left, stat, n, beta)
    right = log_z_table(split.right, stat, n, beta)
    logs = left + right[::-1]
    if stat is Statistics.DISTINGUISHABLE and count_identities:
        logs = logs + log_binomial(n, np.arange(n + 1))
    return logs


def z_sector(split: SplitSpectrum, stat: Statistics, n_left: int, n: int, beta: float,
             count_identities: bool = False) -> LogWeight:
    """Partition function restricted to ``n_left`` particles left of the piston.

    For distinguishable particles ``count_identities`` adds the factor
    C(n, n_left) for not knowing which particles are on the left.
    """
    stat = Statistics.parse(stat)
    _check_args(n, beta)
    if int(n_left) != n_left or not 0 <= n_left <= n:
        raise ValueError(f"n_left must lie in 0..{n}, got {n_left!r}")
    if stat is Statistics.FERMION:
        if n_left > split.left.capacity or n - n_left > split.right.capacity:
            raise PauliCapacityError(
                f"Pauli capacity exceeded: sector ({n_left}, {n - n_left}) does not fit "
                f"in ({split.left.capacity}, {split.right.capacity}) modes")
    zl = z_many(split.left, stat, n_left, beta)
    zr = z_many(split.right, stat, n - n_left, beta)
    out = zl * zr
    if stat is Statistics.DISTINGUISHABLE and count_identities:
        out = out * LogWeight(float(log_binomial(n, n_left)))
    return out


def free_energy(z: LogWeight, temp: float) -> float:
    """F = -kT ln Z."""
    if z.sign <= 0:
        raise ValueError("free energy needs a positive partition function")
    if not temp > 0:
        raise ValueError(f"temperature must be positive, got {temp!r}")
    return -temp * z.log_magnitude
