"""The Szilard cycle: insertion, measurement, extraction and erasure.

Every work value uses the extracted-work sign convention,
W = kT ln(Z_final / Z_initial), so negative numbers are work paid in.
The piston position is a fraction of the cylinder length.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence

import numpy as np

from .ensemble import (LogWeight, Statistics, log_z_table, logsumexp, sector_table)
from .errors import InfeasibleOutcomeError, InsufficientLevelsError, SzilardError
from .spectrum import (LEVEL_MARGIN, Spectrum, SplitSpectrum, box_spectrum,
                       truncation_order)

#: resolved measurements enumerate 2**N outcomes
MAX_RESOLVED_N = 16

FD_STEP = 1e-5
LAMBDA_MIN = 1e-4
SCAN_STEP = 1e-3
GOLDEN_TOL = 1e-6


@dataclass(frozen=True)
class EngineConfig:
    """Physical setup of one engine.

    ``profile`` is an optional single-well spectrum at unit width; a region of
    width w then has energies profile / w**2.  Without it the well is an
    infinite box, n**2 / w**2.  ``levels`` pins the number of levels kept per
    region; otherwise the count is chosen and certified automatically.
    """

    stat: Statistics
    n: int
    lam: float
    temp: float
    levels: int | None = None
    profile: Spectrum | None = None
    trunc_tol: float = 1e-16

    def __post_init__(self):
        object.__setattr__(self, "stat", Statistics.parse(self.stat))
        if int(self.n) != self.n or self.n < 0:
            raise ValueError(f"particle number must be a non-negative integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if not 0.0 < self.lam < 1.0:
            raise ValueError(f"barrier position must lie in (0, 1), got {self.lam!r}")
        if not (self.temp > 0 and math.isfinite(self.temp)):
            raise ValueError(f"temperature must be positive and finite, got {self.temp!r}")
        if self.levels is not None and (int(self.levels) != self.levels or self.levels < 1):
            raise ValueError(f"levels must be a positive integer, got {self.levels!r}")
        if not 0 < self.trunc_tol < 1:
            raise ValueError("trunc_tol must lie in (0, 1)")

    @property
    def beta(self) -> float:
        return 1.0 / self.temp

    def with_lambda(self, lam: float) -> "EngineConfig":
        return replace(self, lam=lam)

    def region(self, width: float) -> Spectrum:
        """Certified, truncated spectrum of a region of the given width."""
        beta, n, tol = self.beta, self.n, self.trunc_tol
        if self.profile is not None:
            full = self.profile.scaled(1.0 / (width * width))
        elif self.levels is not None:
            full = box_spectrum(width, self.levels)
        else:
            # analytic depth for the box tail, then certified below
            depth = math.sqrt(1.0 + width * width * math.log(1.0 / tol) / beta)
            full = box_spectrum(width, max(n + LEVEL_MARGIN, math.ceil(depth) + 1))
        if self.levels is not None:
            if len(full) < self.levels:
                raise InsufficientLevelsError(
                    f"insufficient levels: spectrum has {len(full)} levels, "
                    f"{self.levels} requested")
            full = full.truncated(self.levels)
            truncation_order(full, beta, n, tol)
            return full
        return full.truncated(truncation_order(full, beta, n, tol))

    def full_box(self) -> Spectrum:
        return self.region(1.0)

    def split(self, lam: float | None = None) -> SplitSpectrum:
        lam = self.lam if lam is None else lam
        return SplitSpectrum(self.region(lam), self.region(1.0 - lam), lam)


class SchemeKind(str, Enum):
    TRIVIAL = "trivial"
    COUNT = "count"
    COARSE = "coarse"
    RESOLVED = "resolved"


@dataclass(frozen=True)
class MeasurementScheme:
    kind: SchemeKind
    groups: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "kind", SchemeKind(self.kind))
        if self.kind is SchemeKind.COARSE:
            if not self.groups:
                raise ValueError("coarse measurement needs at least one group")
            groups = tuple(tuple(sorted(int(x) for x in g)) for g in self.groups)
            if any(len(g) == 0 for g in groups):
                raise ValueError("coarse groups must be non-empty")
            object.__setattr__(self, "groups", groups)
        elif self.groups:
            raise ValueError(f"{self.kind.value} measurement takes no groups")

    @classmethod
    def trivial(cls) -> "MeasurementScheme":
        return cls(SchemeKind.TRIVIAL)

    @classmethod
    def count(cls) -> "MeasurementScheme":
        return cls(SchemeKind.COUNT)

    @classmethod
    def resolved(cls) -> "MeasurementScheme":
        return cls(SchemeKind.RESOLVED)

    @classmethod
    def coarse(cls, groups: Sequence[Sequence[int]]) -> "MeasurementScheme":
        return cls(SchemeKind.COARSE, tuple(tuple(g) for g in groups))

    def validate(self, stat: Statistics, n: int):
        stat = Statistics.parse(stat)
        if self.kind is SchemeKind.RESOLVED:
            if stat is not Statistics.DISTINGUISHABLE:
                raise ValueError("resolved measurement needs distinguishable particles")
            if n > MAX_RESOLVED_N:
                raise ValueError(f"resolved measurement limited to N <= {MAX_RESOLVED_N}")
        if self.kind is SchemeKind.COARSE:
            seen = [x for g in self.groups for x in g]
            if sorted(seen) != list(range(n + 1)):
                raise ValueError(
                    f"coarse groups {format_groups(self.groups)} are not a partition "
                    f"of 0..{n}")


def parse_groups(text: str) -> tuple[tuple[int, ...], ...]:
    """Parse ``"a-b|c|d-e"`` into inclusive sector ranges."""
    groups = []
    for chunk in text.split("|"):
        chunk = chunk.strip()
        if not chunk:
            raise ValueError(f"empty group in {text!r}")
        if "-" in chunk:
            lo, _, hi = chunk.partition("-")
            try:
                lo_i, hi_i = int(lo), int(hi)
            except ValueError:
                raise ValueError(f"bad range {chunk!r} in {text!r}") from None
            if lo_i < 0 or hi_i < lo_i:
                raise ValueError(f"bad range {chunk!r} in {text!r}")
            groups.append(tuple(range(lo_i, hi_i + 1)))
        else:
            try:
                v = int(chunk)
            except ValueError:
                raise ValueError(f"bad sector {chunk!r} in {text!r}") from None
            if v < 0:
                raise ValueError(f"bad sector {chunk!r} in {text!r}")
            groups.append((v,))
    return tuple(groups)


def format_groups(groups) -> str:
    return "|".join(_group_label(g) for g in groups)


def _group_label(g: Sequence[int]) -> str:
    g = sorted(g)
    if len(g) > 1 and g == list(range(g[0], g[-1] + 1)):
        return f"{g[0]}-{g[-1]}"
    return "+".join(str(x) for x in g)


@dataclass(frozen=True)
class Outcome:
    label: str
    probability: float
    log_z: LogWeight
    sectors: tuple[int, ...]
    assignment: str | None = None


@dataclass(frozen=True)
class OutcomeDistribution:
    scheme: MeasurementScheme
    outcomes: tuple[Outcome, ...]
    log_total: float

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([o.probability for o in self.outcomes])

    def __len__(self) -> int:
        return len(self.outcomes)

    def __getitem__(self, label: str) -> Outcome:
        for o in self.outcomes:
            if o.label == label:
                return o
        raise KeyError(label)


@dataclass(frozen=True)
class WorkLedger:
    W1: float
    W2_per_outcome: tuple[float, ...]
    expected_W2: float
    net_work: float
    entropy_S: float
    erasure_cost: float
    net_with_erasure: float
    distribution: OutcomeDistribution = field(repr=False)


@dataclass(frozen=True)
class ForceProfilePoint:
    lam: float
    free_energy: float
    force: float
    feasible: bool = True
    reason: str = ""


@dataclass(frozen=True)
class Equilibrium:
    lam: float
    free_energy: float
    force: float
    at_boundary: bool


def _sector_logs(config: EngineConfig, lam: float | None = None) -> np.ndarray:
    return sector_table(config.split(lam), config.stat, config.n, config.beta,
                        count_identities=True)


def _log_z0(config: EngineConfig) -> float:
    return float(log_z_table(config.full_box(), config.stat, config.n, config.beta)[config.n])


def insertion_work(config: EngineConfig) -> float:
    """W1 = kT ln(Z_bar / Z_0), Z_bar the mixture over all sectors."""
    log_bar = logsumexp(_sector_logs(config))
    return config.temp * (log_bar - _log_z0(config))


def _dist_log_z1(config: EngineConfig, lam: float) -> tuple[float, float]:
    split = config.split(lam)
    beta = config.beta
    return (float(log_z_table(split.left, config.stat, 1, beta)[1]),
            float(log_z_table(split.right, config.stat, 1, beta)[1]))


def _raw_outcomes(config: EngineConfig, scheme: MeasurementScheme,
                  lam: float) -> list[tuple[str, float, tuple[int, ...], str | None]]:
    n = config.n
    if scheme.kind is SchemeKind.RESOLVED:
        left, right = _dist_log_z1(config, lam)
        out = []
        for bits in itertools.product("LR", repeat=n):
            k = bits.count("L")
            label = "".join(bits) if n else "-"
            out.append((label, k * left + (n - k) * right, (k,), label))
        return out
    logs = _sector_logs(config, lam)
    if scheme.kind is SchemeKind.TRIVIAL:
        return [("all", logsumexp(logs), tuple(range(n + 1)), None)]
    if scheme.kind is SchemeKind.COUNT:
        return [(str(k), float(logs[k]), (k,), None) for k in range(n + 1)]
    return [(_group_label(g), logsumexp(logs[list(g)]), g, None) for g in scheme.groups]


def measure(config: EngineConfig, scheme: MeasurementScheme) -> OutcomeDistribution:
    """Outcome probabilities p_m = Z_m / sum Z_m; impossible outcomes dropped."""
    scheme.validate(config.stat, config.n)
    raw = [r for r in _raw_outcomes(config, scheme, config.lam) if r[1] > -math.inf]
    log_total = logsumexp([r[1] for r in raw])
    outcomes = tuple(
        Outcome(label, math.exp(lz - log_total), LogWeight(lz), sectors, assignment)
        for label, lz, sectors, assignment in raw)
    return OutcomeDistribution(scheme, outcomes, log_total)


def extraction_work(config: EngineConfig, outcome: Outcome) -> float:
    """W2 = kT ln(Z_0 / Z_m): quasi-static return to the empty cylinder."""
    if outcome.log_z.is_zero:
        raise ValueError(f"outcome {outcome.label!r} has zero probability")
    return config.temp * (_log_z0(config) - outcome.log_z.log_magnitude)


def information_gain(dist: OutcomeDistribution) -> float:
    """Shannon entropy of the outcomes, in units of k."""
    p = dist.probabilities
    p = p[p > 0]
    return -math.fsum((p * np.log(p)).tolist())


def run_cycle(config: EngineConfig, scheme: MeasurementScheme) -> WorkLedger:
    temp = config.temp
    log_z0 = _log_z0(config)
    w1 = temp * (logsumexp(_sector_logs(config)) - log_z0)
    dist = measure(config, scheme)
    w2 = tuple(temp * (log_z0 - o.log_z.log_magnitude) for o in dist.outcomes)
    p = [o.probability for o in dist.outcomes]
    expected_w2 = math.fsum(pm * w for pm, w in zip(p, w2))
    # Z_0 cancels between insertion and extraction; summing kT ln(Z_bar/Z_m)
    # per outcome avoids subtracting two O(dE) numbers
    net = temp * math.fsum(pm * (dist.log_total - o.log_z.log_magnitude)
                           for pm, o in zip(p, dist.outcomes))
    s = information_gain(dist)
    erasure = temp * s
    return WorkLedger(W1=w1, W2_per_outcome=w2, expected_W2=expected_w2,
                      net_work=net, entropy_S=s, erasure_cost=erasure,
                      net_with_erasure=net - erasure, distribution=dist)


def _outcome_log_z(config: EngineConfig, outcome: Outcome, lam: float) -> float:
    """log Z of the outcome's fixed particle content with the piston at ``lam``."""
    n = config.n
    if outcome.assignment is not None:
        left, right = _dist_log_z1(config, lam)
        k = outcome.sectors[0]
        return k * left + (n - k) * right
    logs = _sector_logs(config, lam)
    return logsumexp(logs[list(outcome.sectors)])


def _free_energy_at(config: EngineConfig, outcome: Outcome, lam: float) -> float:
    lz = _outcome_log_z(config, outcome, lam)
    if lz == -math.inf:
        raise InfeasibleOutcomeError(
            f"outcome {outcome.label!r} violates the Pauli capacity at lambda={lam:g}")
    return -config.temp * lz


def free_energy_profile(config: EngineConfig, outcome: Outcome,
                        lambda_grid: Sequence[float]) -> list[ForceProfilePoint]:
    """F(lambda) for a fixed outcome and the force -dF/dlambda on the piston."""
    points = []
    for lam in lambda_grid:
        lam = float(lam)
        if not FD_STEP < lam < 1.0 - FD_STEP:
            raise ValueError(f"grid point {lam!r} outside ({FD_STEP}, {1 - FD_STEP})")
        try:
            f = _free_energy_at(config, outcome, lam)
            f_hi = _free_energy_at(config, outcome, lam + FD_STEP)
            f_lo = _free_energy_at(config, outcome, lam - FD_STEP)
        except SzilardError as exc:
            points.append(ForceProfilePoint(lam, math.nan, math.nan, False, str(exc)))
            continue
        points.append(ForceProfilePoint(lam, f, -(f_hi - f_lo) / (2 * FD_STEP)))
    return points


def golden_section(f, a: float, b: float, tol: float) -> float:
    """Minimiser of a unimodal ``f`` on [a, b] to within ``tol``."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    return (a + b) / 2.0


def equilibrium_position(config: EngineConfig, outcome: Outcome) -> Equilibrium:
    """Piston position where the outcome's free energy is lowest.

    A 1e-3 grid scan brackets the minimum, golden-section search refines it.
    Minima pinned at the edge of the scan are reported with ``at_boundary``.
    """
    grid = np.arange(LAMBDA_MIN, 1.0 - LAMBDA_MIN + SCAN_STEP / 2, SCAN_STEP)
    grid[-1] = min(grid[-1], 1.0 - LAMBDA_MIN)
    values = np.full(grid.size, math.inf)
    for i, lam in enumerate(grid):
        try:
            values[i] = _free_energy_at(config, outcome, float(lam))
        except SzilardError:
            pass
    feasible = np.flatnonzero(np.isfinite(values))
    if feasible.size == 0:
        raise InfeasibleOutcomeError(
            f"outcome {outcome.label!r} is infeasible at every piston position")
    i = int(np.argmin(values))
    at_boundary = i in (feasible[0], feasible[-1])
    if at_boundary:
        lam_star = float(grid[i])
    else:
        lo, hi = float(grid[i - 1]), float(grid[i + 1])
        lam_star = golden_section(lambda x: _free_energy_at(config, outcome, x),
                                  lo, hi, GOLDEN_TOL / 10)
    f_star = _free_energy_at(config, outcome, lam_star)
    h = min(FD_STEP, lam_star / 2, (1.0 - lam_star) / 2)
    force = -(_free_energy_at(config, outcome, lam_star + h)
              - _free_energy_at(config, outcome, lam_star - h)) / (2 * h)
    return Equilibrium(lam_star, f_star, force, bool(at_boundary))
