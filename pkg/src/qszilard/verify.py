"""Acceptance checks shared by ``qszilard verify`` and the test suite.

Each check returns a :class:`CheckResult`; ledgers produced along the way are
collected so the erasure-closure check can revisit every one of them.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from . import asymptotics as asym
from .engine import EngineConfig, MeasurementScheme, WorkLedger, format_groups, run_cycle
from .ensemble import Statistics, z_many
from .oracle import enumerate_z
from .spectrum import box_spectrum, split_box

BOSON, FERMION, DIST = Statistics.BOSON, Statistics.FERMION, Statistics.DISTINGUISHABLE

#: beta times the relevant gap for the low-temperature checks
LOW_T_BETA_GAP = 25.0

SUITE_BUDGET_S = 60.0


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}  ({self.seconds:.2f} s)  {self.detail}".rstrip()


@dataclass
class Context:
    seed: int = 0
    quick: bool = False
    ledgers: list[tuple[str, EngineConfig, WorkLedger]] = field(default_factory=list)

    def rng(self, salt: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, salt])

    def cycle(self, tag: str, config: EngineConfig, scheme: MeasurementScheme) -> WorkLedger:
        ledger = run_cycle(config, scheme)
        self.ledgers.append((tag, config, ledger))
        return ledger


def low_t_config(stat, n: int, lam: float, beta_gap: float = LOW_T_BETA_GAP) -> EngineConfig:
    split = split_box(lam, n + 12)
    temp = asym.temperature_for(stat, split, n, beta_gap, box_spectrum(1.0, n + 12))
    return EngineConfig(stat, n, lam, temp)


def set_partitions(items: list[int]) -> Iterator[list[list[int]]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def random_scheme(rng: np.random.Generator, stat: Statistics, n: int) -> MeasurementScheme:
    kinds = ["trivial", "count", "coarse"] + (["resolved"] if stat is DIST else [])
    kind = kinds[int(rng.integers(len(kinds)))]
    if kind == "coarse":
        labels = rng.integers(0, n + 1, size=n + 1)
        blocks: dict[int, list[int]] = {}
        for sector, b in enumerate(labels):
            blocks.setdefault(int(b), []).append(sector)
        return MeasurementScheme.coarse(list(blocks.values()))
    return MeasurementScheme(kind)


def random_config(rng: np.random.Generator, max_n: int = 6) -> EngineConfig:
    stat = [BOSON, FERMION, DIST][int(rng.integers(3))]
    n = int(rng.integers(0, max_n + 1))
    lam = float(rng.uniform(0.05, 0.95))
    temp = float(np.exp(rng.uniform(np.log(0.005), np.log(2.0))))
    return EngineConfig(stat, n, lam, temp)


def check_oracle_equivalence(ctx: Context) -> CheckResult:
    """1. recursions against enumeration, N <= 4, K <= 8, beta in [0.1, 50]."""
    rng = ctx.rng(1)
    n_beta = 4 if ctx.quick else 20
    betas = rng.uniform(0.1, 50.0, size=n_beta)
    worst, where, count = 0.0, "", 0
    for stat in (BOSON, FERMION, DIST):
        for k in range(2, 9):
            spectrum = box_spectrum(1.0, k)
            for n in range(5):
                if stat is FERMION and n > k:
                    continue
                for beta in betas:
                    fast = z_many(spectrum, stat, n, float(beta)).log()
                    slow = enumerate_z(spectrum, stat, n, float(beta)).log()
                    err = abs(math.expm1(fast - slow))
                    count += 1
                    if err > worst:
                        worst, where = err, f"{stat.value} K={k} N={n} beta={beta:.4g}"
    ok = worst <= 1e-10
    return CheckResult("oracle equivalence", ok,
                       f"{count} cases, worst rel err {worst:.2e} at {where}")


def check_ledger_identity(ctx: Context) -> CheckResult:
    """2. net work equals kT * S at all temperatures."""
    rng = ctx.rng(2)
    trials = 40 if ctx.quick else 200
    worst, where = 0.0, ""
    for i in range(trials):
        config = random_config(rng)
        scheme = random_scheme(rng, config.stat, config.n)
        ledger = ctx.cycle("ledger", config, scheme)
        scale = max(config.temp, abs(ledger.net_work))
        err = abs(ledger.net_work - config.temp * ledger.entropy_S) / scale
        if err > worst:
            worst, where = err, _describe(config, scheme)
    return CheckResult("ledger identity", worst <= 1e-10,
                       f"{trials} configs, worst {worst:.2e} (x max(kT,|W|)) at {where}")


def _describe(config: EngineConfig, scheme: MeasurementScheme) -> str:
    extra = f"[{format_groups(scheme.groups)}]" if scheme.groups else ""
    return (f"{config.stat.value} N={config.n} lam={config.lam:.4g} T={config.temp:.4g} "
            f"{scheme.kind.value}{extra}")


LOW_T_CASES = [
    (BOSON, (1, 2, 3, 5), MeasurementScheme.count(), lambda n: math.log(n + 1)),
    (FERMION, (1, 2, 3, 4), MeasurementScheme.count(), lambda n: math.log(2)),
    (DIST, (1, 2, 3), MeasurementScheme.resolved(), lambda n: n * math.log(2)),
]


def check_low_t_limits(ctx: Context) -> list[CheckResult]:
    """3. net/kT -> ln M at lambda = 0.5, beta * gap = 25."""
    results = []
    for stat, ns, scheme, target in LOW_T_CASES:
        t0 = time.perf_counter()
        bad = []
        worst = 0.0
        for n in ns:
            config = low_t_config(stat, n, 0.5)
            ledger = ctx.cycle("low-T", config, scheme)
            err = abs(ledger.net_work / config.temp - target(n))
            worst = max(worst, err)
            if err > 1e-6:
                bad.append(f"N={n}: net/kT={ledger.net_work / config.temp:.6g} "
                           f"vs {target(n):.6g}")
        detail = f"N in {list(ns)}, worst |net/kT - ln M| {worst:.2e}"
        if bad:
            detail += "; " + "; ".join(bad)
        results.append(CheckResult(f"low-T ln M, {stat.value} {scheme.kind.value}",
                                   not bad, detail, time.perf_counter() - t0))
    return results


def check_step_decomposition(ctx: Context) -> CheckResult:
    """4. exact W1 and E[W2] against the closed forms."""
    cases = []
    for stat, ns, scheme, _ in LOW_T_CASES:
        lams = (0.4, 0.5) if stat is FERMION else (0.5,)
        cases += [(stat, n, lam, scheme) for n in ns for lam in lams]
    worst, bad = 0.0, []
    for stat, n, lam, scheme in cases:
        config = low_t_config(stat, n, lam)
        ledger = ctx.cycle("steps", config, scheme)
        split, full, temp = config.split(), config.full_box(), config.temp
        w1 = asym.lowT_insertion_work(stat, split, n, temp, full)
        w2 = asym.lowT_extraction_work(stat, split, n, temp, full)
        err = max(abs(ledger.W1 - w1), abs(ledger.expected_W2 - w2)) / temp
        worst = max(worst, err)
        if err > 1e-5:
            bad.append(f"{stat.value} N={n} lam={lam}: {err:.2e} kT")
    detail = f"{len(cases)} configs, worst {worst:.2e} kT"
    if bad:
        detail += "; " + "; ".join(bad)
    return CheckResult("step decomposition", not bad, detail)


def check_binomial_count(ctx: Context) -> CheckResult:
    """5. distinguishable count measurement gives the binomial entropy."""
    worst, notes = 0.0, []
    for n in range(1, 11):
        config = low_t_config(DIST, n, 0.5)
        ledger = ctx.cycle("binomial", config, MeasurementScheme.count())
        worst = max(worst, abs(ledger.net_work / config.temp - asym.binomial_count_entropy(n)))
    ok = worst <= 1e-8
    ns = [2, 5, 10, 50, 100]
    ratios = [asym.binomial_count_entropy(n) / math.log(n + 1) for n in ns]
    decreasing = all(b < a for a, b in zip(ratios, ratios[1:]))
    expected = 1.5 * math.log(2) / math.log(3)
    at_two = abs(ratios[0] - expected) <= 1e-12 and abs(ratios[0] - 0.9464) < 5e-5
    if not decreasing:
        notes.append("ratio not strictly decreasing")
    if not at_two:
        notes.append(f"ratio at N=2 is {ratios[0]!r}")
    detail = (f"worst |net/kT - H| {worst:.2e}; ratios "
              + ", ".join(f"{n}:{r:.4f}" for n, r in zip(ns, ratios)))
    if notes:
        detail += "; " + "; ".join(notes)
    return CheckResult("binomial count entropy", ok and decreasing and at_two, detail)


def check_trivial_null(ctx: Context) -> CheckResult:
    """6. a measurement that learns nothing extracts nothing."""
    rng = ctx.rng(6)
    trials = 15 if ctx.quick else 50
    worst = 0.0
    for _ in range(trials):
        config = random_config(rng)
        ledger = ctx.cycle("trivial", config, MeasurementScheme.trivial())
        w2 = ledger.W2_per_outcome[0]
        worst = max(worst, abs(ledger.net_work) / config.temp,
                    abs(ledger.W1 + w2) / config.temp)
    return CheckResult("trivial measurement null cycle", worst <= 1e-12,
                       f"{trials} configs, worst {worst:.2e} kT")


def check_erasure_closure(ctx: Context) -> CheckResult:
    """7. erasing the record costs exactly the work gained."""
    worst, where = 0.0, ""
    for tag, config, ledger in ctx.ledgers:
        err = abs(ledger.net_with_erasure) / config.temp
        if err > worst:
            worst, where = err, tag
    return CheckResult("erasure closure", worst <= 1e-12,
                       f"{len(ctx.ledgers)} ledgers, worst {worst:.2e} kT ({where or '-'})")


def check_coarsening(ctx: Context) -> CheckResult:
    """8. every coarse-graining of the boson N=4 count measurement."""
    n = 4
    config = low_t_config(BOSON, n, 0.5)
    bound = config.temp * math.log(n + 1)
    entropies = {}
    bad = []
    partitions = list(set_partitions(list(range(n + 1))))
    for part in partitions:
        ledger = ctx.cycle("coarse", config, MeasurementScheme.coarse(part))
        key = tuple(sorted(tuple(sorted(b)) for b in part))
        entropies[key] = ledger.entropy_S
        full = len(part) == n + 1
        if ledger.net_work > bound * (1 + 1e-12):
            bad.append(f"{key} exceeds kT ln 5")
        at_bound = abs(ledger.net_work - bound) <= 1e-9 * config.temp
        if at_bound != full:
            bad.append(f"{key} equality={at_bound}")
    # merging any two blocks never raises the entropy
    for key, s in entropies.items():
        for i in range(len(key)):
            for j in range(i + 1, len(key)):
                merged = [b for k, b in enumerate(key) if k not in (i, j)]
                merged.append(tuple(sorted(key[i] + key[j])))
                merged_key = tuple(sorted(merged))
                if entropies[merged_key] > s + 1e-12:
                    bad.append(f"merging in {key} raised S")
    detail = f"{len(partitions)} partitions of {{0..{n}}}"
    if bad:
        detail += "; " + "; ".join(bad[:5])
    return CheckResult("coarsening monotonicity", not bad, detail)


def _timed(fn: Callable[[Context], CheckResult], ctx: Context, budget: float | None):
    t0 = time.perf_counter()
    result = fn(ctx)
    result.seconds = time.perf_counter() - t0
    if budget is not None and result.seconds > budget:
        result.passed = False
        result.detail += f"; exceeded {budget:g} s budget"
    return result


def run_checks(seed: int = 0, quick: bool = False,
               report: Callable[[CheckResult], None] | None = None) -> list[CheckResult]:
    """Run the acceptance suite, calling ``report`` as each check finishes."""
    ctx = Context(seed=seed, quick=quick)
    results: list[CheckResult] = []

    def emit(r: CheckResult):
        results.append(r)
        if report is not None:
            report(r)

    start = time.perf_counter()
    emit(_timed(check_oracle_equivalence, ctx, 10.0))
    emit(_timed(check_ledger_identity, ctx, 20.0))
    for r in check_low_t_limits(ctx):
        emit(r)
    emit(_timed(check_step_decomposition, ctx, None))
    emit(_timed(check_binomial_count, ctx, None))
    emit(_timed(check_trivial_null, ctx, None))
    emit(_timed(check_coarsening, ctx, 5.0))
    emit(_timed(check_erasure_closure, ctx, None))
    total = time.perf_counter() - start
    failures = sum(not r.passed for r in results)
    emit(CheckResult("full suite", failures == 0 and total < SUITE_BUDGET_S,
                     f"{failures} failing checks, total {total:.1f} s", total))
    return results
