"""Command-line front end.

Exit codes: 0 success, 1 physics or verification failure, 2 usage error.
All flags are validated before any computation starts.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Any, Sequence

import numpy as np

from . import __version__
from .engine import (EngineConfig, MeasurementScheme, SchemeKind, equilibrium_position,
                     format_groups, free_energy_profile, measure, parse_groups, run_cycle)
from .ensemble import Statistics
from .errors import SzilardError
from .spectrum import Spectrum, box_spectrum, load_spectrum
from .verify import run_checks

FORMATS = ("table", "csv", "json")


class UsageError(Exception):
    pass


@dataclass
class Table:
    name: str
    columns: list[str]
    rows: list[list[Any]]


def _fmt(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value) + 0.0:.12g}"
    return str(value)


def _json_value(value: Any) -> Any:
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return float(f"{v + 0.0:.12g}") if math.isfinite(v) else None
    return value


def render(tables: Sequence[Table], fmt: str) -> str:
    if fmt == "json":
        doc = {t.name: [{c: _json_value(v) for c, v in zip(t.columns, row)} for row in t.rows]
               for t in tables}
        return json.dumps(doc, indent=2) + "\n"
    if fmt == "csv":
        blocks = []
        for t in tables:
            buf = io.StringIO()
            writer = csv.writer(buf, lineterminator="\n")
            writer.writerow(t.columns)
            for row in t.rows:
                writer.writerow([_fmt(v) for v in row])
            blocks.append(buf.getvalue())
        return "\n".join(blocks)
    out = []
    for t in tables:
        cells = [t.columns] + [[_fmt(v) for v in row] for row in t.rows]
        widths = [max(len(r[i]) for r in cells) for i in range(len(t.columns))]
        out.append(f"# {t.name}")
        for r in cells:
            out.append("  ".join(c.rjust(w) for c, w in zip(r, widths)).rstrip())
        out.append("")
    return "\n".join(out)


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- parsing

def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _nonneg_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {v}")
    return v


def _finite(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {text!r}")
    return v


def _stat(text: str) -> Statistics:
    try:
        return Statistics.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_output(p: argparse.ArgumentParser):
    p.add_argument("--format", choices=FORMATS, default="table")
    p.add_argument("--out", metavar="PATH", help="write output here instead of stdout")


def _add_physics(p: argparse.ArgumentParser, measure_flag: bool = True):
    p.add_argument("--stat", type=_stat, default=Statistics.BOSON,
                   help="boson, fermion or dist")
    p.add_argument("--n", type=_nonneg_int, default=1, help="particle number")
    p.add_argument("--temp", type=_finite, default=0.01, help="temperature, eps0/k units")
    p.add_argument("--lambda", dest="lam", type=_finite, default=0.5,
                   help="piston position as a fraction of the length")
    p.add_argument("--levels", type=_positive_int, default=None,
                   help="fixed number of levels per region (default: certified automatically)")
    p.add_argument("--spectrum-file", metavar="PATH",
                   help="unit-width single-well spectrum, 'energy,degeneracy' per line")
    if measure_flag:
        p.add_argument("--measure", choices=[k.value for k in SchemeKind], default="count")
        p.add_argument("--groups", help='coarse groups, e.g. "0-1|2-3"')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qszilard",
        description="Exact canonical-ensemble quantum Szilard engine.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cycle", help="work ledger of one full cycle")
    _add_physics(p)
    _add_output(p)

    p = sub.add_parser("outcomes", help="measurement outcome table")
    _add_physics(p)
    _add_output(p)

    p = sub.add_parser("sweep", help="ledger over a grid of T, lambda or N")
    _add_physics(p)
    p.add_argument("--axis", choices=["temperature", "lambda", "n"], required=True)
    p.add_argument("--start", type=_finite, required=True)
    p.add_argument("--stop", type=_finite, required=True)
    p.add_argument("--count", type=int, default=11)
    p.add_argument("--spacing", choices=["linear", "log"], default="linear")
    p.add_argument("--workers", type=_positive_int, default=1)
    _add_output(p)

    p = sub.add_parser("profile", help="free energy and piston force for one outcome")
    _add_physics(p)
    p.add_argument("--outcome", required=True, help="outcome label as printed by 'outcomes'")
    p.add_argument("--grid-start", type=_finite, default=0.05)
    p.add_argument("--grid-stop", type=_finite, default=0.95)
    p.add_argument("--grid-count", type=int, default=19)
    p.add_argument("--no-equilibrium", action="store_true",
                   help="skip the equilibrium search")
    _add_output(p)

    p = sub.add_parser("verify", help="run the acceptance checks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--quick", action="store_true", help="reduced sample sizes")
    p.add_argument("--out", metavar="PATH")

    p = sub.add_parser("spectrum", help="print single-particle levels")
    p.add_argument("--width", type=_finite, default=None, help="single region of this width")
    p.add_argument("--lambda", dest="lam", type=_finite, default=None,
                   help="show both sides of a piston at this position")
    p.add_argument("--levels", type=_positive_int, default=10)
    p.add_argument("--spectrum-file", metavar="PATH")
    p.add_argument("--temp", type=_finite, default=None,
                   help="also report the certified truncation order")
    p.add_argument("--n", type=_nonneg_int, default=1)
    _add_output(p)
    return parser


def _profile(args) -> Spectrum | None:
    if not getattr(args, "spectrum_file", None):
        return None
    try:
        return load_spectrum(args.spectrum_file)
    except OSError as exc:
        raise UsageError(f"cannot read spectrum file: {exc}") from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _config(args, profile: Spectrum | None) -> EngineConfig:
    try:
        return EngineConfig(args.stat, args.n, args.lam, args.temp, levels=args.levels,
                            profile=profile)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _scheme(args, config: EngineConfig) -> MeasurementScheme:
    try:
        if args.measure == "coarse":
            if not args.groups:
                raise ValueError("--measure coarse needs --groups")
            scheme = MeasurementScheme.coarse(parse_groups(args.groups))
        else:
            if args.groups:
                raise ValueError("--groups only applies to --measure coarse")
            scheme = MeasurementScheme(args.measure)
        scheme.validate(config.stat, config.n)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return scheme


# ---------------------------------------------------------------- commands

def _config_table(config: EngineConfig, scheme: MeasurementScheme) -> Table:
    groups = format_groups(scheme.groups) if scheme.groups else ""
    return Table("config", ["stat", "n", "lambda", "temp", "measure", "groups"],
                 [[config.stat.value, config.n, config.lam, config.temp,
                   scheme.kind.value, groups]])


LEDGER_COLUMNS = ["W1", "expected_W2", "net_work", "net_over_kT", "entropy_S",
                  "erasure_cost", "net_with_erasure", "outcomes"]


def _ledger_row(config: EngineConfig, ledger) -> list[Any]:
    return [ledger.W1, ledger.expected_W2, ledger.net_work, ledger.net_work / config.temp,
            ledger.entropy_S, ledger.erasure_cost, ledger.net_with_erasure,
            len(ledger.distribution)]


def _outcome_table(dist, w2=None) -> Table:
    rows = []
    for i, o in enumerate(dist.outcomes):
        row = [o.label, o.probability, o.log_z.log_magnitude]
        if w2 is not None:
            row.append(w2[i])
        rows.append(row)
    cols = ["outcome", "probability", "log_Z"] + (["W2"] if w2 is not None else [])
    return Table("outcomes", cols, rows)


def cmd_cycle(args) -> list[Table]:
    config = _config(args, _profile(args))
    scheme = _scheme(args, config)
    ledger = run_cycle(config, scheme)
    return [_config_table(config, scheme),
            Table("ledger", LEDGER_COLUMNS, [_ledger_row(config, ledger)]),
            _outcome_table(ledger.distribution, ledger.W2_per_outcome)]


def cmd_outcomes(args) -> list[Table]:
    config = _config(args, _profile(args))
    scheme = _scheme(args, config)
    return [_outcome_table(measure(config, scheme))]


def sweep_values(axis: str, start: float, stop: float, count: int, spacing: str) -> list:
    if count < 2:
        raise UsageError("--count must be at least 2")
    if spacing == "log":
        if start <= 0 or stop <= 0:
            raise UsageError("log spacing needs positive endpoints")
        values = np.geomspace(start, stop, count)
    else:
        values = np.linspace(start, stop, count)
    if axis == "n":
        out: list[int] = []
        for v in values:
            k = int(round(float(v)))
            if k not in out:
                out.append(k)
        return out
    return [float(v) for v in values]


def _sweep_point(job: tuple[EngineConfig, MeasurementScheme]) -> list[Any]:
    config, scheme = job
    ledger = run_cycle(config, scheme)
    return [config.stat.value, config.n, config.lam, config.temp] + _ledger_row(config, ledger)


def cmd_sweep(args) -> list[Table]:
    profile = _profile(args)
    base = _config(args, profile)
    values = sweep_values(args.axis, args.start, args.stop, args.count, args.spacing)
    field = {"temperature": "temp", "lambda": "lam", "n": "n"}[args.axis]
    jobs = []
    for v in values:
        try:
            config = replace(base, **{field: v})
        except ValueError as exc:
            raise UsageError(f"sweep point {args.axis}={v}: {exc}") from None
        jobs.append((config, _scheme(args, config)))
    if args.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(_sweep_point, jobs))
    else:
        rows = [_sweep_point(j) for j in jobs]
    return [Table("sweep", ["stat", "n", "lambda", "temp"] + LEDGER_COLUMNS, rows)]


def cmd_profile(args) -> list[Table]:
    config = _config(args, _profile(args))
    scheme = _scheme(args, config)
    if args.grid_count < 2:
        raise UsageError("--grid-count must be at least 2")
    if not 0 < args.grid_start < args.grid_stop < 1:
        raise UsageError("profile grid must satisfy 0 < start < stop < 1")
    grid = np.linspace(args.grid_start, args.grid_stop, args.grid_count)
    dist = measure(config, scheme)
    try:
        outcome = dist[args.outcome]
    except KeyError:
        labels = ", ".join(o.label for o in dist.outcomes)
        raise SzilardError(
            f"outcome {args.outcome!r} is not possible here (possible: {labels})") from None
    cols = ["kind", "lambda", "free_energy", "force", "feasible", "boundary", "note"]
    rows = [["grid", p.lam, p.free_energy, p.force, p.feasible, False, p.reason]
            for p in free_energy_profile(config, outcome, grid)]
    if not args.no_equilibrium:
        eq = equilibrium_position(config, outcome)
        rows.append(["equilibrium", eq.lam, eq.free_energy, eq.force, True, eq.at_boundary,
                     "piston expelled to the wall" if eq.at_boundary else ""])
    return [Table("profile", cols, rows)]


def cmd_spectrum(args) -> list[Table]:
    profile = _profile(args)
    if args.width is not None and args.lam is not None:
        raise UsageError("give either --width or --lambda, not both")
    if args.lam is not None and not 0 < args.lam < 1:
        raise UsageError("--lambda must lie in (0, 1)")
    if args.width is not None and not args.width > 0:
        raise UsageError("--width must be positive")
    if args.temp is not None and not args.temp > 0:
        raise UsageError("--temp must be positive")

    def region(width: float) -> Spectrum:
        if profile is not None:
            return profile.scaled(1.0 / (width * width))
        return box_spectrum(width, args.levels)

    if args.lam is not None:
        regions = [("L", region(args.lam)), ("R", region(1.0 - args.lam))]
    else:
        regions = [("full", region(1.0 if args.width is None else args.width))]
    rows = []
    for side, s in regions:
        for i, (e, g) in enumerate(zip(s.energies, s.degeneracies), start=1):
            rows.append([side, i, e, g])
    tables = [Table("spectrum", ["side", "index", "energy", "degeneracy"], rows)]
    if args.temp is not None:
        probe = EngineConfig(Statistics.BOSON, args.n, 0.5, args.temp, profile=profile)
        widths = [args.lam, 1.0 - args.lam] if args.lam is not None else [
            1.0 if args.width is None else args.width]
        trunc = [[side, len(probe.region(w))] for (side, _), w in zip(regions, widths)]
        tables.append(Table("truncation", ["side", "levels_needed"], trunc))
    return tables


def cmd_verify(args) -> int:
    lines: list[str] = []

    def report(r):
        lines.append(r.line())
        if not args.out:
            print(r.line(), flush=True)

    results = run_checks(seed=args.seed, quick=args.quick, report=report)
    if args.out:
        _emit("\n".join(lines) + "\n", args.out)
    return 0 if all(r.passed for r in results) else 1


COMMANDS = {"cycle": cmd_cycle, "outcomes": cmd_outcomes, "sweep": cmd_sweep,
            "profile": cmd_profile, "spectrum": cmd_spectrum}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "verify":
        return cmd_verify(args)
    try:
        tables = COMMANDS[args.command](args)
    except UsageError as exc:
        parser.error(str(exc))
    except SzilardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _emit(render(tables, args.format), args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
