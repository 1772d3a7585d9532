"""Single-particle spectra for the cylinder, with and without the piston.

Units are dimensionless throughout: k = 1 and energies are measured in units
of the ground energy of the empty (full-length) cylinder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import InsufficientLevelsError, SpectrumFormatError

#: relative tolerance under which two energies are the same level
MERGE_RTOL = 1e-12

#: minimum number of levels beyond the particle number
LEVEL_MARGIN = 10


@dataclass(frozen=True)
class Spectrum:
    """Sorted energy levels with integer degeneracies."""

    energies: tuple[float, ...]
    degeneracies: tuple[int, ...]

    def __post_init__(self):
        if len(self.energies) == 0:
            raise ValueError("spectrum must contain at least one level")
        if len(self.energies) != len(self.degeneracies):
            raise ValueError("energies and degeneracies differ in length")
        for g in self.degeneracies:
            if int(g) != g or g < 1:
                raise ValueError(f"degeneracy must be a positive integer, got {g!r}")
        for e in self.energies:
            if not math.isfinite(e):
                raise ValueError(f"energy must be finite, got {e!r}")
        for a, b in zip(self.energies, self.energies[1:]):
            if not b > a:
                raise ValueError("energies must be strictly increasing")

    @classmethod
    def from_levels(cls, energies: Iterable[float],
                    degeneracies: Iterable[int] | None = None) -> "Spectrum":
        """Build a spectrum from unsorted levels, merging equal energies."""
        energies = [float(e) for e in energies]
        if degeneracies is None:
            degeneracies = [1] * len(energies)
        else:
            degeneracies = [int(g) for g in degeneracies]
        if len(energies) != len(degeneracies):
            raise ValueError("energies and degeneracies differ in length")
        if any(g < 1 for g in degeneracies):
            raise ValueError("degeneracies must be positive")
        pairs = sorted(zip(energies, degeneracies))
        merged_e: list[float] = []
        merged_g: list[int] = []
        for e, g in pairs:
            if merged_e and _same_energy(merged_e[-1], e):
                merged_g[-1] += g
            else:
                merged_e.append(e)
                merged_g.append(g)
        return cls(tuple(merged_e), tuple(merged_g))

    def __len__(self) -> int:
        return len(self.energies)

    @property
    def e(self) -> np.ndarray:
        return np.asarray(self.energies, dtype=float)

    @property
    def g(self) -> np.ndarray:
        return np.asarray(self.degeneracies, dtype=float)

    @property
    def ground(self) -> float:
        return self.energies[0]

    @property
    def capacity(self) -> int:
        """Number of single-particle modes (the fermion capacity)."""
        return int(sum(self.degeneracies))

    def truncated(self, k: int) -> "Spectrum":
        if k < 1:
            raise ValueError("must keep at least one level")
        return Spectrum(self.energies[:k], self.degeneracies[:k])

    def scaled(self, factor: float) -> "Spectrum":
        if not factor > 0:
            raise ValueError("scale factor must be positive")
        return Spectrum(tuple(e * factor for e in self.energies), self.degeneracies)

    def modes(self) -> list[float]:
        """Energies repeated by degeneracy, ascending."""
        return [e for e, g in zip(self.energies, self.degeneracies) for _ in range(g)]


def _same_energy(a: float, b: float) -> bool:
    return abs(a - b) <= MERGE_RTOL * max(abs(a), abs(b))


@dataclass(frozen=True)
class SplitSpectrum:
    """Left and right spectra of a cylinder divided at fraction ``lam``."""

    left: Spectrum
    right: Spectrum
    lam: float

    def __post_init__(self):
        if not 0.0 < self.lam < 1.0:
            raise ValueError(f"barrier position must lie in (0, 1), got {self.lam!r}")

    def tagged_modes(self) -> list[tuple[float, str]]:
        """All single-particle modes as (energy, side), ascending.

        Ties are ordered left before right so fillings are reproducible.
        """
        modes = [(e, "L") for e in self.left.modes()]
        modes += [(e, "R") for e in self.right.modes()]
        modes.sort(key=lambda m: (m[0], m[1] != "L"))
        return modes

    def tagged_levels(self) -> list[tuple[float, int, str]]:
        """Levels of both sides as (energy, degeneracy, side), ascending."""
        levels = [(e, g, "L") for e, g in zip(self.left.energies, self.left.degeneracies)]
        levels += [(e, g, "R") for e, g in zip(self.right.energies, self.right.degeneracies)]
        levels.sort(key=lambda m: (m[0], m[2] != "L"))
        return levels

    @property
    def capacity(self) -> int:
        return self.left.capacity + self.right.capacity


def box_spectrum(width: float, k: int) -> Spectrum:
    """Infinite-well levels n**2 / width**2 for n = 1..k."""
    if not width > 0:
        raise ValueError(f"width must be positive, got {width!r}")
    if int(k) != k or k < 1:
        raise ValueError(f"level count must be a positive integer, got {k!r}")
    n = np.arange(1, int(k) + 1, dtype=float)
    return Spectrum(tuple((n * n / (width * width)).tolist()), (1,) * int(k))


def split_box(lam: float, k: int) -> SplitSpectrum:
    """Box of unit length cut by a zero-width, impenetrable piston at ``lam``."""
    if not 0.0 < lam < 1.0:
        raise ValueError(f"barrier position must lie in (0, 1), got {lam!r}")
    return SplitSpectrum(box_spectrum(lam, k), box_spectrum(1.0 - lam, k), lam)


def truncation_order(spectrum: Spectrum, beta: float, n: int, tol: float = 1e-16) -> int:
    """Smallest level count that certifies the Boltzmann tail below ``tol``.

    The count is at least ``n + 10``; a spectrum that ends before the tail
    bound is met raises :class:`InsufficientLevelsError`.
    """
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta!r}")
    if not 0 < tol < 1:
        raise ValueError(f"tol must lie in (0, 1), got {tol!r}")
    if n < 0:
        raise ValueError("particle number must be non-negative")
    floor = n + LEVEL_MARGIN
    e0 = spectrum.ground
    for k in range(floor, len(spectrum) + 1):
        e_k = spectrum.energies[k - 1]
        g_k = spectrum.degeneracies[k - 1]
        if math.log(g_k) - beta * (e_k - e0) <= math.log(tol):
            return k
    raise InsufficientLevelsError(
        f"insufficient levels: {len(spectrum)} levels cannot certify a tail below "
        f"{tol:g} at beta={beta:g} with N={n} (need at least {floor} and a "
        f"negligible top level)")


def parse_spectrum(lines: Sequence[str], source: str = "<string>") -> Spectrum:
    """Parse ``energy,degeneracy`` lines; ``#`` lines and blanks are skipped."""
    energies: list[float] = []
    degeneracies: list[int] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 2:
            raise SpectrumFormatError(
                f"{source}:{lineno}: expected 'energy,degeneracy', got {raw.rstrip()!r}")
        try:
            energy = float(parts[0])
        except ValueError:
            raise SpectrumFormatError(
                f"{source}:{lineno}: energy {parts[0]!r} is not a number") from None
        if not math.isfinite(energy):
            raise SpectrumFormatError(f"{source}:{lineno}: energy must be finite")
        try:
            g = int(parts[1])
        except ValueError:
            raise SpectrumFormatError(
                f"{source}:{lineno}: degeneracy {parts[1]!r} is not an integer") from None
        if g < 1:
            raise SpectrumFormatError(
                f"{source}:{lineno}: degeneracy must be positive, got {g}")
        energies.append(energy)
        degeneracies.append(g)
    if not energies:
        raise SpectrumFormatError(f"{source}: no levels found")
    return Spectrum.from_levels(energies, degeneracies)


def load_spectrum(path: str | Path) -> Spectrum:
    path = Path(path)
    with path.open() as fh:
        return parse_spectrum(fh.read().splitlines(), source=str(path))


def format_spectrum(spectrum: Spectrum) -> str:
    return "".join(f"{e!r},{g}\n" for e, g in zip(spectrum.energies, spectrum.degeneracies))
