"""Exact canonical-ensemble model of the multi-particle quantum Szilard engine."""

__version__ = "0.1.0"

from .engine import (EngineConfig, MeasurementScheme, equilibrium_position,
                     extraction_work, free_energy_profile, information_gain,
                     insertion_work, measure, run_cycle)
from .ensemble import LogWeight, Statistics, free_energy, z1, z_many, z_sector
from .spectrum import (Spectrum, SplitSpectrum, box_spectrum, load_spectrum, split_box,
                       truncation_order)

__all__ = [
    "EngineConfig", "LogWeight", "MeasurementScheme", "Spectrum", "SplitSpectrum",
    "Statistics", "box_spectrum", "equilibrium_position", "extraction_work",
    "free_energy", "free_energy_profile", "information_gain", "insertion_work",
    "load_spectrum", "measure", "run_cycle", "split_box", "truncation_order", "z1",
    "z_many", "z_sector",
]
