"""Two-photon propagation through chains of Grover multiports.

The core pieces are the creation-operator algebra (:mod:`.fock`), the device
catalog (:mod:`.elements`), the time-stepped engine (:mod:`.network`) and the
six-line single-photon matrices (:mod:`.appendix`).
"""

from .elements import PhaseConfig, beam_splitter, grover4, phase_shifter
from .fock import ModeLabel, OperatorPolynomial, creation, substitute, to_fock
from .network import build_pattern_I, build_pattern_II, inject, run, step

__version__ = "0.1.0"

__all__ = [
    "ModeLabel",
    "OperatorPolynomial",
    "PhaseConfig",
    "beam_splitter",
    "build_pattern_I",
    "build_pattern_II",
    "creation",
    "grover4",
    "inject",
    "phase_shifter",
    "run",
    "step",
    "substitute",
    "to_fock",
]
