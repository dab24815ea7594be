"""Scattering matrices of the network devices.

Matrices use the *substitution* convention: row ``i`` lists the image of
input ``i`` over the outputs, ``in_i -> sum_j M[i, j] out_j``.  With this
convention the beam splitter sends ``e -> (a + b)/sqrt2`` and
``f -> (-a + b)/sqrt2``.  The amplitude-vector (column) form used for
single-photon matrix algebra is ``M.T`` (:attr:`ElementMatrix.column_matrix`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ._tolerances import EPS_UNITARY
from .fock import ModeLabel, OperatorPolynomial

__all__ = [
    "ElementMatrix",
    "PhaseConfig",
    "NonUnitaryError",
    "beam_splitter",
    "grover4",
    "phase_shifter",
    "reverse",
    "is_unitary",
    "unit_phase",
    "PHASE_PRESETS",
]


class NonUnitaryError(ValueError):
    pass


def is_unitary(matrix: np.ndarray, tol: float = EPS_UNITARY) -> bool:
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) <= tol)


def _frozen(matrix) -> np.ndarray:
    m = np.array(matrix, dtype=complex)
    m.setflags(write=False)
    return m


@dataclass(frozen=True, eq=False)
class ElementMatrix:
    """A device's unitary scattering matrix over named input/output ports."""

    name: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = _frozen(self.matrix)
        object.__setattr__(self, "matrix", m)
        n = len(self.inputs)
        if m.shape != (n, len(self.outputs)) or n != len(self.outputs):
            raise ValueError(f"{self.name}: matrix shape {m.shape} does not match ports")
        if not is_unitary(m):
            raise NonUnitaryError(f"{self.name} is not unitary")

    @property
    def size(self) -> int:
        return len(self.inputs)

    @property
    def column_matrix(self) -> np.ndarray:
        """Matrix acting on single-photon amplitude column vectors."""
        return self.matrix.T

    def as_mode_map(
        self,
        in_modes: Sequence[ModeLabel],
        out_modes: Sequence[ModeLabel],
    ) -> dict[ModeLabel, OperatorPolynomial]:
        """Bind the ports to concrete modes, ready for :func:`fock.substitute`."""
        if len(in_modes) != self.size or len(out_modes) != self.size:
            raise ValueError(f"{self.name} needs {self.size} input and output modes")
        mapping = {}
        for i, src in enumerate(in_modes):
            acc = OperatorPolynomial()
            for j, dst in enumerate(out_modes):
                if self.matrix[i, j] != 0:
                    acc = acc + OperatorPolynomial.from_mode(dst, self.matrix[i, j])
            mapping[src] = acc
        return mapping

    def port_map(self) -> Mapping[str, dict[str, complex]]:
        return {
            p: {q: complex(self.matrix[i, j]) for j, q in enumerate(self.outputs) if self.matrix[i, j] != 0}
            for i, p in enumerate(self.inputs)
        }


def beam_splitter() -> ElementMatrix:
    """50:50 beam splitter, ``1/sqrt2 [[1, 1], [-1, 1]]`` from inputs (a, b) to (c, d)."""
    s = 1 / math.sqrt(2)
    return ElementMatrix("BS", ("a", "b"), ("c", "d"), [[s, s], [-s, s]])


def grover4() -> ElementMatrix:
    """Four-port Grover multiport: -1/2 on the diagonal, +1/2 elsewhere.

    Equal splitting into all four ports, including back out of the input port.
    The matrix is real, symmetric and its own inverse.
    """
    g = 0.5 * (np.ones((4, 4)) - 2 * np.eye(4))
    ports = ("a", "b", "c", "d")
    return ElementMatrix("Grover", ports, ports, g)


def phase_shifter(phi: float) -> ElementMatrix:
    if not math.isfinite(phi):
        raise ValueError(f"phase must be finite, got {phi}")
    return ElementMatrix(f"P({phi:g})", ("in",), ("out",), [[unit_phase(phi)]])


def unit_phase(phi: float) -> complex:
    """exp(i phi) with round-off below 1e-15 snapped to zero (so pi gives exactly -1)."""
    re_, im = math.cos(phi), math.sin(phi)
    re_ = 0.0 if abs(re_) < 1e-15 else re_
    im = 0.0 if abs(im) < 1e-15 else im
    return complex(re_, im)


def reverse(element: ElementMatrix) -> ElementMatrix:
    """The same device traversed in the opposite direction (transpose).

    Output ports become inputs.  For the real matrices of the catalog the
    transpose is also the inverse.
    """
    if not is_unitary(element.matrix):
        raise NonUnitaryError(f"{element.name} is not unitary")
    name = element.name[:-4] if element.name.endswith("_rev") else element.name + "_rev"
    return ElementMatrix(name, element.outputs, element.inputs, element.matrix.T)


PHASE_PRESETS = (0, 2, 6, 26)


@dataclass(frozen=True)
class PhaseConfig:
    """Phase plates on the exterior rails, as (upper, lower) pairs in radians.

    ``left`` sits between the left beam splitter and the first multiport,
    ``right`` between the last multiport and the right beam splitter.  Plates
    act on every traversal, in both directions.
    """

    left: tuple[float, float] = (0.0, 0.0)
    right: tuple[float, float] = (0.0, 0.0)
    label: str = ""

    def __post_init__(self):
        for side in (self.left, self.right):
            if len(side) != 2 or not all(math.isfinite(float(p)) for p in side):
                raise ValueError(f"phases must be two finite numbers, got {side!r}")
        object.__setattr__(self, "left", tuple(float(p) for p in self.left))
        object.__setattr__(self, "right", tuple(float(p) for p in self.right))

    @classmethod
    def preset(cls, j: int) -> "PhaseConfig":
        """Named settings: 0 none, 2 lower-left, 6 lower-right, 26 both lower rails at pi."""
        table = {
            0: ((0.0, 0.0), (0.0, 0.0)),
            2: ((0.0, math.pi), (0.0, 0.0)),
            6: ((0.0, 0.0), (0.0, math.pi)),
            26: ((0.0, math.pi), (0.0, math.pi)),
        }
        if j not in table:
            raise ValueError(f"unknown phase preset {j!r}; expected one of {PHASE_PRESETS}")
        left, right = table[j]
        return cls(left, right, label=f"j={j}")
