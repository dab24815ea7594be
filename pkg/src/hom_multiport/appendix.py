"""Six-line single-photon evolution matrices of the two-multiport system.

Line order (0-based): left upper, left lower, interior upper, interior lower,
right upper, right lower.  Matrices act on amplitude column vectors.  Column
meaning: lines 0-1 are amplitudes arriving from the left, lines 2-3 are
left-moving interior amplitudes arriving at M1, lines 4-5 are left-moving
amplitudes arriving at M2 from the right.  Row meaning: lines 0-1 and 4-5 are
exits through BS1 and BS2, lines 2-3 are left-moving amplitude leaving M2
(still inside after one pass).

``U = (BS1 P1)(BS2 P2 M2) Q M1 P1`` is one pass with circulator injection,
``V = U BS1_in`` the same with injection through BS1.  ``Q`` is the optional
plate between the multiports (identity by default).  The order-``n`` term is
``U (Q Pi_int U)^(n-1)``: amplitude that exits on its ``n``-th pass.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from ._tolerances import EPS_NORM, EPS_UNITARY
from .elements import (
    NonUnitaryError,
    PHASE_PRESETS,
    PhaseConfig,
    beam_splitter,
    grover4,
    is_unitary,
    reverse,
    unit_phase,
)
from .fock import ModeLabel, OperatorPolynomial, substitute

__all__ = [
    "SixPortMatrix",
    "LINE_NAMES",
    "COMPONENTS",
    "build_component",
    "build_U",
    "build_V",
    "higher_order",
    "blocks",
    "BlockCheck",
    "block_check",
    "tensor_square",
    "TwoPhotonLift",
    "two_photon_lift",
    "lift_polynomial",
    "exterior_decay",
    "exit_mode_for_line",
    "appendix_exit_polynomial",
]

SixPortMatrix = np.ndarray

LINE_NAMES = ("left upper", "left lower", "interior upper", "interior lower", "right upper", "right lower")
LEFT, INTERIOR, RIGHT = (0, 1), (2, 3), (4, 5)
EXTERIOR = LEFT + RIGHT
COMPONENTS = ("BS1", "BS2", "P1", "P2", "M1", "M2", "Q")


def _embed(block: np.ndarray, lines: Sequence[int]) -> np.ndarray:
    m = np.eye(6, dtype=complex)
    idx = np.asarray(lines)
    m[np.ix_(idx, idx)] = block
    return m


def _phase_config(j_or_config: Union[int, PhaseConfig]) -> PhaseConfig:
    if isinstance(j_or_config, PhaseConfig):
        return j_or_config
    return PhaseConfig.preset(j_or_config)


def build_component(
    name: str,
    phase_config: Union[int, PhaseConfig] = 0,
    *,
    inbound: bool = False,
    inter_multiport_phase: float = 0.0,
    inter_multiport_rail: str = "lower",
) -> SixPortMatrix:
    """Embed one device into the six-line basis.

    ``BS1`` defaults to the outbound (exit) traversal; ``inbound=True`` gives
    the matrix seen by light entering from the left exterior ports.
    """
    cfg = _phase_config(phase_config)
    if name == "BS1":
        bs = beam_splitter() if inbound else reverse(beam_splitter())
        return _embed(bs.column_matrix, LEFT)
    if name == "BS2":
        return _embed(reverse(beam_splitter()).column_matrix, RIGHT)
    if name == "P1":
        return np.diag([unit_phase(cfg.left[0]), unit_phase(cfg.left[1]), 1, 1, 1, 1]).astype(complex)
    if name == "P2":
        return np.diag([1, 1, 1, 1, unit_phase(cfg.right[0]), unit_phase(cfg.right[1])]).astype(complex)
    if name == "M1":
        return _embed(grover4().column_matrix, LEFT + INTERIOR)
    if name == "M2":
        return _embed(grover4().column_matrix, INTERIOR + RIGHT)
    if name == "Q":
        if inter_multiport_rail not in ("upper", "lower"):
            raise ValueError("inter_multiport_rail must be 'upper' or 'lower'")
        diag = np.ones(6, dtype=complex)
        diag[2 if inter_multiport_rail == "upper" else 3] = unit_phase(inter_multiport_phase)
        return np.diag(diag)
    raise ValueError(f"unknown component {name!r}; expected one of {COMPONENTS}")


def _check_j(j) -> None:
    if isinstance(j, PhaseConfig):
        return
    if j not in PHASE_PRESETS:
        raise ValueError(f"invalid j={j!r}; expected one of {PHASE_PRESETS}")


def build_U(j: Union[int, PhaseConfig] = 0, inter_multiport_phase: float = 0.0,
            inter_multiport_rail: str = "lower") -> SixPortMatrix:
    """Lowest-order evolution with circulator injection."""
    _check_j(j)
    c = {n: build_component(n, j, inter_multiport_phase=inter_multiport_phase,
                            inter_multiport_rail=inter_multiport_rail) for n in COMPONENTS}
    return (c["BS1"] @ c["P1"]) @ (c["BS2"] @ c["P2"] @ c["M2"]) @ c["Q"] @ c["M1"] @ c["P1"]


def build_V(j: Union[int, PhaseConfig] = 0, inter_multiport_phase: float = 0.0,
            inter_multiport_rail: str = "lower") -> SixPortMatrix:
    """Lowest-order evolution with injection through BS1: ``U @ BS1_in``."""
    return build_U(j, inter_multiport_phase, inter_multiport_rail) @ build_component("BS1", j, inbound=True)


def higher_order(
    j: Union[int, PhaseConfig],
    n: int,
    *,
    pattern: str = "U",
    inter_multiport_phase: float = 0.0,
    inter_multiport_rail: str = "lower",
) -> SixPortMatrix:
    """Order-``n`` contribution: amplitude that leaves on its ``n``-th interior pass.

    Exterior rows are what exits at this order, interior rows what is still
    bouncing between the multiports afterwards.  ``n=1`` is :func:`build_U` /
    :func:`build_V`.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if pattern not in ("U", "V"):
        raise ValueError("pattern must be 'U' or 'V'")
    u = build_U(j, inter_multiport_phase, inter_multiport_rail)
    feedback = build_component("Q", j, inter_multiport_phase=inter_multiport_phase,
                               inter_multiport_rail=inter_multiport_rail)
    interior = np.zeros((6, 6))
    interior[2, 2] = interior[3, 3] = 1
    loop = u @ feedback @ interior
    m = np.linalg.matrix_power(loop, n - 1) @ u
    if pattern == "V":
        m = m @ build_component("BS1", j, inbound=True)
    return m


def blocks(matrix: SixPortMatrix) -> dict[tuple[str, str], np.ndarray]:
    """2x2 blocks keyed by (row group, column group) with groups L, I, R."""
    groups = {"L": LEFT, "I": INTERIOR, "R": RIGHT}
    m = np.asarray(matrix)
    return {
        (r, c): m[np.ix_(rows, cols)]
        for r, rows in groups.items()
        for c, cols in groups.items()
    }


@dataclass(frozen=True)
class BlockCheck:
    block: str
    passed: bool
    detail: str


_H = 1 / math.sqrt(2)
_MIDDLE_II = np.array([[0.5, -0.5], [-0.5, 0.5]])
_MIDDLE_IR = np.array([[0.5, 0.5], [0.5, 0.5]])


def _shape_family() -> list[tuple[str, np.ndarray]]:
    shapes = []
    for outer, inner in itertools.product((1, -1), (1, -1)):
        o, i = "+-"[outer < 0], "+-"[inner < 0]
        shapes.append((f"{o}[[0,0],[h,{i}h]]", outer * np.array([[0, 0], [_H, inner * _H]])))
        shapes.append((f"{o}[[h,{i}h],[0,0]]", outer * np.array([[_H, inner * _H], [0, 0]])))
    return shapes


def _match_shape(block: np.ndarray, tol: float) -> str | None:
    for label, shape in _shape_family():
        if np.max(np.abs(block - shape)) <= tol:
            return label
    return None


def _single_unit_entry(block: np.ndarray, tol: float) -> str | None:
    big = [(r, c) for r in range(2) for c in range(2) if abs(abs(block[r, c]) - 1) <= tol]
    small = [(r, c) for r in range(2) for c in range(2) if abs(block[r, c]) <= tol]
    if len(big) == 1 and len(small) == 3:
        r, c = big[0]
        v = block[r, c]
        if abs(v.imag) <= tol:
            return f"{'+' if v.real > 0 else '-'}1 at ({r},{c})"
    return None


def block_check(matrix: SixPortMatrix, template: str = "U", tol: float = EPS_UNITARY) -> list[BlockCheck]:
    """Compare a 6x6 matrix with the U-form or V-form block template."""
    if template not in ("U", "V"):
        raise ValueError("template must be 'U' or 'V'")
    b = blocks(matrix)
    out = []

    def fixed(key, name, target):
        ok = bool(np.max(np.abs(b[key] - target)) <= tol)
        out.append(BlockCheck(name, ok, "matches" if ok else f"got {np.round(b[key], 6).tolist()}"))

    fixed(("I", "I"), "middle[I,I]", _MIDDLE_II)
    fixed(("I", "R"), "middle[I,R]", _MIDDLE_IR)
    for key in (("I", "L"), ("L", "R"), ("R", "I")):
        fixed(key, f"zero[{key[0]},{key[1]}]", np.zeros((2, 2)))

    shaped = {"U": {"A": ("L", "L"), "B": ("L", "I"), "C": ("R", "L"), "D": ("R", "R")},
              "V": {"B": ("L", "I"), "D": ("R", "R")}}[template]
    for name, key in shaped.items():
        label = _match_shape(b[key], tol)
        out.append(BlockCheck(name, label is not None, label or f"no shape match: {np.round(b[key], 6).tolist()}"))
    if template == "V":
        for name, key in (("E", ("L", "L")), ("F", ("R", "L"))):
            label = _single_unit_entry(b[key], tol)
            out.append(BlockCheck(name, label is not None, label or f"not a single +-1: {np.round(b[key], 6).tolist()}"))
    return out


def tensor_square(matrix: np.ndarray) -> np.ndarray:
    """Two-photon action on the unsymmetrized product space (36x36 for 6 lines)."""
    m = np.asarray(matrix, dtype=complex)
    return np.kron(m, m)


@dataclass(frozen=True)
class TwoPhotonLift:
    """Symmetric two-photon representation of a single-photon matrix.

    ``basis[k] = (i, j)`` with ``i <= j`` labels the normalized Fock state with
    one photon in lines i and j (two photons in i when ``i == j``).
    """

    full: np.ndarray
    symmetric: np.ndarray
    basis: tuple[tuple[int, int], ...]
    isometry: np.ndarray


def _symmetric_isometry(dim: int) -> tuple[np.ndarray, tuple[tuple[int, int], ...]]:
    basis = tuple((i, j) for i in range(dim) for j in range(i, dim))
    s = np.zeros((dim * dim, len(basis)))
    for k, (i, j) in enumerate(basis):
        if i == j:
            s[i * dim + i, k] = 1.0
        else:
            s[i * dim + j, k] = s[j * dim + i, k] = _H
    return s, basis


def two_photon_lift(matrix: np.ndarray) -> TwoPhotonLift:
    """Lift a unitary single-photon matrix to its symmetric two-photon action."""
    m = np.asarray(matrix, dtype=complex)
    if not is_unitary(m):
        raise NonUnitaryError("two-photon lift needs a unitary matrix")
    full = tensor_square(m)
    s, basis = _symmetric_isometry(m.shape[0])
    return TwoPhotonLift(full, s.T @ full @ s, basis, s)


def lift_polynomial(
    matrix: np.ndarray,
    poly: OperatorPolynomial,
    in_modes: Sequence[ModeLabel],
    out_modes: Sequence[ModeLabel],
) -> OperatorPolynomial:
    """Apply a column-convention matrix to a polynomial by mode substitution.

    Works for any photon number; for degree 2 it agrees with
    :func:`two_photon_lift`.  Polarization of ``in_modes`` is carried over to
    the outputs, so the same six lines serve both H and V photons.
    """
    m = np.asarray(matrix, dtype=complex)
    mapping = {}
    for mode in poly.modes():
        matches = [i for i, src in enumerate(in_modes)
                   if (src.port, src.site, src.direction) == (mode.port, mode.site, mode.direction)]
        if not matches:
            continue
        col = matches[0]
        mapping[mode] = OperatorPolynomial._from_canonical({
            (out_modes[r].with_(polarization=mode.polarization),): complex(m[r, col])
            for r in range(m.shape[0]) if m[r, col] != 0
        })
    return substitute(poly, mapping)


def exterior_decay(
    j: Union[int, PhaseConfig],
    vector: np.ndarray,
    n_max: int,
    *,
    pattern: str = "U",
    inter_multiport_phase: float = 0.0,
) -> list[float]:
    """Norm of the exterior output at orders 1..n_max for one input vector."""
    x = np.asarray(vector, dtype=complex)
    ext = list(EXTERIOR)
    return [
        float(np.linalg.norm((higher_order(j, n, pattern=pattern,
                                           inter_multiport_phase=inter_multiport_phase) @ x)[ext]))
        for n in range(1, n_max + 1)
    ]


def exit_mode_for_line(line: int, order: int, n_multiports: int = 2, polarization: str = "H") -> ModeLabel:
    """Engine exit mode (with time bin) of an exterior row at a given order.

    Engine timing: injection at step 0, M1 reached at step 1.  Order-``n``
    left exits fire at step ``2n``; right exits at ``2n + 1`` with two
    multiports and at step 2 with a single multiport.
    """
    if line in LEFT:
        return ModeLabel("ef"[line], 0, polarization, "L", 2 * order)
    if line in RIGHT:
        if n_multiports == 1:
            if order != 1:
                raise ValueError("a single-multiport chain has no higher orders")
            t = 2
        elif n_multiports == 2:
            t = 2 * order + 1
        else:
            raise ValueError("the six-line model covers one or two multiports")
        return ModeLabel("ef"[line - 4], 1, polarization, "R", t)
    raise ValueError(f"line {line} is not exterior")


def appendix_exit_polynomial(
    poly: OperatorPolynomial,
    pattern: str,
    j: Union[int, PhaseConfig],
    *,
    n_multiports: int = 2,
    inter_multiport_phase: float = 0.0,
    inter_multiport_rail: str = "lower",
    max_order: int = 32,
) -> tuple[OperatorPolynomial, float]:
    """Exit state predicted by the matrix chain, summed over orders.

    Returns the polynomial of exited terms (exit modes stamped with engine time
    bins) and the single-photon interior norm left after ``max_order`` passes,
    maximized over the two input lines.

    A single-multiport chain is modelled by the same matrices: without an
    inter-multiport plate the right-moving amplitude reaching M2 is always
    rail-symmetric and passes it unchanged, so only exit timing differs.
    """
    if n_multiports == 1 and inter_multiport_phase:
        raise ValueError("an inter-multiport phase needs two multiports")
    if pattern not in ("I", "II"):
        raise ValueError("pattern must be 'I' or 'II'")
    which = "U" if pattern == "I" else "V"
    in_ports = ("a", "b") if pattern == "I" else ("e", "f")
    mapping: dict[ModeLabel, dict] = {}
    leftover = 0.0
    for mode in poly.modes():
        if mode.port not in in_ports or mode.site != 0 or mode.direction not in ("", "R"):
            raise KeyError(f"{mode} is not an input of pattern {pattern}")
        col = in_ports.index(mode.port)
        terms: dict = {}
        for n in range(1, max_order + 1):
            m = higher_order(j, n, pattern=which, inter_multiport_phase=inter_multiport_phase,
                             inter_multiport_rail=inter_multiport_rail)
            for r in EXTERIOR:
                if abs(m[r, col]) > 0:
                    key = (exit_mode_for_line(r, n, n_multiports, mode.polarization),)
                    terms[key] = terms.get(key, 0j) + complex(m[r, col])
            inside = float(np.linalg.norm(m[list(INTERIOR), col]))
            if inside < EPS_NORM:
                break
        leftover = max(leftover, inside)
        mapping[mode] = OperatorPolynomial._from_canonical(terms)
    return substitute(poly, mapping), leftover
