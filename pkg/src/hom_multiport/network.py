"""Time-stepped propagation of photon amplitudes through a multiport chain.

The network is a line of devices::

    BS1 == seg 0 == M1 == seg 1 == M2 == ... == M_N == seg N == BS2

Every segment carries an upper (0) and a lower (1) rail in both directions.
A step moves every interior amplitude across one segment, applies the phase
plate sitting on that rail, and scatters it at the device it reaches.
Device scattering costs no time.  Amplitudes leaving through a beam splitter
become exit modes (ports ``e``/``f``) stamped with the current step.

Rail modes are named after the multiport port they just left or, on the
exterior segments, the multiport port they are heading to:

* right-moving on seg 0 -> ``a0:R``/``b0:R``; on seg ``s>0`` -> ``c{s-1}:R``/``d{s-1}:R``
* left-moving on seg ``s<N`` -> ``a{s}:L``/``b{s}:L``; on seg N -> ``c{N-1}:L``/``d{N-1}:L``
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Union

from ._tolerances import EPS_NORM, EPS_RESIDUAL
from .elements import PhaseConfig, beam_splitter, grover4, reverse, unit_phase
from .fock import (
    FockKet,
    InhomogeneousStateError,
    ModeLabel,
    OperatorPolynomial,
    norm,
    substitute,
    to_fock,
)

__all__ = [
    "Rail",
    "Terminal",
    "Network",
    "PropagationState",
    "ExitRecord",
    "RunResult",
    "KetSummary",
    "ConservationError",
    "NonTerminatingWarning",
    "build_pattern_I",
    "build_pattern_II",
    "inject",
    "step",
    "run",
    "exit_fock_summary",
    "is_exit_mode",
    "interior_norm",
    "DEFAULT_MAX_STEPS",
]

DEFAULT_MAX_STEPS = 64
LEFT_SITE, RIGHT_SITE = 0, 1


class ConservationError(RuntimeError):
    """Total Fock norm drifted during a step."""


class NonTerminatingWarning(UserWarning):
    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class Rail(NamedTuple):
    segment: int
    line: int  # 0 upper, 1 lower
    direction: str  # "R" or "L"


class Terminal(NamedTuple):
    port: str  # "e" or "f"
    site: int
    direction: str


def is_exit_mode(mode: ModeLabel) -> bool:
    return mode.port in ("e", "f")


@dataclass(frozen=True)
class Network:
    """Immutable description of one multiport chain.

    ``pattern`` is ``"I"`` (circulator injection straight onto the rails in
    front of M1) or ``"II"`` (injection through BS1).  ``inject_through_left_phase``
    only matters for pattern I: when set, injected photons also cross the
    left phase plate before M1.
    """

    pattern: str
    n_multiports: int
    phases: PhaseConfig = PhaseConfig()
    inter_multiport_phase: float = 0.0
    inter_multiport_rail: str = "lower"
    inject_through_left_phase: bool = False
    _arrivals: dict = field(init=False, repr=False, compare=False)
    _label_to_rail: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.pattern not in ("I", "II"):
            raise ValueError(f"pattern must be 'I' or 'II', got {self.pattern!r}")
        if not isinstance(self.n_multiports, int) or self.n_multiports < 1:
            raise ValueError(f"unsupported n_multiports {self.n_multiports!r}")
        if self.inter_multiport_rail not in ("upper", "lower"):
            raise ValueError("inter_multiport_rail must be 'upper' or 'lower'")
        if not math.isfinite(self.inter_multiport_phase):
            raise ValueError("inter_multiport_phase must be finite")
        if self.n_multiports == 1 and unit_phase(self.inter_multiport_phase) != 1:
            raise ValueError("an inter-multiport phase needs at least two multiports")
        object.__setattr__(self, "_arrivals", self._build_arrivals())
        labels = {}
        for seg in range(self.n_multiports + 1):
            for line in (0, 1):
                for d in ("R", "L"):
                    rail = Rail(seg, line, d)
                    labels[self._rail_key(rail)] = rail
        object.__setattr__(self, "_label_to_rail", labels)

    # topology

    def _build_arrivals(self) -> dict:
        n = self.n_multiports
        out_bs = reverse(beam_splitter())
        g = grover4().matrix
        arrivals: dict[Rail, tuple] = {}
        for line in (0, 1):
            arrivals[Rail(0, line, "L")] = tuple(
                (complex(out_bs.matrix[line, k]), Terminal("ef"[k], LEFT_SITE, "L")) for k in (0, 1)
            )
            arrivals[Rail(n, line, "R")] = tuple(
                (complex(out_bs.matrix[line, k]), Terminal("ef"[k], RIGHT_SITE, "R")) for k in (0, 1)
            )
        for k in range(1, n + 1):
            ins = (Rail(k - 1, 0, "R"), Rail(k - 1, 1, "R"), Rail(k, 0, "L"), Rail(k, 1, "L"))
            outs = (Rail(k - 1, 0, "L"), Rail(k - 1, 1, "L"), Rail(k, 0, "R"), Rail(k, 1, "R"))
            for i, src in enumerate(ins):
                arrivals[src] = tuple((complex(g[i, j]), outs[j]) for j in range(4))
        return arrivals

    def _rail_key(self, rail: Rail) -> tuple[str, int, str]:
        n = self.n_multiports
        upper = rail.line == 0
        if rail.direction == "R":
            if rail.segment == 0:
                return ("a" if upper else "b", 0, "R")
            return ("c" if upper else "d", rail.segment - 1, "R")
        if rail.segment < n:
            return ("a" if upper else "b", rail.segment, "L")
        return ("c" if upper else "d", n - 1, "L")

    def rail_mode(self, rail: Rail, polarization: str = "H") -> ModeLabel:
        port, site, d = self._rail_key(rail)
        return ModeLabel(port, site, polarization, d)

    def rail_of(self, mode: ModeLabel) -> Rail:
        try:
            return self._label_to_rail[(mode.port, mode.site, mode.direction)]
        except KeyError:
            raise KeyError(f"{mode} is not a rail of this network") from None

    def segment_phase(self, rail: Rail) -> complex:
        seg, line = rail.segment, rail.line
        if seg == 0:
            return unit_phase(self.phases.left[line])
        if seg == self.n_multiports:
            return unit_phase(self.phases.right[line])
        inter_line = 0 if self.inter_multiport_rail == "upper" else 1
        if seg == 1 and line == inter_line:
            return unit_phase(self.inter_multiport_phase)
        return 1 + 0j

    def devices(self) -> tuple[str, ...]:
        return ("BS1", *(f"M{k}" for k in range(1, self.n_multiports + 1)), "BS2")

    def injection_modes(self, polarization: str = "H") -> tuple[ModeLabel, ModeLabel]:
        if self.pattern == "I":
            return (ModeLabel("a", 0, polarization, "R"), ModeLabel("b", 0, polarization, "R"))
        return (ModeLabel("e", 0, polarization, "R"), ModeLabel("f", 0, polarization, "R"))

    # single-photon propagation

    def propagate(self, mode: ModeLabel, time_bin: int) -> OperatorPolynomial:
        """Image of one interior mode after one step (translate, phase, scatter)."""
        rail = self.rail_of(mode)
        phase = self.segment_phase(rail)
        acc: dict[tuple, complex] = {}
        for w, dest in self._arrivals[rail]:
            if w == 0:
                continue
            if isinstance(dest, Terminal):
                out = ModeLabel(dest.port, dest.site, mode.polarization, dest.direction, time_bin)
            else:
                out = self.rail_mode(dest, mode.polarization)
            acc[(out,)] = acc.get((out,), 0j) + phase * w
        return OperatorPolynomial._from_canonical(acc)

    def entry_map(self, modes) -> dict[ModeLabel, OperatorPolynomial]:
        """How injected modes land on the rails at step 0."""
        mapping = {}
        bs = beam_splitter()
        for mode in modes:
            if self.pattern == "II":
                if mode.port not in ("e", "f") or mode.site != 0 or mode.direction != "R":
                    raise KeyError(f"{mode} is not an injection port of a pattern-II network")
                row = 0 if mode.port == "e" else 1
                mapping[mode] = OperatorPolynomial._from_canonical({
                    (self.rail_mode(Rail(0, k, "R"), mode.polarization),): complex(bs.matrix[row, k])
                    for k in (0, 1)
                })
            else:
                if mode.port not in ("a", "b") or mode.site != 0 or mode.direction != "R":
                    raise KeyError(f"{mode} is not an injection port of a pattern-I network")
                rail = Rail(0, 0 if mode.port == "a" else 1, "R")
                w = 1 + 0j
                if not self.inject_through_left_phase:
                    # coupled in downstream of the left plate; undo the traversal phase of step 1
                    w = self.segment_phase(rail).conjugate()
                mapping[mode] = OperatorPolynomial.from_mode(mode, w)
        return mapping


def build_pattern_I(
    phase_config: Union[PhaseConfig, int] = 0,
    n_multiports: int = 1,
    inter_multiport_phase: float = 0.0,
    *,
    inter_multiport_rail: str = "lower",
    inject_through_left_phase: bool = False,
) -> Network:
    """Circulator-fed network: photons start on the rails in front of M1."""
    if isinstance(phase_config, int):
        phase_config = PhaseConfig.preset(phase_config)
    return Network("I", n_multiports, phase_config, inter_multiport_phase,
                   inter_multiport_rail, inject_through_left_phase)


def build_pattern_II(
    phase_config: Union[PhaseConfig, int] = 0,
    n_multiports: int = 1,
    inter_multiport_phase: float = 0.0,
    *,
    inter_multiport_rail: str = "lower",
) -> Network:
    """Network fed through BS1 from its exterior ports ``e0``/``f0``."""
    if isinstance(phase_config, int):
        phase_config = PhaseConfig.preset(phase_config)
    return Network("II", n_multiports, phase_config, inter_multiport_phase, inter_multiport_rail)


@dataclass(frozen=True)
class PropagationState:
    network: Network
    step: int
    poly: OperatorPolynomial
    initial_norm: float

    @property
    def interior(self) -> OperatorPolynomial:
        return self.poly.filter(lambda mono: not all(is_exit_mode(m) for m in mono))

    @property
    def exited(self) -> OperatorPolynomial:
        return self.poly.filter(lambda mono: all(is_exit_mode(m) for m in mono))


def interior_norm(state: PropagationState) -> float:
    return norm(state.interior)


def _with_injection_direction(mode: ModeLabel) -> ModeLabel:
    return mode if mode.direction else mode.with_(direction="R")


def inject(net: Network, poly: OperatorPolynomial) -> PropagationState:
    """Place an input state on the network at step 0.

    Modes without a direction tag are taken as right-moving.  Pattern-I inputs
    use ``a0``/``b0``; pattern-II inputs use ``e0``/``f0`` and are scattered by
    BS1 immediately.

    Raises:
        KeyError: for a mode that is not an injection port.
    """
    poly = poly.map_modes(_with_injection_direction)
    if not poly.is_homogeneous():
        raise InhomogeneousStateError(f"input mixes photon numbers {sorted(poly.degrees)}")
    injected = substitute(poly, net.entry_map(poly.modes()))
    return PropagationState(net, 0, injected, norm(injected))


def step(state: PropagationState) -> PropagationState:
    """Advance every interior amplitude by one time bin."""
    net = state.network
    t = state.step + 1
    mapping = {m: net.propagate(m, t) for m in state.poly.modes() if not is_exit_mode(m)}
    poly = substitute(state.poly, mapping)
    total = norm(poly)
    scale = max(1.0, state.initial_norm**2)
    if abs(total**2 - state.initial_norm**2) > EPS_NORM * scale:
        raise ConservationError(
            f"norm^2 drifted from {state.initial_norm**2!r} to {total**2!r} at step {t}"
        )
    return PropagationState(net, t, poly, state.initial_norm)


@dataclass(frozen=True)
class ExitRecord:
    """One fully exited term: every photon has left through a terminal port."""

    monomial: tuple
    coefficient: complex

    @property
    def ket(self) -> FockKet:
        return to_fock(OperatorPolynomial._from_canonical({self.monomial: self.coefficient}))[0]

    @property
    def ports(self) -> tuple[str, ...]:
        return tuple(f"{m.port}{m.site}{m.polarization}" for m, _ in self.ket.occupation)

    @property
    def time_bins(self) -> tuple[int, ...]:
        return tuple(m.time_bin for m, _ in self.ket.occupation)

    @property
    def occupation(self) -> tuple[int, ...]:
        return tuple(n for _, n in self.ket.occupation)

    @property
    def amplitude(self) -> complex:
        return self.ket.amplitude

    @property
    def probability(self) -> float:
        return abs(self.ket.amplitude) ** 2


@dataclass(frozen=True)
class RunResult:
    state: PropagationState
    exits: tuple[ExitRecord, ...]
    residual_norm: float

    @property
    def steps(self) -> int:
        return self.state.step

    @property
    def exit_polynomial(self) -> OperatorPolynomial:
        return self.state.exited

    def exit_times(self) -> dict[str, list[int]]:
        """Exit port (with direction) -> sorted distinct time bins at which it fires."""
        times: dict[str, set[int]] = {}
        for rec in self.exits:
            for mode, _ in rec.ket.occupation:
                key = f"{mode.port}{mode.site}{mode.polarization}:{mode.direction}"
                times.setdefault(key, set()).add(mode.time_bin)
        return {k: sorted(v) for k, v in sorted(times.items())}


def run(state: PropagationState, max_steps: int = DEFAULT_MAX_STEPS) -> RunResult:
    """Step until the interior is empty or ``max_steps`` is reached.

    Emits :class:`NonTerminatingWarning` if the residual interior norm is
    still above the residual floor at the end.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    while state.step < max_steps and interior_norm(state) >= EPS_NORM:
        state = step(state)
    residual = interior_norm(state)
    if residual > EPS_RESIDUAL:
        warnings.warn(
            NonTerminatingWarning(
                f"{residual:.3g} interior norm left after {state.step} steps", residual
            ),
            stacklevel=2,
        )
    exits = tuple(ExitRecord(mono, c) for mono, c in state.exited.items())
    return RunResult(state, exits, residual)


@dataclass(frozen=True)
class KetSummary:
    label: str
    ports: tuple[str, ...]
    directions: tuple[str, ...]
    time_bins: tuple[int, ...]
    occupation: tuple[int, ...]
    amplitude: complex
    probability: float


def exit_fock_summary(records) -> list[KetSummary]:
    """Group exit terms into Fock kets with their probabilities."""
    poly = OperatorPolynomial._from_canonical({r.monomial: r.coefficient for r in records})
    return [
        KetSummary(
            label=ket.label,
            ports=tuple(f"{m.port}{m.site}{m.polarization}" for m, _ in ket.occupation),
            directions=tuple(m.direction for m, _ in ket.occupation),
            time_bins=tuple(m.time_bin for m, _ in ket.occupation),
            occupation=tuple(n for _, n in ket.occupation),
            amplitude=ket.amplitude,
            probability=ket.probability,
        )
        for ket in to_fock(poly)
    ]
