"""Cross-checks between the matrix chain and the time-stepped engine."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ._tolerances import EPS_NORM, EPS_UNITARY
from .appendix import (
    appendix_exit_polynomial,
    block_check,
    build_component,
    build_U,
    build_V,
    exterior_decay,
)
from .elements import PHASE_PRESETS, is_unitary
from .fock import OperatorPolynomial, equal_up_to_global_phase
from .scenarios import ScenarioConfig, input_polynomial, run_scenario

__all__ = [
    "Check",
    "DECAY_PHASE",
    "DECAY_SEED",
    "EquivalenceResult",
    "engine_equivalence",
    "max_coefficient_difference",
    "random_unit_vector",
    "verify_appendix",
]

# Generic inter-multiport phase for decay checks: at 0 the interior holds a
# bound state, and at pi/2 the per-round-trip factor 1/2 is too slow for n=8.
DECAY_PHASE = 2 * math.pi / 3
DECAY_SEED = 2024
DECAY_ORDERS = 8
DECAY_TARGET = 1e-3


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""


def max_coefficient_difference(p: OperatorPolynomial, q: OperatorPolynomial) -> float:
    keys = set(p.terms) | set(q.terms)
    return max((abs(p.terms.get(k, 0j) - q.terms.get(k, 0j)) for k in keys), default=0.0)


@dataclass(frozen=True)
class EquivalenceResult:
    """Matrix-chain exit state versus engine exit state for one scenario.

    ``max_difference`` compares against the engine with injection through the
    left plates (the matrix chain as written).  ``default_relation`` tells how
    the engine's default injection convention relates to the same state.
    """

    scenario: str
    orders: int
    max_difference: float
    default_relation: str
    appendix: OperatorPolynomial
    engine: OperatorPolynomial


def engine_equivalence(config: ScenarioConfig, max_order: int = 8) -> EquivalenceResult:
    """Compare exit amplitudes per time bin, truncated at ``max_order`` passes.

    The engine runs ``2 * max_order + 1`` steps, which is exactly when the
    right exits of pass ``max_order`` fire and before pass ``max_order + 1``
    reaches the left.  Keep ``max_order`` small enough that no surviving term
    drops under the pruning floor, otherwise the two sides prune differently.
    """
    if config.n_multiports > 2:
        raise ValueError("the six-line model covers one or two multiports")
    predicted, _ = appendix_exit_polynomial(
        config.input,
        config.pattern,
        config.phases,
        n_multiports=config.n_multiports,
        inter_multiport_phase=config.inter_multiport_phase,
        inter_multiport_rail=config.inter_multiport_rail,
        max_order=max_order,
    )
    steps = 2 * max_order + 1
    as_written = dataclasses.replace(config, inject_through_left_phase=True)
    engine = run_scenario(as_written, steps).exit_polynomial
    diff = max_coefficient_difference(predicted, engine)

    default = run_scenario(dataclasses.replace(config, inject_through_left_phase=False), steps).exit_polynomial
    if max_coefficient_difference(default, engine) <= EPS_NORM:
        relation = "identical"
    elif equal_up_to_global_phase(engine, default, EPS_NORM):
        relation = "global phase"
    else:
        relation = "differs"
    return EquivalenceResult(config.name, max_order, diff, relation, predicted, engine)


def random_unit_vector(seed: int = DECAY_SEED, dim: int = 6) -> np.ndarray:
    rng = np.random.default_rng(seed)
    x = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return x / np.linalg.norm(x)


def _equivalence_configs(j: int) -> Iterable[ScenarioConfig]:
    for pattern in ("I", "II"):
        for inp in ("pair", "dist_pair", "hom_minus"):
            for n, phi in ((1, 0.0), (2, 0.0), (2, math.pi), (2, DECAY_PHASE)):
                yield ScenarioConfig(
                    name=f"{pattern}/{inp}/j={j}/n={n}/phi={phi:.4g}",
                    pattern=pattern,
                    input=input_polynomial(inp, pattern),
                    n_multiports=n,
                    phases=j,
                    inter_multiport_phase=phi,
                )


def verify_appendix(js: Sequence[int] = PHASE_PRESETS) -> list[Check]:
    """Unitarity, V = U BS1, block templates, decay and engine equivalence."""
    js = list(js) or list(PHASE_PRESETS)
    bad = [j for j in js if j not in PHASE_PRESETS]
    if bad:
        raise ValueError(f"invalid j {bad}; expected values from {PHASE_PRESETS}")
    checks: list[Check] = []
    x = random_unit_vector()
    for j in js:
        u, v = build_U(j), build_V(j)
        for name, m in (("U", u), ("V", v)):
            err = float(np.max(np.abs(m.conj().T @ m - np.eye(6))))
            checks.append(Check(f"j={j} {name} unitary", is_unitary(m, EPS_UNITARY), f"max dev {err:.2e}"))
        same = np.array_equal(v, u @ build_component("BS1", j, inbound=True))
        checks.append(Check(f"j={j} V = U BS1", same))
        for name, m, template in (("U", u, "U"), ("V", v, "V")):
            for bc in block_check(m, template):
                checks.append(Check(f"j={j} {name} block {bc.block}", bc.passed, bc.detail))
        for pattern in ("U", "V"):
            mags = exterior_decay(j, x, DECAY_ORDERS, pattern=pattern, inter_multiport_phase=DECAY_PHASE)
            mono = all(b <= a + EPS_NORM for a, b in zip(mags, mags[1:]))
            checks.append(Check(
                f"j={j} {pattern} decay",
                mono and mags[-1] < DECAY_TARGET,
                "magnitudes " + ", ".join(f"{m:.3g}" for m in mags),
            ))
            total = sum(m * m for m in exterior_decay(j, x, 64, pattern=pattern,
                                                      inter_multiport_phase=DECAY_PHASE))
            checks.append(Check(f"j={j} {pattern} series", total <= 1 + EPS_NORM, f"sum |out|^2 = {total:.15f}"))
        for cfg in _equivalence_configs(j):
            res = engine_equivalence(cfg)
            checks.append(Check(
                f"engine {cfg.name}",
                res.max_difference <= EPS_NORM,
                f"max diff {res.max_difference:.2e}; default injection: {res.default_relation}",
            ))
    return checks
