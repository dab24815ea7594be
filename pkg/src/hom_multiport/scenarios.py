"""Named scenario presets, JSON config parsing and deterministic reports."""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Mapping, Union

from .elements import PHASE_PRESETS, PhaseConfig
from .fock import (
    ModeLabel,
    OperatorPolynomial,
    creation,
    equal_up_to_global_phase,
)
from .network import (
    DEFAULT_MAX_STEPS,
    NonTerminatingWarning,
    RunResult,
    build_pattern_I,
    build_pattern_II,
    exit_fock_summary,
    inject,
    run,
)

__all__ = [
    "ScenarioConfig",
    "ScenarioError",
    "PRESETS",
    "INPUT_PRESETS",
    "GOLDEN_ROWS",
    "GoldenRow",
    "GoldenResult",
    "input_polynomial",
    "parse_config",
    "load_scenario",
    "run_scenario",
    "build_report",
    "render_json",
    "render_table",
    "strip_timing",
    "verify_golden",
]


class ScenarioError(ValueError):
    """Invalid scenario config; carries the offending field and source line."""

    def __init__(self, message: str, field: str = "", line: int | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(f"field '{field}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.message = message
        self.field = field
        self.line = line


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    pattern: str
    input: OperatorPolynomial
    n_multiports: int = 1
    phases: Union[int, PhaseConfig] = 0
    inter_multiport_phase: float = 0.0
    inter_multiport_rail: str = "lower"
    inject_through_left_phase: bool = False
    max_steps: int = DEFAULT_MAX_STEPS
    anchor: str = field(default="", compare=False)

    def network(self):
        build = build_pattern_I if self.pattern == "I" else build_pattern_II
        kwargs = {"inter_multiport_rail": self.inter_multiport_rail}
        if self.pattern == "I":
            kwargs["inject_through_left_phase"] = self.inject_through_left_phase
        return build(self.phases, self.n_multiports, self.inter_multiport_phase, **kwargs)


def _c(text: str) -> OperatorPolynomial:
    return creation(text)


# Two-photon inputs, written for pattern I ports (a, b); pattern II swaps in (e, f).
INPUT_PRESETS = {
    "pair": lambda p, q: _c(f"{p}0H") * _c(f"{q}0H"),
    "hom_plus": lambda p, q: 0.5 * (_c(f"{p}0H") ** 2 + _c(f"{q}0H") ** 2),
    "hom_minus": lambda p, q: 0.5 * (_c(f"{p}0H") ** 2 - _c(f"{q}0H") ** 2),
    "dist_pair": lambda p, q: _c(f"{p}0H") * _c(f"{q}0V"),
    "dist_hom_plus": lambda p, q: 0.5 * (_c(f"{p}0H") ** 2 + _c(f"{q}0V") ** 2),
    "dist_hom_minus": lambda p, q: 0.5 * (_c(f"{p}0H") ** 2 - _c(f"{q}0V") ** 2),
}


def input_polynomial(preset: str, pattern: str) -> OperatorPolynomial:
    ports = ("a", "b") if pattern == "I" else ("e", "f")
    try:
        return INPUT_PRESETS[preset](*ports)
    except KeyError:
        raise ScenarioError(f"unknown input preset {preset!r}", "input") from None


def _preset(name, anchor, pattern, j, inp, n=1, phi=0.0):
    return ScenarioConfig(
        name=name,
        pattern=pattern,
        input=input_polynomial(inp, pattern),
        n_multiports=n,
        phases=j,
        inter_multiport_phase=phi,
        anchor=anchor,
    )


PRESETS: dict[str, ScenarioConfig] = {
    cfg.name: cfg
    for cfg in (
        _preset("fig4a", "Fig. 4(a): no plates, biphotons at f0 and e1", "I", 0, "pair"),
        _preset("fig4b", "Fig. 4(b): plate on the lower-left rail", "I", 2, "pair"),
        _preset("fig4c", "Fig. 4(c): plates on both lower rails", "I", 26, "pair"),
        _preset("fig4d", "Fig. 4(d): plate on the lower-right rail", "I", 6, "pair"),
        _preset("fig5a", "Fig. 5(a): delayed HOM, two multiports", "I", 0, "pair", n=2),
        _preset("fig5b", "Fig. 5(b): delayed HOM with a pi plate between multiports", "I", 0, "pair",
                n=2, phi=math.pi),
        _preset("fig7a", "Fig. 7(a): redistribution to (e0, e1)", "II", 2, "pair"),
        _preset("fig7b", "Fig. 7(b): redistribution to (e0, f1)", "II", 26, "pair"),
        _preset("fig7c", "Fig. 7(c): redistribution to (f0, e1)", "II", 0, "pair"),
        _preset("fig7d", "Fig. 7(d): redistribution to (f0, f1)", "II", 6, "pair"),
        _preset("fig8a", "Fig. 8(a): delayed redistribution, two multiports", "II", 0, "pair", n=2),
        _preset("fig8b", "Fig. 8(b): delayed redistribution with a pi plate", "II", 0, "pair",
                n=2, phi=math.pi),
        _preset("tableI-indistinguishable", "Table I row 1", "I", 2, "pair"),
        _preset("tableI-hom-plus", "Table I row 2", "I", 2, "hom_plus"),
        _preset("tableI-hom-minus", "Table I row 3", "I", 2, "hom_minus"),
        _preset("tableI-distinguishable", "Table I row 4", "I", 2, "dist_pair"),
        _preset("tableI-distinguishable-hom-plus", "Table I row 5 (+)", "I", 2, "dist_hom_plus"),
        _preset("tableI-distinguishable-hom-minus", "Table I row 5 (-)", "I", 2, "dist_hom_minus"),
        _preset("tableII-indistinguishable", "Table II row 1", "II", 2, "pair"),
        _preset("tableII-hom-plus", "Table II row 2", "II", 2, "hom_plus"),
        _preset("tableII-hom-minus", "Table II row 3", "II", 26, "hom_minus"),
        _preset("tableII-distinguishable", "Table II row 4", "II", 2, "dist_pair"),
        _preset("tableII-distinguishable-hom-plus", "Table II row 5 (+)", "II", 26, "dist_hom_plus"),
        _preset("tableII-distinguishable-hom-minus", "Table II row 5 (-)", "II", 26, "dist_hom_minus"),
    )
}


# --- config parsing ---------------------------------------------------------

_FIELDS = {
    "name", "pattern", "n_multiports", "phases", "inter_multiport_phase",
    "inter_multiport_rail", "inject_through_left_phase", "input", "max_steps",
}


def _line_of(text: str, key: str) -> int | None:
    needle = f'"{key}"'
    for i, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return i
    return None


def _finite(value: Any, fld: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ScenarioError(f"expected a finite number, got {value!r}", fld)
    return float(value)


def _complex(value: Any, fld: str) -> complex:
    if isinstance(value, list):
        if len(value) != 2:
            raise ScenarioError("complex numbers are written [re, im]", fld)
        return complex(_finite(value[0], fld), _finite(value[1], fld))
    return complex(_finite(value, fld), 0.0)


def _parse_phases(value: Any) -> Union[int, PhaseConfig]:
    if isinstance(value, int) and not isinstance(value, bool):
        if value not in PHASE_PRESETS:
            raise ScenarioError(f"preset must be one of {PHASE_PRESETS}, got {value}", "phases")
        return value
    if isinstance(value, dict):
        extra = set(value) - {"left", "right"}
        if extra:
            raise ScenarioError(f"unknown keys {sorted(extra)}", "phases")
        sides = {}
        for side in ("left", "right"):
            pair = value.get(side, [0.0, 0.0])
            if not isinstance(pair, list) or len(pair) != 2:
                raise ScenarioError("expected [upper, lower] in radians", f"phases.{side}")
            sides[side] = tuple(_finite(p, f"phases.{side}") for p in pair)
        return PhaseConfig(sides["left"], sides["right"], label="custom")
    raise ScenarioError("expected a preset number or {left: [u, l], right: [u, l]}", "phases")


def _parse_input(value: Any, pattern: str) -> OperatorPolynomial:
    if isinstance(value, str):
        return input_polynomial(value, pattern)
    if not isinstance(value, list) or not value:
        raise ScenarioError("expected a preset name or a non-empty list of terms", "input")
    acc = OperatorPolynomial()
    for k, term in enumerate(value):
        fld = f"input[{k}]"
        if not isinstance(term, dict) or "modes" not in term:
            raise ScenarioError("each term needs 'modes' and optional 'coefficient'", fld)
        try:
            modes = [ModeLabel.parse(m) for m in term["modes"]]
        except (TypeError, ValueError) as exc:
            raise ScenarioError(str(exc), f"{fld}.modes") from None
        mono = OperatorPolynomial({tuple(modes): _complex(term.get("coefficient", 1.0), f"{fld}.coefficient")})
        acc = acc + mono
    if not acc:
        raise ScenarioError("input polynomial is zero", "input")
    if not acc.is_homogeneous():
        raise ScenarioError(f"input mixes photon numbers {sorted(acc.degrees)}", "input")
    return acc


def parse_config(text: str, default_name: str = "custom") -> ScenarioConfig:
    """Parse a JSON scenario config.

    Raises:
        ScenarioError: with the offending field and, when locatable, its line.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(exc.msg, line=exc.lineno) from None
    if not isinstance(raw, dict):
        raise ScenarioError("top level must be a JSON object", line=1)
    try:
        return _config_from_dict(raw, default_name)
    except ScenarioError as exc:
        top = exc.field.split(".")[0].split("[")[0]
        if exc.line is None and top:
            raise ScenarioError(exc.message, exc.field, _line_of(text, top)) from None
        raise


def _config_from_dict(raw: Mapping[str, Any], default_name: str) -> ScenarioConfig:
    unknown = set(raw) - _FIELDS
    if unknown:
        first = sorted(unknown)[0]
        raise ScenarioError(f"unknown field (allowed: {', '.join(sorted(_FIELDS))})", first)
    pattern = raw.get("pattern")
    if pattern not in ("I", "II"):
        raise ScenarioError(f"expected 'I' or 'II', got {pattern!r}", "pattern")
    n = raw.get("n_multiports", 1)
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ScenarioError(f"expected a positive integer, got {n!r}", "n_multiports")
    max_steps = raw.get("max_steps", DEFAULT_MAX_STEPS)
    if isinstance(max_steps, bool) or not isinstance(max_steps, int) or max_steps < 1:
        raise ScenarioError(f"expected a positive integer, got {max_steps!r}", "max_steps")
    rail = raw.get("inter_multiport_rail", "lower")
    if rail not in ("upper", "lower"):
        raise ScenarioError(f"expected 'upper' or 'lower', got {rail!r}", "inter_multiport_rail")
    through = raw.get("inject_through_left_phase", False)
    if not isinstance(through, bool):
        raise ScenarioError("expected true or false", "inject_through_left_phase")
    if "input" not in raw:
        raise ScenarioError("missing required field", "input")
    name = raw.get("name", default_name)
    if not isinstance(name, str):
        raise ScenarioError("expected a string", "name")
    phi = _finite(raw.get("inter_multiport_phase", 0.0), "inter_multiport_phase")
    if phi and n < 2:
        raise ScenarioError("needs n_multiports >= 2", "inter_multiport_phase")
    return ScenarioConfig(
        name=name,
        pattern=pattern,
        input=_parse_input(raw["input"], pattern),
        n_multiports=n,
        phases=_parse_phases(raw.get("phases", 0)),
        inter_multiport_phase=phi,
        inter_multiport_rail=rail,
        inject_through_left_phase=through,
        max_steps=max_steps,
    )


def load_scenario(name_or_path: str) -> ScenarioConfig:
    """Resolve a preset name, or read a JSON config file."""
    if name_or_path in PRESETS:
        return PRESETS[name_or_path]
    try:
        with open(name_or_path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ScenarioError(f"not a preset and not a readable file ({exc.strerror})") from None
    stem = name_or_path.replace("\\", "/").rsplit("/", 1)[-1].rsplit(".", 1)[0]
    return parse_config(text, default_name=stem)


# --- running and reporting --------------------------------------------------

def run_scenario(config: ScenarioConfig, max_steps: int | None = None) -> RunResult:
    """Run a scenario; a non-terminating run still returns its partial result."""
    state = inject(config.network(), config.input)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonTerminatingWarning)
        return run(state, max_steps or config.max_steps)


def _num(x: float) -> float:
    v = float(f"{x:.12g}")
    return 0.0 if v == 0 else v


def build_report(config: ScenarioConfig, result: RunResult) -> dict:
    """Report dict with a fixed key order; numbers rounded to 12 significant digits."""
    summary = exit_fock_summary(result.exits)
    return {
        "scenario": config.name,
        "exits": [
            {
                "port": [f"{p}:{d}" for p, d in zip(k.ports, k.directions)],
                "time_bin": list(k.time_bins),
                "occupation": list(k.occupation),
                "amplitude": [_num(k.amplitude.real), _num(k.amplitude.imag)],
            }
            for k in summary
        ],
        "kets": [{"label": k.label, "probability": _num(k.probability)} for k in summary],
        "residual_norm": _num(result.residual_norm),
    }


def render_json(report: dict) -> str:
    return json.dumps(report, indent=2, ensure_ascii=True) + "\n"


def render_table(report: dict) -> str:
    lines = [f"scenario: {report['scenario']}"]
    header = f"{'ket':<32} {'time bins':<10} {'amplitude':>28} {'probability':>16}"
    lines += [header, "-" * len(header)]
    for ex, ket in zip(report["exits"], report["kets"]):
        re_, im = ex["amplitude"]
        amp = f"{re_:.12g}{im:+.12g}j"
        bins = ",".join(str(t) for t in ex["time_bin"])
        lines.append(f"{ket['label']:<32} {bins:<10} {amp:>28} {ket['probability']:>16.12g}")
    lines.append(f"residual norm: {report['residual_norm']:.12g}")
    return "\n".join(lines) + "\n"


# --- golden rows ------------------------------------------------------------

def strip_timing(poly: OperatorPolynomial) -> OperatorPolynomial:
    """Drop direction and time-bin tags so exits compare against table entries."""
    return poly.map_modes(lambda m: m.with_(direction="", time_bin=0))


@dataclass(frozen=True)
class GoldenRow:
    table: str
    row: str
    scenario: str
    expected: OperatorPolynomial


GOLDEN_ROWS: tuple[GoldenRow, ...] = (
    GoldenRow("I", "indistinguishable photons", "tableI-indistinguishable",
              -0.5 * (_c("e0H") ** 2 - _c("e1H") ** 2)),
    GoldenRow("I", "HOM pair, +1 relative phase", "tableI-hom-plus",
              0.5 * (_c("e0H") ** 2 + _c("e1H") ** 2)),
    GoldenRow("I", "HOM pair, -1 relative phase", "tableI-hom-minus",
              -(_c("e0H") * _c("e1H"))),
    GoldenRow("I", "distinguishable photons", "tableI-distinguishable",
              -0.5 * (_c("e0H") - _c("e1H")) * (_c("e0V") + _c("e1V"))),
    GoldenRow("I", "distinguishable HOM pair (+)", "tableI-distinguishable-hom-plus",
              0.25 * ((_c("e0H") - _c("e1H")) ** 2 + (_c("e0V") - _c("e1V")) ** 2)),
    GoldenRow("I", "distinguishable HOM pair (-)", "tableI-distinguishable-hom-minus",
              0.25 * ((_c("e0H") - _c("e1H")) ** 2 - (_c("e0V") - _c("e1V")) ** 2)),
    GoldenRow("II", "indistinguishable photons", "tableII-indistinguishable",
              -(_c("e0H") * _c("e1H"))),
    GoldenRow("II", "HOM pair, +1 relative phase", "tableII-hom-plus",
              0.5 * (_c("e0H") ** 2 + _c("e1H") ** 2)),
    GoldenRow("II", "HOM pair, -1 relative phase", "tableII-hom-minus",
              0.5 * (_c("e0H") ** 2 - _c("f1H") ** 2)),
    GoldenRow("II", "distinguishable photons", "tableII-distinguishable",
              -(_c("e0H") * _c("e1V"))),
    GoldenRow("II", "distinguishable HOM pair (+)", "tableII-distinguishable-hom-plus",
              0.5 * (_c("e0H") ** 2 + _c("f1V") ** 2)),
    GoldenRow("II", "distinguishable HOM pair (-)", "tableII-distinguishable-hom-minus",
              0.5 * (_c("e0H") ** 2 - _c("f1V") ** 2)),
)


@dataclass(frozen=True)
class GoldenResult:
    row: GoldenRow
    passed: bool
    got: OperatorPolynomial


def verify_golden(tol: float = 1e-12) -> list[GoldenResult]:
    """Run every table row and compare amplitudes up to one global phase."""
    results = []
    for row in GOLDEN_ROWS:
        got = strip_timing(run_scenario(PRESETS[row.scenario]).exit_polynomial)
        results.append(GoldenResult(row, equal_up_to_global_phase(row.expected, got, tol), got))
    return results

