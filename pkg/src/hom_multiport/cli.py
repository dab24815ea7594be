"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from typing import Sequence

from .elements import PHASE_PRESETS, PhaseConfig
from .scenarios import (
    PRESETS,
    ScenarioError,
    build_report,
    load_scenario,
    render_json,
    render_table,
    run_scenario,
    strip_timing,
    verify_golden,
)
from .fock import to_fock
from .verification import verify_appendix

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

RAILS = ("left-upper", "left-lower", "right-upper", "right-lower", "inter-upper", "inter-lower")


def _write(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_run(args) -> int:
    config = load_scenario(args.scenario)
    result = run_scenario(config, args.max_steps)
    report = build_report(config, result)
    _write(render_json(report) if args.format == "json" else render_table(report), args.out)
    return EXIT_OK


def _cmd_verify_golden(args) -> int:
    results = verify_golden()
    lines = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"{status}  Table {r.row.table:<2} {r.row.row:<30} [{r.row.scenario}]")
        if not r.passed:
            lines.append(f"      expected {r.row.expected}")
            lines.append(f"      got      {r.got}")
    failed = sum(not r.passed for r in results)
    lines.append(f"{len(results) - failed}/{len(results)} rows reproduced")
    _write("\n".join(lines) + "\n", args.out)
    return EXIT_FAIL if failed else EXIT_OK


def _parse_js(text: str) -> list[int]:
    if not text.strip():
        return list(PHASE_PRESETS)
    try:
        js = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    bad = [j for j in js if j not in PHASE_PRESETS]
    if bad:
        raise argparse.ArgumentTypeError(f"j must be one of {PHASE_PRESETS}, got {bad}")
    return js or list(PHASE_PRESETS)


def _cmd_verify_appendix(args) -> int:
    checks = verify_appendix(args.j)
    lines = [f"{'PASS' if c.passed else 'FAIL'}  {c.name}" + (f"  ({c.detail})" if c.detail else "")
             for c in checks]
    failed = sum(not c.passed for c in checks)
    lines.append(f"{len(checks) - failed}/{len(checks)} checks passed")
    _write("\n".join(lines) + "\n", args.out)
    return EXIT_FAIL if failed else EXIT_OK


def _with_rail_phase(config, rail: str, phi: float):
    side, line = rail.split("-")
    if side == "inter":
        if config.n_multiports < 2:
            config = dataclasses.replace(config, n_multiports=2)
        return dataclasses.replace(config, inter_multiport_phase=phi, inter_multiport_rail=line)
    phases = config.phases if isinstance(config.phases, PhaseConfig) else PhaseConfig.preset(config.phases)
    pair = list(getattr(phases, side))
    pair[0 if line == "upper" else 1] = phi
    return dataclasses.replace(config, phases=dataclasses.replace(phases, **{side: tuple(pair)}, label="sweep"))


def _cmd_sweep(args) -> int:
    if args.steps < 1:
        raise ScenarioError("--steps must be >= 1")
    base_name = args.scenario or ("fig5a" if args.rail.startswith("inter") else "fig4a")
    base = load_scenario(base_name)
    points = []
    for k in range(args.steps + 1):
        phi = 2 * math.pi * k / args.steps
        result = run_scenario(_with_rail_phase(base, args.rail, phi), args.max_steps)
        probs: dict[str, float] = {}
        for ket in to_fock(strip_timing(result.exit_polynomial)):
            probs[ket.label] = probs.get(ket.label, 0.0) + ket.probability
        points.append({
            "phi": float(f"{phi:.12g}"),
            "probabilities": {k_: float(f"{v:.12g}") + 0.0 for k_, v in sorted(probs.items())},
            "residual_norm": float(f"{result.residual_norm:.12g}") + 0.0,
        })
    report = {"rail": args.rail, "scenario": base.name, "points": points}
    _write(json.dumps(report, indent=2) + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hom-multiport",
        description="Two-photon propagation through Grover multiport chains.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a preset or JSON scenario")
    p.add_argument("--scenario", required=True,
                   help=f"preset name ({', '.join(PRESETS)}) or path to a JSON config")
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--format", choices=("json", "table"), default="json")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("verify-golden", help="reproduce every row of both state-transformation tables")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_verify_golden)

    p = sub.add_parser("verify-appendix", help="check the six-line matrices against the engine")
    p.add_argument("--j", type=_parse_js, default=list(PHASE_PRESETS),
                   help="comma-separated phase presets (default: 0,2,6,26)")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_verify_appendix)

    p = sub.add_parser("sweep-phases", help="exit probabilities versus one plate phase")
    p.add_argument("--rail", required=True, choices=RAILS)
    p.add_argument("--steps", type=int, required=True, help="number of phase intervals over [0, 2pi]")
    p.add_argument("--scenario", help="base scenario (default fig4a, or fig5a for inter rails)")
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_sweep)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if getattr(args, "max_steps", None) is not None and args.max_steps < 1:
        print("error: --max-steps must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
