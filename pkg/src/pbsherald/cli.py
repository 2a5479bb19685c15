"""Command-line interface: run experiments, verify claims, sweep parameters.

Exit codes: 0 success, 1 configuration error, 2 verification failure,
3 internal assertion or unexpected error.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from pathlib import Path

from .config import BUILTIN_CONFIGS, ConfigError, resolve_config
from .runner import run, sweep, sweep_csv
from .verify import run_checks


def _cmd_run(args: argparse.Namespace) -> int:
    config = resolve_config(args.config)
    report = run(config)
    text = report.to_json()
    if args.report:
        Path(args.report).write_text(text + "\n", encoding="utf-8")
        print(f"report written to {args.report}")
    else:
        print(text)
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    results = run_checks()
    failed = 0
    for result in results:
        tag = "PASS" if result.passed else "FAIL"
        print(f"[{tag}] {result.name}: {result.detail}")
        failed += 0 if result.passed else 1
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else 2


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = resolve_config(args.config)
    try:
        values = [float(v) for v in args.values.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"bad sweep values '{args.values}': {exc}") from exc
    reports = sweep(config, args.param, values)
    csv_text = sweep_csv(values, reports)
    if args.csv:
        Path(args.csv).write_text(csv_text, encoding="utf-8")
        print(f"csv written to {args.csv}")
    if args.report:
        payload = json.dumps([r.to_dict() for r in reports], indent=2)
        Path(args.report).write_text(payload + "\n", encoding="utf-8")
        print(f"reports written to {args.report}")
    if not args.csv and not args.report:
        print(csv_text, end="")
    return 0


def _cmd_patterns(args: argparse.Namespace) -> int:
    config = resolve_config(args.config)
    report = run(config)
    sector = {s.name: s for s in report.sectors}.get("pair_pair")
    if sector is None:
        raise ConfigError("patterns table requires source order >= 2")
    print(f"geometry {config.name}  (lambda={config.source.lam}, order={config.source.order})")
    print(f"{'pattern':<12}{'bell':<12}{'P(pattern|pair_pair)':<24}{'fidelity':<12}mismatch")
    for p in sector.patterns:
        label = p.bell_label.symbol if p.bell_label else "-"
        fid = f"{p.fidelity_to_label:.6f}" if p.fidelity_to_label is not None else "-"
        flag = "yes" if p.table_mismatch else "no"
        print(f"{'+'.join(p.pattern):<12}{label:<12}{p.probability:<24.6f}{fid:<12}{flag}")
    print(f"herald probability (pair_pair sector): {sector.herald_probability:.6f}")
    print(f"weighted by source amplitudes: {sector.weighted_probability:.3e}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pbsherald",
        description=(
            "Exact simulator of Bell-state heralding with polarizing beam "
            "splitters fed by type-II downconversion."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment config and emit a report")
    p_run.add_argument("--config", required=True,
                       help=f"config file path or builtin name ({', '.join(BUILTIN_CONFIGS)})")
    p_run.add_argument("--report", help="output path for the JSON report (default stdout)")
    p_run.set_defaults(func=_cmd_run)

    p_verify = sub.add_parser("verify", help="run the built-in verification suite")
    p_verify.set_defaults(func=_cmd_verify)

    p_sweep = sub.add_parser("sweep", help="run one config across a list of parameter values")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--param", required=True,
                         help="dotted path of a numeric config leaf, e.g. source.lambda")
    p_sweep.add_argument("--values", required=True, help="comma-separated values")
    p_sweep.add_argument("--report", help="output path for the JSON report array")
    p_sweep.add_argument("--csv", help="output path for the flat CSV")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_patterns = sub.add_parser("patterns", help="print the pattern-to-Bell table")
    p_patterns.add_argument("--config", required=True)
    p_patterns.set_defaults(func=_cmd_patterns)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except AssertionError as exc:
        print(f"internal assertion failed: {exc}", file=sys.stderr)
        return 3
    except Exception:
        traceback.print_exc()
        return 3


if __name__ == "__main__":
    sys.exit(main())
