"""Command-line entry point: ``qcperf {parse,lower,estimate,sweep}``.

Exit codes: 0 success, 1 input error (bad program, config or layout),
2 model or precondition error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import Sequence

from .building_blocks import DeviceProfile
from .config import SWEEP_PARAMETERS, ConfigError, RunConfig, SweepSpec, load_config
from .errors import InputError, ModelError
from .estimator import estimate, prepare, sweep
from .qasm import QasmError, parse_program, serialize_program, validate
from .qasm.model import Program

EXIT_OK, EXIT_INPUT, EXIT_MODEL = 0, 1, 2


class CliError(Exception):
    def __init__(self, stage: str, message: str, code: int):
        super().__init__(f"[{stage}] {message}")
        self.code = code


def _read_program(path: str | None) -> Program:
    if not path:
        raise CliError("input", "no input program given", EXIT_INPUT)
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError("input", f"cannot read {path}: {exc.strerror}", EXIT_INPUT) from None
    try:
        return parse_program(text)
    except QasmError as exc:
        raise CliError("parse", f"{path}: {exc}", EXIT_INPUT) from None


def _check(p: Program) -> None:
    diags = validate(p)
    if diags:
        raise CliError("validate", "; ".join(str(d) for d in diags), EXIT_INPUT)


def _config(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    changes: dict = {}
    if getattr(args, "input", None):
        changes["input"] = args.input
    for flag, key in (
        ("code", "code"),
        ("level", "level"),
        ("distance", "distance"),
        ("global_layout", "global_layout"),
        ("local_layout", "local_layout"),
        ("edges", "edges"),
        ("output_dir", "output_dir"),
        ("variant", "compile_variant"),
    ):
        v = getattr(args, flag, None)
        if v is not None:
            changes[key] = v
    if getattr(args, "error_rate", None) is not None:
        changes["device"] = DeviceProfile(args.error_rate, dict(cfg.device.op_time))
    if getattr(args, "trace", False):
        changes["trace"] = True
    if getattr(args, "param", None):
        values = [_parse_value(args.param, v) for v in args.values or []]
        changes["sweep"] = SweepSpec(args.param, tuple(values), args.workers or 1)
    elif getattr(args, "workers", None) and cfg.sweep is not None:
        changes["sweep"] = SweepSpec(cfg.sweep.parameter, cfg.sweep.values, args.workers)
    try:
        return cfg.with_(**changes) if changes else cfg
    except (ConfigError, ValueError) as exc:
        raise CliError("config", str(exc), EXIT_INPUT) from None


def _parse_value(param: str, text: str):
    try:
        if param in ("level", "distance"):
            return int(text)
        if param == "error_rate":
            return float(text)
    except ValueError:
        raise CliError("config", f"bad {param} value {text!r}", EXIT_INPUT) from None
    return text


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def cmd_parse(args: argparse.Namespace) -> int:
    p = _read_program(args.input)
    diags = validate(p)
    for d in diags:
        print(f"{args.input}: {d}", file=sys.stderr)
    if diags:
        return EXIT_INPUT
    try:
        text = serialize_program(p, "flat" if args.flat else "structured", cap=args.cap)
    except QasmError as exc:
        raise CliError("serialize", str(exc), EXIT_INPUT) from None
    _emit(text, args.output)
    return EXIT_OK


def _emit(text: str, output: str | None) -> None:
    if output:
        _write(Path(output), text)
    else:
        sys.stdout.write(text)


def cmd_lower(args: argparse.Namespace) -> int:
    cfg = _config(args)
    p = _read_program(cfg.input)
    _check(p)
    prep = prepare(p, cfg)
    _emit(serialize_program(prep.program), args.output)
    return EXIT_OK


def _report_json(report) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"


def cmd_estimate(args: argparse.Namespace) -> int:
    cfg = _config(args)
    p = _read_program(cfg.input)
    _check(p)
    report = estimate(p, cfg)
    out = Path(cfg.output_dir)
    _write(out / "report.json", _report_json(report))
    _write(out / "summary.txt", report.summary())
    if cfg.trace and report.mapping is not None:
        _write(out / "trace.txt", report.mapping.trace_text())
    sys.stdout.write(report.summary())
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _config(args)
    if cfg.sweep is None:
        raise CliError("config", "no sweep given (use [sweep] in the config or --param/--values)", EXIT_INPUT)
    p = _read_program(cfg.input)
    _check(p)
    series = sweep(p, cfg, cfg.sweep.parameter, cfg.sweep.values, cfg.sweep.workers)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "sweep.csv", "w", newline="", encoding="utf-8") as fh:
        csv.writer(fh, lineterminator="\n").writerows(series.csv_rows())
    _write(out / "summary.txt", series.summary())
    sys.stdout.write(series.summary())
    if not series.ok_points:
        for pt in series.points:
            print(f"{series.parameter}={pt.value}: {pt.error}", file=sys.stderr)
        return EXIT_MODEL
    return EXIT_OK


def _add_pipeline_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("input", nargs="?", help="assembly file (overrides the config's input)")
    sp.add_argument("--config", help="TOML run configuration")
    sp.add_argument("--code", choices=("none", "steane", "surface"))
    sp.add_argument("--level", type=int, help="Steane concatenation level (default: from KQ)")
    sp.add_argument("--distance", type=int, help="surface code distance (default: from KQ)")
    sp.add_argument("--error-rate", type=float, help="physical error rate per op")
    sp.add_argument("--global-layout", choices=("1d", "2d", "all_to_all", "arbitrary"))
    sp.add_argument("--local-layout", choices=("1d", "2d"))
    sp.add_argument("--edges", help="edge-list file for the arbitrary layout")
    sp.add_argument("--variant", choices=("standard_35", "ancilla_21"), help="controlled-Rn construction")
    sp.add_argument("--output-dir", help="directory for report files")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qcperf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("parse", help="validate and print a normalized program")
    sp.add_argument("input")
    sp.add_argument("--flat", action="store_true", help="inline every call")
    sp.add_argument("--cap", type=int, default=10**8, help="flattened instruction cap")
    sp.add_argument("-o", "--output", help="write here instead of stdout")
    sp.set_defaults(func=cmd_parse)

    sp = sub.add_parser("lower", help="print the program lowered to the code's gate set")
    _add_pipeline_flags(sp)
    sp.add_argument("-o", "--output", help="write here instead of stdout")
    sp.set_defaults(func=cmd_lower)

    sp = sub.add_parser("estimate", help="write report.json and summary.txt")
    _add_pipeline_flags(sp)
    sp.add_argument("--trace", action="store_true", help="also write trace.txt")
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("sweep", help="write sweep.csv and summary.txt")
    _add_pipeline_flags(sp)
    sp.add_argument("--param", choices=SWEEP_PARAMETERS)
    sp.add_argument("--values", nargs="+")
    sp.add_argument("--workers", type=int)
    sp.set_defaults(func=cmd_sweep)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"qcperf: {exc}", file=sys.stderr)
        return exc.code
    except ModelError as exc:
        print(f"qcperf: [model] {exc}", file=sys.stderr)
        return EXIT_MODEL
    except (InputError, ValueError) as exc:
        print(f"qcperf: [input] {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
