"""Command-line entry point: ``qnd analyze | verify | sweep | example``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .core import CompletenessError, DimensionError
from .disturbance import DEFAULT_RESTARTS, DegenerateObservableError
from .harness import SWEEP_FAMILIES, analyze, rows_to_csv, sweep, verify
from .io import SchemaError, load_instrument, load_observable, save_instrument, save_observable
from .zoo import luders, pauli_observable, trivial_instrument, weak_measurement

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        Path(out).write_text(text)


def cmd_analyze(args) -> int:
    try:
        inst = load_instrument(args.instrument)
        x = load_observable(args.obs_x)
        z = load_observable(args.obs_z)
        for name, path, obs in (("--obs-x", args.obs_x, x), ("--obs-z", args.obs_z, z)):
            if obs.dim != inst.dim_in:
                raise DimensionError(
                    f"{path} ({name}) acts on dimension {obs.dim}, but {args.instrument} has input dimension {inst.dim_in}"
                )
            if not obs.is_nondegenerate:
                raise DegenerateObservableError(f"{path} ({name}) is degenerate; analyze needs nondegenerate observables")
        report = analyze(inst, x, z, restarts=args.restarts, seed=args.seed, instrument_id=Path(args.instrument).stem)
    except (SchemaError, CompletenessError, DimensionError, DegenerateObservableError, ValueError) as exc:
        print(f"qnd analyze: {exc}", file=sys.stderr)
        return EXIT_INPUT
    _write(report.to_json() if args.format == "json" else report.to_csv(), args.out)
    for c in report.checks:
        if c.status == "fail":
            print(f"qnd analyze: check {c.name} failed (margin {c.margin:.3e})", file=sys.stderr)
    return EXIT_OK if report.all_passed else EXIT_FAIL


def cmd_verify(args) -> int:
    try:
        summary = verify(args.dim, args.trials, args.seed, args.outcomes, args.kraus_per_outcome)
    except ValueError as exc:
        print(f"qnd verify: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if not args.timing:
        summary.pop("elapsed_seconds")
    _write(json.dumps(summary, indent=1), args.out)
    return EXIT_OK if summary["violations"] == 0 else EXIT_FAIL


def cmd_sweep(args) -> int:
    try:
        rows = sweep(args.family, args.start, args.stop, args.steps, restarts=args.restarts, seed=args.seed)
    except ValueError as exc:
        print(f"qnd sweep: {exc}", file=sys.stderr)
        return EXIT_INPUT
    _write(rows_to_csv(rows), args.out)
    return EXIT_OK


EXAMPLES = {
    "luders-mub": lambda: luders(pauli_observable("x")),
    "trivial": lambda: trivial_instrument(2),
    "weak-half": lambda: weak_measurement(pauli_observable("x"), 0.5),
}


def cmd_example(args) -> int:
    """Write an instrument plus Pauli X and Z observable files into a directory."""
    out = Path(args.directory)
    out.mkdir(parents=True, exist_ok=True)
    save_instrument(EXAMPLES[args.name](), out / "instrument.json")
    save_observable(pauli_observable("x"), out / "obs_x.json")
    save_observable(pauli_observable("z"), out / "obs_z.json")
    print(f"wrote {out}/instrument.json, obs_x.json, obs_z.json")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qnd", description="Noise and disturbance of quantum instruments.")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="analyze one instrument against two observables")
    a.add_argument("--instrument", required=True, help="instrument JSON file (schema qnd/1)")
    a.add_argument("--obs-x", required=True, help="observable X (the one being measured)")
    a.add_argument("--obs-z", required=True, help="observable Z (the one being disturbed)")
    a.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--out", help="report path (default stdout)")
    a.add_argument("--format", choices=("json", "csv"), default="json")
    a.set_defaults(func=cmd_analyze)

    v = sub.add_parser("verify", help="check the inequalities on random instruments")
    v.add_argument("--dim", type=int, choices=(2, 3, 4), required=True)
    v.add_argument("--trials", type=int, default=100)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--outcomes", type=int, default=None, help="default: dim")
    v.add_argument("--kraus-per-outcome", type=int, default=1)
    v.add_argument("--timing", action="store_true", help="include elapsed seconds in the summary")
    v.add_argument("--out", help="summary path (default stdout)")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", help="scan a one-parameter qubit family")
    s.add_argument("--family", required=True, help=f"one of: {', '.join(SWEEP_FAMILIES)}")
    s.add_argument("--start", type=float, default=0.0)
    s.add_argument("--stop", type=float, default=1.0)
    s.add_argument("--steps", type=int, default=21)
    s.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", help="CSV path (default stdout)")
    s.set_defaults(func=cmd_sweep)

    e = sub.add_parser("example", help="write an example instrument/observable bundle")
    e.add_argument("name", choices=sorted(EXAMPLES))
    e.add_argument("directory")
    e.set_defaults(func=cmd_example)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
