"""Command-line entry point: ``simulate``, ``flops`` and ``calibrate``."""

from __future__ import annotations

import argparse
import sys
import time

from . import complexity, harness
from .errors import CbwcsError
from .threshold import closed_form_check
from .waveform import CsfParams, calibrate_decision_index, decision_offset_profile


def _methods(text: str) -> tuple[str, ...]:
    return tuple(m.strip() for m in text.split(",") if m.strip())


def cmd_simulate(args) -> int:
    spec = harness.load_config(args.config) if args.config else harness.ExperimentSpec()
    changes = {}
    if args.seed is not None:
        changes["master_seed"] = args.seed
    if args.frames is not None:
        changes["frames"] = args.frames
    if args.methods is not None:
        changes["methods"] = _methods(args.methods)
    if args.workers is not None:
        changes["workers"] = args.workers
    if changes:
        spec = spec.replace(**changes)
    t0 = time.perf_counter()
    records = harness.run_experiment(spec)
    harness.emit_csv(records, args.out)
    if args.plot_data:
        harness.emit_plot_data(records, args.plot_data)
    print(f"{len(records)} records, {spec.frames} frames, {time.perf_counter() - t0:.1f} s -> {args.out}",
          file=sys.stderr)
    return 0


def cmd_flops(args) -> int:
    rows = complexity.cost_table()
    if args.format in ("csv", "both"):
        sys.stdout.write(complexity.format_csv(rows))
    if args.format == "both":
        sys.stdout.write("\n")
    if args.format in ("text", "both"):
        sys.stdout.write(complexity.format_text(rows))
    mismatches = complexity.consistency_report()
    if mismatches and args.format != "csv":
        print("\ntable vs general-form differences:")
        for m in mismatches:
            print(f"  {m.method} {m.row} {m.kind}: table {m.table}, general {m.general} "
                  f"(delta {m.delta})")
    return 0


def cmd_calibrate(args) -> int:
    params = CsfParams(pulse_form=args.pulse_form)
    score, peaks = decision_offset_profile(params, args.oversampling)
    index = calibrate_decision_index(params, args.oversampling)
    print(f"decision index: {index} (of {args.oversampling})")
    print("offset  mean s*y   peak count")
    for k, (v, c) in enumerate(zip(score, peaks), start=1):
        print(f"{k:6d}  {v:9.5f}  {c:10d}")
    scale, rows = closed_form_check(params, oversampling=args.oversampling)
    worst = max(r[4] for r in rows)
    print(f"\nclosed-form ISI vs matched-filter simulation (scale {scale:.6f})")
    print("   tau   i     closed  simulated     |err|")
    for tau, i, c, s, e in rows:
        print(f"{tau:6.2f} {i:3d} {c:10.6f} {s:10.6f} {e:9.2e}")
    print(f"worst absolute error: {worst:.3e}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cbwcs", description="Chaotic baseband BER simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a BER experiment and write CSV")
    sim.add_argument("--config", help="TOML file with ExperimentSpec fields")
    sim.add_argument("--out", required=True, help="CSV output path")
    sim.add_argument("--seed", type=int, help="override master_seed")
    sim.add_argument("--frames", type=int, help="override frames")
    sim.add_argument("--methods", help="comma-separated method list")
    sim.add_argument("--workers", type=int, help="worker processes")
    sim.add_argument("--plot-data", metavar="DIR", help="also write per-method series files")
    sim.set_defaults(func=cmd_simulate)

    fl = sub.add_parser("flops", help="print the FLOP cost tables")
    fl.add_argument("--format", choices=("csv", "text", "both"), default="both")
    fl.set_defaults(func=cmd_flops)

    cal = sub.add_parser("calibrate", help="decision-index and closed-form ISI calibration")
    cal.add_argument("--oversampling", type=int, default=16)
    cal.add_argument("--pulse-form", choices=("continuous", "printed"), default="continuous")
    cal.set_defaults(func=cmd_calibrate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CbwcsError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
