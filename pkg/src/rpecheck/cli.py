"""Command-line front end: simulate, check, sweep and oracle."""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

from . import harness
from .channel import NOISE_ALIASES, NoiseConfig
from .checks import report
from .harness import ExperimentConfig, simulate_run
from .oracles import run_oracles
from .records import SchemaError, dumps, read_record, record_to_run, run_to_record, write_record

EXIT_OK, EXIT_USAGE, EXIT_SCHEMA, EXIT_ORACLE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _probability(text):
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"{text} is not in [0, 1]")
    return v


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"{text} is not a positive integer")
    return v


def _nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"{text} is negative")
    return v


def _float_list(text):
    try:
        vals = [float(eval_fraction(t)) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def eval_fraction(token: str) -> float:
    """Parse ``0.25``, ``1/16``, ``2^-4`` or ``pi/3``."""
    t = token.strip().lower().replace(" ", "")
    if t.startswith("2^"):
        return 2.0 ** float(t[2:])
    num, _, den = t.partition("/")
    value = math.pi if num in ("pi", "1pi") else (float(num[:-2]) * math.pi if num.endswith("pi") else float(num))
    if den:
        value /= float(den)
    if not math.isfinite(value):
        raise ValueError(f"not a finite number: {token!r}")
    return value


def _noise(args) -> NoiseConfig:
    kind = NOISE_ALIASES[args.noise]
    if kind == "none" and args.rate:
        raise UsageError("--rate needs a noise model other than 'none'")
    sine = args.spam if args.sine_error is None else args.sine_error
    return NoiseConfig(kind, args.rate, args.spam, sine)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rpecheck", description="Robust phase estimation with self-consistency checks.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="simulate one RPE run and write its record")
    s.add_argument("--angle", type=float, default=1.6)
    s.add_argument("--noise", choices=sorted(NOISE_ALIASES), default="none")
    s.add_argument("--rate", type=_probability, default=0.0)
    s.add_argument("--spam", type=_probability, default=harness.DEFAULT_SPAM)
    s.add_argument("--sine-error", type=_probability, default=None, help="sine over-rotation (default: --spam)")
    s.add_argument("--samples", type=_positive_int, default=1000)
    s.add_argument("--generations", type=_nonneg_int, default=45, help="index of the last generation")
    s.add_argument("--seed", type=_nonneg_int, default=0)
    s.add_argument("--run-index", type=_nonneg_int, default=0)
    s.add_argument("--secondary", action="store_true", help="also simulate the offset sequence")
    s.add_argument("--out", type=Path, help="record path; the secondary goes to <stem>.secondary.json")

    c = sub.add_parser("check", help="run the consistency checks on one or two records")
    c.add_argument("records", nargs="+", type=Path)
    c.add_argument("--L", type=eval_fraction, default=None, help="minimum interval width (length form)")
    c.add_argument("--json", action="store_true")

    w = sub.add_parser("sweep", help="Monte Carlo discrepancy sweep, written as CSV")
    w.add_argument("--mode", choices=("rates", "angles", "widths"), required=True)
    w.add_argument("--model", choices=sorted(k for k in NOISE_ALIASES if k != "none"), default="depol")
    w.add_argument("--runs", type=_positive_int, default=200)
    w.add_argument("--seed", type=_nonneg_int, default=0)
    w.add_argument("--out-dir", type=Path, required=True)
    w.add_argument("--workers", type=_positive_int, default=1)
    w.add_argument("--samples", type=_positive_int, default=1000)
    w.add_argument("--generations", type=_nonneg_int, default=45)
    w.add_argument("--angle", type=float, default=1.6)
    w.add_argument("--rate", type=eval_fraction, default=2.0**-6, help="error rate for --mode angles")
    w.add_argument("--spam", type=_probability, default=harness.DEFAULT_SPAM)
    w.add_argument("--rates", type=_float_list, default=None)
    w.add_argument("--angles", type=_float_list, default=None)
    w.add_argument("--widths", type=_float_list, default=None)

    o = sub.add_parser("oracle", help="brute-force grid verification on random instances")
    o.add_argument("--instances", type=_positive_int, default=1000)
    o.add_argument("--grid-resolution", type=_positive_int, default=10_000, help="grid points per turn")
    o.add_argument("--seed", type=_nonneg_int, default=0)
    o.add_argument("--json", action="store_true")
    return p


def _fmt(v) -> str:
    return "none" if v is None else str(v)


def _summary_table(rep) -> str:
    lines = [f"{'criterion':<24}{'flagged':>8}" + (f"{'discrepancy':>13}" if rep.has_truth else "")]
    for name, v in rep.verdicts.items():
        row = f"{name:<24}{_fmt(v.flagged):>8}"
        if rep.has_truth:
            row += f"{rep.discrepancy(name):>13}"
        lines.append(row)
    if rep.has_truth:
        lines.append(f"{'actual failure':<24}{_fmt(rep.actual):>8}")
    return "\n".join(lines)


def cmd_simulate(args, out) -> int:
    noise = _noise(args)
    config = ExperimentConfig(
        theta=args.angle,
        noise=noise,
        samples=args.samples,
        k_max=args.generations,
        runs=args.run_index + 1,
        master_seed=args.seed,
        with_secondary=args.secondary,
    )
    primary, secondary = simulate_run(config, args.run_index)
    meta = {"seed": args.seed, "run_index": args.run_index, "noise": noise.describe(), "samples": args.samples}
    doc = run_to_record(primary, config.theta, dict(meta, sequence_role="primary"))
    if args.out:
        write_record(args.out, doc)
        if secondary is not None:
            doc2 = run_to_record(secondary, config.theta, dict(meta, sequence_role="secondary"))
            write_record(args.out.with_name(args.out.stem + ".secondary.json"), doc2)
    print("estimates:", " ".join(repr(e) for e in primary.estimates), file=out)
    print(_summary_table(report(primary, secondary, theta_true=config.theta)), file=out)
    return EXIT_OK


def cmd_check(args, out) -> int:
    if len(args.records) > 2:
        raise UsageError("check takes one or two records")
    docs = [read_record(p) for p in args.records]
    run, truth, _ = record_to_run(docs[0])
    run2 = record_to_run(docs[1])[0] if len(docs) == 2 else None
    if run2 is not None and len(run2.compared().sequence) != len(run.compared().sequence):
        raise SchemaError("the two records compare different numbers of generations")
    if run2 is not None and any(b <= a for a, b in zip(run.compared().sequence, run2.compared().sequence)):
        raise SchemaError("the second record's sequence must exceed the first at every compared generation")
    rep = report(run, run2, theta_true=truth, L=args.L)
    if args.json:
        out.write(json.dumps(rep.to_dict(), indent=2, sort_keys=True) + "\n")
    else:
        print(_summary_table(rep), file=out)
    return EXIT_OK


SWEEP_README = """\
Discrepancy sweep output.

histogram.csv  axis_value,criterion,bin,count
means.csv      axis_value,criterion,mean_discrepancy
config.json    settings used to produce these files

A discrepancy is the generation at which a check first flagged failure minus
the generation at which the estimate actually left the pi/N_k window around
the true angle. Positive values mean the check flagged late. A check that
never flags, and a run that never fails, are both recorded at k_max + 1.
Rows are sorted by axis value (in sweep order), then criterion, then bin.
Floats are written with full round-trip precision.
"""


def _write_csv(path: Path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for row in rows:
            wr.writerow([repr(v) if isinstance(v, float) else v for v in row])


def write_sweep(result, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(out_dir / "histogram.csv", ("axis_value", "criterion", "bin", "count"), result.histogram_rows())
    _write_csv(out_dir / "means.csv", ("axis_value", "criterion", "mean_discrepancy"), result.mean_rows())
    meta = dict(result.metadata, runs=result.runs, axis_values=result.axis_values)
    (out_dir / "config.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    (out_dir / "README.txt").write_text(SWEEP_README, encoding="utf-8")


def cmd_sweep(args, out) -> int:
    noise = NoiseConfig(NOISE_ALIASES[args.model], 0.0, args.spam, args.spam)
    config = ExperimentConfig(
        theta=args.angle,
        noise=noise,
        samples=args.samples,
        k_max=args.generations,
        runs=args.runs,
        master_seed=args.seed,
    )
    rates = tuple(args.rates) if args.rates else harness.DEFAULT_RATES
    if any(not 0.0 <= b <= 1.0 for b in rates) or not 0.0 <= args.rate <= 1.0:
        raise UsageError("error rates must lie in [0, 1]")
    if args.mode == "rates":
        result = harness.error_rate_sweep(config, rates, workers=args.workers)
    elif args.mode == "angles":
        if not args.angles:
            raise UsageError("--mode angles needs --angles")
        cfg = replace(config, noise=replace(noise, rate=args.rate))
        result = harness.angle_sweep(cfg, args.angles, workers=args.workers)
    else:
        widths = tuple(args.widths) if args.widths else harness.DEFAULT_WIDTHS
        if any(not L > 0 for L in widths):
            raise UsageError("widths must be positive")
        result = harness.interval_width_sweep(config, widths, rates, workers=args.workers)
    write_sweep(result, args.out_dir)
    for a, crit, m in result.mean_rows():
        print(f"{a!r:>24} {crit:<40} {m:8.3f}", file=out)
    return EXIT_OK


def cmd_oracle(args, out) -> int:
    rep = run_oracles(args.instances, args.grid_resolution, args.seed)
    if args.json:
        out.write(json.dumps({"passed": rep.passed, "checked": rep.counts, "violations": rep.violations}, indent=2) + "\n")
    else:
        for name, n in rep.counts.items():
            bad = sum(v["oracle"] == name for v in rep.violations)
            print(f"{name:<12} {n:>6} checked  {bad:>6} violations", file=out)
        for v in rep.violations:
            print(f"VIOLATION [{v['oracle']}] {v['detail']}", file=out)
            if "record" in v:
                out.write(dumps(v["record"]))
        print("PASS" if rep.passed else "FAIL", file=out)
    return EXIT_OK if rep.passed else EXIT_ORACLE


COMMANDS = {"simulate": cmd_simulate, "check": cmd_check, "sweep": cmd_sweep, "oracle": cmd_oracle}


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(f"rpecheck: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SchemaError as exc:
        print(f"rpecheck: schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except OSError as exc:
        print(f"rpecheck: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
