"""Command-line entry point: run grids, aggregate regrets, export plot data."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .benchfn import FUNCTION_IDS
from .runner import (
    CURVE_COLUMNS,
    FINAL_COLUMNS,
    CellFailure,
    ExperimentConfig,
    TrialTrajectory,
    _schedule_order,
    _function_order,
    _write_csv,
    aggregate,
    read_aggregate,
    read_records,
    run_grid,
    write_aggregate,
    write_records,
)
from .schedule import SCHEDULE_NAMES

__all__ = ["main"]


def _parse_seeds(text: str) -> tuple[int, ...]:
    """`a..b` is the half-open range [a, b); otherwise a comma list of ints."""
    if ".." in text:
        lo_text, hi_text = text.split("..", 1)
        lo, hi = int(lo_text), int(hi_text)
        if hi <= lo:
            raise argparse.ArgumentTypeError(f"empty seed range {text!r}")
        return tuple(range(lo, hi))
    return tuple(int(part) for part in text.split(",") if part)


def _parse_list(text: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in text.split(",") if part.strip())


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="afsched",
        description="Bayesian optimization with acquisition-function schedules on seeded benchmark landscapes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a (functions x schedules x seeds) grid and write trajectories")
    run.add_argument("--dim", type=int, required=True, help="problem dimension")
    run.add_argument("--functions", type=_parse_list, required=True, help=f"comma list from: {','.join(FUNCTION_IDS)}")
    run.add_argument("--schedules", type=_parse_list, required=True, help=f"comma list from: {'|'.join(SCHEDULE_NAMES)}")
    run.add_argument("--seeds", type=_parse_seeds, required=True, help="half-open range a..b or comma list")
    run.add_argument("--out", type=Path, required=True, help="output directory for trajectories.jsonl")
    run.add_argument("--doe", type=int, default=None, help="initial design size (default 3*dim)")
    run.add_argument("--evals", type=int, default=None, help="surrogate-based evaluations (default 20*dim)")
    run.add_argument("--gp-restarts", type=int, default=8, help="likelihood ascent restarts per fit")
    run.add_argument("--workers", type=int, default=1, help="parallel worker processes")

    agg = sub.add_parser("aggregate", help="normalize log-regrets and write the curve and finals tables")
    agg.add_argument("--in", dest="in_dir", type=Path, required=True, help="directory of trajectory .jsonl files")
    agg.add_argument("--out", type=Path, required=True, help="output directory for curves.csv / finals.csv")

    rep = sub.add_parser("report", help="emit per-function plot data and the cross-function average curve")
    rep.add_argument("--agg", type=Path, required=True, help="directory holding curves.csv / finals.csv")
    rep.add_argument("--out", type=Path, required=True, help="output directory for plot-data files")
    return parser


def _cmd_run(args) -> int:
    try:
        config = ExperimentConfig(
            dim=args.dim,
            seeds=args.seeds,
            functions=args.functions,
            schedules=args.schedules,
            doe_size=args.doe,
            bo_evals=args.evals,
            gp_restarts=args.gp_restarts,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    def progress(record):
        if isinstance(record, CellFailure):
            print(f"{record.function_id} {record.schedule_name} seed={record.seed} FAILED at step {record.step}: {record.message}")
        else:
            print(
                f"{record.function_id} {record.schedule_name} seed={record.seed} "
                f"final_regret={record.final_incumbent - record.f_opt:.6g}"
            )

    records = run_grid(config, workers=args.workers, progress=progress)
    args.out.mkdir(parents=True, exist_ok=True)
    write_records(records, args.out / "trajectories.jsonl")
    failures = sum(isinstance(r, CellFailure) for r in records)
    print(f"wrote {len(records)} records ({failures} failed) to {args.out / 'trajectories.jsonl'}")
    if failures == len(records):
        print("error: every cell failed", file=sys.stderr)
        return 1
    return 0


def _cmd_aggregate(args) -> int:
    files = sorted(args.in_dir.glob("*.jsonl"))
    if not files:
        print(f"error: no trajectory files (*.jsonl) in {args.in_dir}", file=sys.stderr)
        return 1
    trajectories: list[TrialTrajectory] = []
    for path in files:
        for record in read_records(path):
            if isinstance(record, TrialTrajectory):
                trajectories.append(record)
    if not trajectories:
        print("error: no successful trajectories to aggregate", file=sys.stderr)
        return 1
    dims = {traj.dim for traj in trajectories}
    if len(dims) > 1:
        print(f"error: mixed dimensions {sorted(dims)} are not comparable", file=sys.stderr)
        return 1
    try:
        report = aggregate(trajectories)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    write_aggregate(report, args.out)
    if report.degenerate:
        print(f"warning: degenerate normalization (all values equal) for: {', '.join(report.degenerate)}")
    print(f"wrote {args.out / 'curves.csv'} and {args.out / 'finals.csv'}")
    return 0


def _cmd_report(args) -> int:
    try:
        curves, finals = read_aggregate(args.agg)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    args.out.mkdir(parents=True, exist_ok=True)

    curves.sort(key=lambda c: (_function_order(c.function_id), _schedule_order(c.schedule_name), c.step))
    finals.sort(key=lambda f: (_function_order(f.function_id), _schedule_order(f.schedule_name), f.seed))
    functions = sorted({c.function_id for c in curves}, key=_function_order)

    for fid in functions:
        _write_csv(
            args.out / f"curve_{fid}.csv",
            CURVE_COLUMNS,
            [
                (c.function_id, c.schedule_name, c.step, c.mean, c.ci_halfwidth)
                for c in curves
                if c.function_id == fid
            ],
        )
        _write_csv(
            args.out / f"violin_{fid}.csv",
            FINAL_COLUMNS,
            [(f.function_id, f.schedule_name, f.seed, f.value) for f in finals if f.function_id == fid],
        )

    # Cross-function average: unweighted mean of the normalized curves.
    by_key: dict[tuple[str, int], list[float]] = {}
    for c in curves:
        by_key.setdefault((c.schedule_name, c.step), []).append(c.mean)
    rows = [
        (sched, step, sum(vals) / len(vals))
        for (sched, step), vals in sorted(by_key.items(), key=lambda kv: (_schedule_order(kv[0][0]), kv[0][1]))
    ]
    _write_csv(args.out / "average_curve.csv", ("schedule", "step", "mean_norm_log_regret"), rows)
    print(f"wrote {len(functions)} curve/violin file pairs and average_curve.csv to {args.out}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "aggregate":
        return _cmd_aggregate(args)
    if args.command == "report":
        return _cmd_report(args)
    parser.error(f"unknown command {args.command!r}")
    return 2


if __name__ == "__main__":
    sys.exit(main())
