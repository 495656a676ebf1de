"""The optimization loop and the experiment grid.

One trial = one (function, schedule, seed) cell: evaluate a Latin hypercube
initial design, then alternate surrogate fitting, acquisition maximization and
true-function evaluation for T steps. The initial design substream is keyed on
the seed alone, so every schedule (and function) under one seed shares it;
per-step substreams are keyed on (seed, function, step), so schedules that
agree on a prefix of acquisition choices produce identical trajectories over
that prefix. Grid cells are independent and may run in worker processes; the
output is sorted canonically and is byte-identical for any worker count.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .acquisition import AcquisitionKind
from .afopt import DesignSpec, initial_design, maximize_af
from .benchfn import FUNCTION_IDS, bbob_domain, evaluate, evaluate_many, make_instance
from .gp import GpFitError, fit
from .rng import substream
from .schedule import SCHEDULE_NAMES, from_name, kind_at

__all__ = [
    "REGRET_CLAMP",
    "ExperimentConfig",
    "StepRecord",
    "TrialTrajectory",
    "CellFailure",
    "AggregateReport",
    "CurvePoint",
    "FinalPoint",
    "run_trial",
    "run_grid",
    "log_regret",
    "aggregate",
    "write_records",
    "read_records",
    "write_aggregate",
    "read_aggregate",
]

REGRET_CLAMP = 1e-12
CURVE_COLUMNS = ("function", "schedule", "step", "mean_norm_log_regret", "ci_halfwidth")
FINAL_COLUMNS = ("function", "schedule", "seed", "final_norm_log_regret")


@dataclass(frozen=True)
class ExperimentConfig:
    """Grid definition; doe_size and bo_evals default to 3d and 20d."""

    dim: int
    seeds: tuple[int, ...]
    functions: tuple[str, ...] = FUNCTION_IDS
    schedules: tuple[str, ...] = SCHEDULE_NAMES
    doe_size: int | None = None
    bo_evals: int | None = None
    gp_restarts: int = 8

    def __post_init__(self) -> None:
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        object.__setattr__(self, "functions", tuple(self.functions))
        object.__setattr__(self, "schedules", tuple(self.schedules))
        if self.dim < 2:
            raise ValueError("dim must be >= 2")
        if self.doe_size is None:
            object.__setattr__(self, "doe_size", 3 * self.dim)
        if self.bo_evals is None:
            object.__setattr__(self, "bo_evals", 20 * self.dim)
        if self.doe_size < 2:
            raise ValueError("doe_size must be >= 2")
        if self.bo_evals < 1:
            raise ValueError("bo_evals must be >= 1")
        if not self.seeds:
            raise ValueError("seeds must be non-empty")
        if self.gp_restarts < 1:
            raise ValueError("gp_restarts must be >= 1")
        for fid in self.functions:
            if fid not in FUNCTION_IDS:
                raise ValueError(f"unknown function id {fid!r}; implemented: {', '.join(FUNCTION_IDS)}")
        for name in self.schedules:
            from_name(name, self.bo_evals)  # raises on unknown names


@dataclass(frozen=True, eq=False)
class StepRecord:
    step: int
    af: AcquisitionKind
    x: np.ndarray
    y: float
    incumbent: float


@dataclass(frozen=True, eq=False)
class TrialTrajectory:
    """Full record of one cell: design phase plus T surrogate-based steps."""

    function_id: str
    schedule_name: str
    seed: int
    dim: int
    f_opt: float
    doe_x: np.ndarray
    doe_y: np.ndarray
    steps: tuple[StepRecord, ...]

    @property
    def doe_incumbent(self) -> float:
        return float(np.min(self.doe_y))

    @property
    def final_incumbent(self) -> float:
        return self.steps[-1].incumbent if self.steps else self.doe_incumbent

    @property
    def incumbents(self) -> np.ndarray:
        return np.array([rec.incumbent for rec in self.steps])


@dataclass(frozen=True)
class CellFailure:
    """A cell that aborted; `step` names the surrogate step that failed."""

    function_id: str
    schedule_name: str
    seed: int
    dim: int
    step: int
    message: str


def run_trial(function_id: str, schedule_name: str, seed: int, config: ExperimentConfig) -> TrialTrajectory:
    """Run one cell; raises TrialError naming the step if a surrogate fit fails."""
    spec = from_name(schedule_name, config.bo_evals)
    inst = make_instance(function_id, config.dim, seed)
    domain = bbob_domain(config.dim)

    doe_x = initial_design(DesignSpec(config.doe_size), domain, substream(seed, "doe"))
    doe_y = evaluate_many(inst, doe_x)

    xs_unit = [domain.to_unit(row) for row in doe_x]
    ys = list(doe_y)
    incumbent = float(np.min(doe_y))

    steps: list[StepRecord] = []
    for t in range(1, config.bo_evals + 1):
        try:
            model = fit(
                np.asarray(xs_unit),
                np.asarray(ys),
                restarts=config.gp_restarts,
                rng=substream(seed, function_id, "gp-restarts", t),
            )
        except GpFitError as exc:
            raise TrialError(function_id, schedule_name, seed, t, str(exc)) from exc
        af = kind_at(spec, t, seed)
        x_next = maximize_af(af, model, incumbent, domain, substream(seed, function_id, "af-candidates", t))
        y_next = evaluate(inst, x_next)
        incumbent = min(incumbent, y_next)
        steps.append(StepRecord(step=t, af=af, x=x_next, y=y_next, incumbent=incumbent))
        xs_unit.append(domain.to_unit(x_next))
        ys.append(y_next)

    return TrialTrajectory(
        function_id=function_id,
        schedule_name=schedule_name,
        seed=seed,
        dim=config.dim,
        f_opt=inst.f_opt,
        doe_x=doe_x,
        doe_y=doe_y,
        steps=tuple(steps),
    )


class TrialError(RuntimeError):
    def __init__(self, function_id: str, schedule_name: str, seed: int, step: int, message: str):
        super().__init__(f"{function_id}/{schedule_name}/seed={seed} failed at step {step}: {message}")
        self.function_id = function_id
        self.schedule_name = schedule_name
        self.seed = seed
        self.step = step
        self.message = message


def _run_cell(args: tuple[str, str, int, ExperimentConfig]):
    function_id, schedule_name, seed, config = args
    try:
        return run_trial(function_id, schedule_name, seed, config)
    except TrialError as exc:
        return CellFailure(
            function_id=function_id,
            schedule_name=schedule_name,
            seed=seed,
            dim=config.dim,
            step=exc.step,
            message=exc.message,
        )


def run_grid(
    config: ExperimentConfig, workers: int = 1, progress=None
) -> list[TrialTrajectory | CellFailure]:
    """Run the functions x schedules x seeds product.

    Failures become CellFailure records instead of aborting the grid. Results
    come back in canonical (function, schedule, seed) order regardless of the
    worker count.
    """
    cells = [
        (fid, sched, seed, config)
        for fid in config.functions
        for sched in config.schedules
        for seed in config.seeds
    ]
    if workers <= 1:
        results = []
        for cell in cells:
            result = _run_cell(cell)
            results.append(result)
            if progress is not None:
                progress(result)
        return results
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = []
        for result in pool.map(_run_cell, cells):
            results.append(result)
            if progress is not None:
                progress(result)
        return results


def log_regret(trajectory: TrialTrajectory, clamp: float = REGRET_CLAMP) -> np.ndarray:
    """log10 of clamped incumbent regret at each surrogate-based step.

    The design phase is omitted; entry t covers the incumbent after step t+1.
    """
    regret = trajectory.incumbents - trajectory.f_opt
    return np.log10(np.maximum(regret, clamp))


@dataclass(frozen=True)
class CurvePoint:
    function_id: str
    schedule_name: str
    step: int
    mean: float
    ci_halfwidth: float


@dataclass(frozen=True)
class FinalPoint:
    function_id: str
    schedule_name: str
    seed: int
    value: float


@dataclass(frozen=True)
class AggregateReport:
    """Normalized log-regret statistics, one normalization per function."""

    bounds: dict[str, tuple[float, float]]
    degenerate: tuple[str, ...]
    curves: tuple[CurvePoint, ...]
    finals: tuple[FinalPoint, ...]


def _function_order(fid: str) -> tuple[int, str]:
    try:
        return (FUNCTION_IDS.index(fid), fid)
    except ValueError:
        return (len(FUNCTION_IDS), fid)


def _schedule_order(name: str) -> tuple[int, str]:
    try:
        return (SCHEDULE_NAMES.index(name), name)
    except ValueError:
        return (len(SCHEDULE_NAMES), name)


def aggregate(trajectories: list[TrialTrajectory]) -> AggregateReport:
    """Min-max normalize log-regrets per function and average over seeds.

    Bounds cover all schedules, seeds and steps present for a function; the
    confidence halfwidth is 1.96 * sample std / sqrt(n_seeds). Functions whose
    values are all equal normalize to 0 and are flagged as degenerate.
    """
    if not trajectories:
        raise ValueError("no trajectories to aggregate")
    by_cell: dict[tuple[str, str, int], np.ndarray] = {}
    for traj in trajectories:
        key = (traj.function_id, traj.schedule_name, traj.seed)
        if key in by_cell:
            raise ValueError(f"duplicate cell {key}")
        by_cell[key] = log_regret(traj)

    functions = sorted({fid for fid, _, _ in by_cell}, key=_function_order)
    schedules_by_fn = {
        fid: sorted({s for f, s, _ in by_cell if f == fid}, key=_schedule_order) for fid in functions
    }
    seeds_by_pair = {
        (fid, sched): sorted(seed for f, s, seed in by_cell if (f, s) == (fid, sched))
        for fid in functions
        for sched in schedules_by_fn[fid]
    }
    for pair, seeds in seeds_by_pair.items():
        if len(seeds) < 2:
            raise ValueError(f"need >= 2 seeds per (function, schedule) for a CI; {pair} has {len(seeds)}")

    bounds: dict[str, tuple[float, float]] = {}
    degenerate: list[str] = []
    curves: list[CurvePoint] = []
    finals: list[FinalPoint] = []
    for fid in functions:
        values = np.concatenate(
            [by_cell[(fid, sched, seed)] for sched in schedules_by_fn[fid] for seed in seeds_by_pair[(fid, sched)]]
        )
        lo, hi = float(values.min()), float(values.max())
        bounds[fid] = (lo, hi)
        span = hi - lo
        if span <= 0.0:
            degenerate.append(fid)

        def normalize(v: np.ndarray) -> np.ndarray:
            if span <= 0.0:
                return np.zeros_like(v)
            return (v - lo) / span

        for sched in schedules_by_fn[fid]:
            seeds = seeds_by_pair[(fid, sched)]
            matrix = np.vstack([normalize(by_cell[(fid, sched, seed)]) for seed in seeds])
            means = matrix.mean(axis=0)
            halfwidths = 1.96 * matrix.std(axis=0, ddof=1) / np.sqrt(len(seeds))
            for t in range(matrix.shape[1]):
                curves.append(CurvePoint(fid, sched, t + 1, float(means[t]), float(halfwidths[t])))
            for row, seed in enumerate(seeds):
                finals.append(FinalPoint(fid, sched, seed, float(matrix[row, -1])))

    return AggregateReport(
        bounds=bounds,
        degenerate=tuple(degenerate),
        curves=tuple(curves),
        finals=tuple(finals),
    )


# ---------------------------------------------------------------------------
# File formats: trajectories as JSON lines, aggregate as two CSV tables.


def _record_to_json(record: TrialTrajectory | CellFailure) -> dict:
    if isinstance(record, CellFailure):
        return {
            "function": record.function_id,
            "schedule": record.schedule_name,
            "seed": record.seed,
            "dim": record.dim,
            "error": {"step": record.step, "message": record.message},
        }
    return {
        "function": record.function_id,
        "schedule": record.schedule_name,
        "seed": record.seed,
        "dim": record.dim,
        "f_opt": record.f_opt,
        "doe_x": record.doe_x.tolist(),
        "doe_y": record.doe_y.tolist(),
        "af": [rec.af.value for rec in record.steps],
        "x": [rec.x.tolist() for rec in record.steps],
        "y": [rec.y for rec in record.steps],
        "incumbent": [rec.incumbent for rec in record.steps],
    }


def _record_from_json(payload: dict) -> TrialTrajectory | CellFailure:
    if "error" in payload:
        return CellFailure(
            function_id=payload["function"],
            schedule_name=payload["schedule"],
            seed=int(payload["seed"]),
            dim=int(payload["dim"]),
            step=int(payload["error"]["step"]),
            message=payload["error"]["message"],
        )
    steps = tuple(
        StepRecord(
            step=t + 1,
            af=AcquisitionKind(payload["af"][t]),
            x=np.asarray(payload["x"][t], dtype=float),
            y=float(payload["y"][t]),
            incumbent=float(payload["incumbent"][t]),
        )
        for t in range(len(payload["af"]))
    )
    return TrialTrajectory(
        function_id=payload["function"],
        schedule_name=payload["schedule"],
        seed=int(payload["seed"]),
        dim=int(payload["dim"]),
        f_opt=float(payload["f_opt"]),
        doe_x=np.asarray(payload["doe_x"], dtype=float),
        doe_y=np.asarray(payload["doe_y"], dtype=float),
        steps=steps,
    )


def write_records(records, path) -> None:
    """One self-describing JSON record per line, in the given order."""
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(_record_to_json(record), sort_keys=True))
            handle.write("\n")


def read_records(path) -> list[TrialTrajectory | CellFailure]:
    records = []
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                records.append(_record_from_json(json.loads(line)))
    return records


def _format_value(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def _write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(",".join(header) + "\n")
        for row in rows:
            handle.write(",".join(_format_value(v) for v in row) + "\n")


def write_aggregate(report: AggregateReport, out_dir) -> None:
    """Write curves.csv, finals.csv and meta.json under out_dir."""
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(
        out_dir / "curves.csv",
        CURVE_COLUMNS,
        [(c.function_id, c.schedule_name, c.step, c.mean, c.ci_halfwidth) for c in report.curves],
    )
    _write_csv(
        out_dir / "finals.csv",
        FINAL_COLUMNS,
        [(f.function_id, f.schedule_name, f.seed, f.value) for f in report.finals],
    )
    meta = {
        "bounds": {fid: list(b) for fid, b in sorted(report.bounds.items())},
        "degenerate": sorted(report.degenerate),
    }
    (out_dir / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_aggregate(agg_dir) -> tuple[list[CurvePoint], list[FinalPoint]]:
    curves = []
    for row in _read_csv(agg_dir / "curves.csv", CURVE_COLUMNS):
        curves.append(CurvePoint(row[0], row[1], int(row[2]), float(row[3]), float(row[4])))
    finals = []
    for row in _read_csv(agg_dir / "finals.csv", FINAL_COLUMNS):
        finals.append(FinalPoint(row[0], row[1], int(row[2]), float(row[3])))
    return curves, finals


def _read_csv(path, expected_header):
    with open(path, "r", encoding="utf-8") as handle:
        header = tuple(handle.readline().strip().split(","))
        if header != tuple(expected_header):
            raise ValueError(f"{path}: expected columns {expected_header}, found {header}")
        for line in handle:
            line = line.strip()
            if line:
                yield line.split(",")
