"""Bayesian optimization with dynamic acquisition-function schedules.

A small engine (GP surrogate, EI/PI acquisition, schedule portfolio,
acquisition maximizer) plus seeded benchmark landscapes and an experiment
harness that emits normalized log-regret statistics.
"""

from .acquisition import AcquisitionKind, ImprovementContext, ei, evaluate, pi
from .afopt import BoxDomain, DesignSpec, initial_design, maximize_af
from .benchfn import FUNCTION_IDS, BenchInstance, FunctionGroup, bbob_domain, group_of, make_instance
from .gp import GpFitError, GpModel, KernelParams, Posterior, fit, predict, predict_batch
from .runner import (
    AggregateReport,
    CellFailure,
    ExperimentConfig,
    TrialTrajectory,
    aggregate,
    log_regret,
    run_grid,
    run_trial,
)
from .schedule import SCHEDULE_NAMES, ScheduleSpec, ScheduleVariant, from_name, full_trace, kind_at

__version__ = "0.1.0"
