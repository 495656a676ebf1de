"""Initial designs and inner-loop maximization of the acquisition function.

The inner loop is gradient-free and deterministic given its seed: score a
batch of uniform random candidates, then refine the best few with a shrinking
coordinate pattern search, all in unit-cube coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .acquisition import AcquisitionKind, scores
from .gp import GpModel, predict_batch

__all__ = [
    "BoxDomain",
    "DesignSpec",
    "initial_design",
    "maximize_af",
]

N_CANDIDATES = 1024
N_REFINE_STARTS = 5
_STEP_START = 0.1      # fraction of each dimension's range
_STEP_STOP = 1e-4
_MAX_SWEEPS = 500


@dataclass(frozen=True, eq=False)
class BoxDomain:
    """Axis-aligned box, lower < upper componentwise."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self) -> None:
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=float))
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        if lo.ndim != 1 or lo.shape != hi.shape or lo.size < 1:
            raise ValueError("lower and upper must be 1-d vectors of equal size")
        if not np.all(lo < hi):
            raise ValueError("need lower < upper componentwise")

    @property
    def dim(self) -> int:
        return self.lower.size

    def to_unit(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.lower) / (self.upper - self.lower)

    def from_unit(self, u: np.ndarray) -> np.ndarray:
        return self.lower + np.asarray(u, dtype=float) * (self.upper - self.lower)

    def contains(self, x: np.ndarray) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))


@dataclass(frozen=True)
class DesignSpec:
    """Initial-design request; only Latin hypercube sampling is supported."""

    n_points: int
    method: str = "lhs"

    def __post_init__(self) -> None:
        if self.n_points < 1:
            raise ValueError("n_points must be >= 1")
        if self.method != "lhs":
            raise ValueError(f"unknown design method {self.method!r}")


def initial_design(spec: DesignSpec, domain: BoxDomain, rng: np.random.Generator) -> np.ndarray:
    """Latin hypercube sample of spec.n_points points in the domain.

    Each coordinate places exactly one point in each of n equal-width strata.
    The draw depends only on (rng seed, dim, n_points); callers that must
    share a design (e.g. across schedules) pass generators with equal seeds.
    """
    n = spec.n_points
    unit = np.empty((n, domain.dim))
    for j in range(domain.dim):
        unit[:, j] = (rng.permutation(n) + rng.random(n)) / n
    return domain.from_unit(unit)


def maximize_af(
    kind: AcquisitionKind,
    model: GpModel,
    y_min: float,
    domain: BoxDomain,
    rng: np.random.Generator,
) -> np.ndarray:
    """Approximate argmax of the acquisition function over the domain.

    Two stages: score N_CANDIDATES uniform random points, then run a shrinking
    coordinate pattern search (step 0.1 down to 1e-4 of each range) from the
    top N_REFINE_STARTS candidates. Ties prefer the lowest candidate index.
    The returned point is always inside the domain and never scores below the
    best raw candidate.
    """
    d = domain.dim
    if model.dim != d:
        raise ValueError(f"model dim {model.dim} does not match domain dim {d}")

    def af(points: np.ndarray) -> np.ndarray:
        means, stds = predict_batch(model, points)
        return scores(kind, means, stds, y_min)

    cands = rng.random((N_CANDIDATES, d))
    vals = af(cands)

    # Stable sort: equal scores keep candidate order, so a flat surface
    # degrades to returning the first candidate.
    order = np.argsort(-vals, kind="stable")
    starts = order[:N_REFINE_STARTS]

    xs, vs = _pattern_search(af, cands[starts], vals[starts], d)
    best = 0
    for i in range(1, len(starts)):
        if vs[i] > vs[best]:
            best = i
    return domain.from_unit(xs[best])


def _pattern_search(af, starts: np.ndarray, start_vals: np.ndarray, d: int) -> tuple[np.ndarray, np.ndarray]:
    """Best-of-neighborhood coordinate search from several starts.

    Starts are refined in lockstep so each sweep costs one batched posterior
    call, but every start follows exactly the trajectory it would follow
    alone: moves depend only on that start's own neighborhood.
    """
    m = starts.shape[0]
    xs = starts.astype(float, copy=True)
    vs = np.asarray(start_vals, dtype=float).copy()
    steps = np.full(m, _STEP_START)
    for _ in range(_MAX_SWEEPS):
        active = np.flatnonzero(steps >= _STEP_STOP)
        if active.size == 0:
            break
        neighbors = np.repeat(xs[active], 2 * d, axis=0)
        for row, i in enumerate(active):
            base = 2 * d * row
            for k in range(d):
                neighbors[base + 2 * k, k] = min(1.0, xs[i, k] + steps[i])
                neighbors[base + 2 * k + 1, k] = max(0.0, xs[i, k] - steps[i])
        nv = af(neighbors).reshape(active.size, 2 * d)
        for row, i in enumerate(active):
            j = int(np.argmax(nv[row]))
            if nv[row, j] > vs[i]:
                xs[i] = neighbors[2 * d * row + j]
                vs[i] = float(nv[row, j])
            else:
                steps[i] *= 0.5
    return xs, vs
