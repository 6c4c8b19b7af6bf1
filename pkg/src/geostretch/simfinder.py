"""Locate slow-manifold points by maximizing a stretching ratio along fibers.

A fiber fixes one coordinate (the reaction progress variable, RPV) of a
planar system and lets the other vary inside given bounds.  Each fiber is
searched with a uniform coarse scan followed by golden-section refinement
around the best sample.  Everything is deterministic: ties go to the
smallest fiber coordinate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import GeostretchError, SingularObjectiveError, UnsupportedDimensionError
from .stretching import classical_ratio, geodesic_ratio
from .vectorfield import VectorFieldModel

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

CONVERGED = "converged"
BOUNDARY = "boundary"
SINGULAR_DOMINATED = "singular-dominated"
FAILED = "failed"

OBJECTIVES: dict[str, Callable[[VectorFieldModel, np.ndarray], float | None]] = {
    "geodesic_ratio": geodesic_ratio,
    "classical_ratio": classical_ratio,
}


def resolve_objective(name: str) -> str:
    key = name if name.endswith("_ratio") else f"{name}_ratio"
    if key not in OBJECTIVES:
        raise ValueError(f"unknown objective {name!r}; choose from geodesic, classical")
    return key


@dataclass(frozen=True)
class FiberProblem:
    rpv_index: int
    rpv_value: float
    fiber_bounds: tuple[float, float]
    objective: str = "geodesic_ratio"

    def __post_init__(self):
        lo, hi = self.fiber_bounds
        if not lo < hi:
            raise ValueError(f"fiber bounds must satisfy low < high, got {self.fiber_bounds}")
        object.__setattr__(self, "objective", resolve_objective(self.objective))

    def point(self, free_value: float) -> np.ndarray:
        p = np.empty(2)
        p[self.rpv_index] = self.rpv_value
        p[1 - self.rpv_index] = free_value
        return p


class FiberMaximum(NamedTuple):
    maximizer: float
    value: float
    status: str


@dataclass(frozen=True)
class SimEntry:
    rpv_value: float
    maximizer: float
    objective_value: float
    status: str


@dataclass(frozen=True)
class SimCurve:
    entries: tuple[SimEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


@dataclass(frozen=True)
class ReferenceDeviation:
    max_abs: float
    mean_abs: float
    per_point: tuple[float, ...]


def golden_section_max(func: Callable[[float], float], a: float, b: float,
                       tol: float) -> tuple[float, float, int]:
    """Shrink [a, b] around a local maximum of ``func`` until b - a <= tol.

    Returns (x, func(x), iterations) for the better of the two final interior
    points, preferring the left one on ties.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = func(c), func(d)
    iterations = 0
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = func(d)
        iterations += 1
    return (c, fc, iterations) if fc >= fd else (d, fd, iterations)


def maximize_scalar(func: Callable[[float], float | None], low: float, high: float,
                    coarse_points: int = 41, tol: float = 1e-8) -> FiberMaximum:
    """Coarse scan plus golden-section refinement of a possibly singular objective.

    ``func`` returns None (or raises a GeostretchError) at singular samples;
    those are skipped in the scan and count as -inf during refinement.
    """
    if coarse_points < 8:
        raise ValueError(f"coarse_points must be >= 8, got {coarse_points}")
    if not low < high:
        raise ValueError(f"empty interval [{low}, {high}]")

    def safe(y: float) -> float | None:
        try:
            val = func(y)
        except GeostretchError:
            return None
        if val is None or not math.isfinite(val):
            return None
        return float(val)

    ys = np.linspace(low, high, coarse_points)
    vals = [safe(float(y)) for y in ys]
    valid = [i for i, v in enumerate(vals) if v is not None]
    if not valid:
        raise SingularObjectiveError(f"all {coarse_points} samples on [{low}, {high}] are singular")
    best = valid[0]
    for i in valid[1:]:
        if vals[i] > vals[best]:
            best = i

    if coarse_points - len(valid) > coarse_points / 2:
        status = SINGULAR_DOMINATED
    elif best in (0, coarse_points - 1):
        status = BOUNDARY
    else:
        status = CONVERGED

    lo_i, hi_i = max(best - 1, 0), min(best + 1, coarse_points - 1)

    def penalized(y: float) -> float:
        v = safe(y)
        return -math.inf if v is None else v

    y_ref, v_ref, _ = golden_section_max(penalized, float(ys[lo_i]), float(ys[hi_i]), tol)
    if v_ref > vals[best]:
        return FiberMaximum(y_ref, v_ref, status)
    return FiberMaximum(float(ys[best]), vals[best], status)


def maximize_fiber(problem: FiberProblem, model: VectorFieldModel, coarse_points: int = 41,
                   tol: float = 1e-8) -> FiberMaximum:
    """Maximize the problem's objective along its fiber."""
    if model.dimension != 2:
        raise UnsupportedDimensionError(f"fiber search needs a planar model, got n={model.dimension}")
    objective = OBJECTIVES[problem.objective]
    lo, hi = problem.fiber_bounds
    if not (model.in_domain(problem.point(lo)) or model.in_domain(problem.point(hi))):
        raise ValueError(f"fiber {problem} does not intersect the model domain")
    return maximize_scalar(lambda y: objective(model, problem.point(y)), lo, hi, coarse_points, tol)


Bounds = tuple[float, float] | Callable[[float], tuple[float, float]]


def trace_sim(model: VectorFieldModel, rpv_index: int, rpv_values: Sequence[float],
              fiber_bounds: Bounds, objective: str = "geodesic_ratio", tol: float = 1e-8,
              coarse_points: int = 41, warm_start: bool = False) -> SimCurve:
    """Run :func:`maximize_fiber` for every RPV value, in order.

    ``fiber_bounds`` is a fixed (low, high) pair or a function of the RPV
    value.  With ``warm_start`` the coarse scan of each fiber after the
    first is restricted to +-25% of the fiber width around the previous
    maximizer; if that window's best sample lands on a window edge that is
    not a fiber bound, the full fiber is scanned instead.  Failures are
    recorded as entries with status "failed" and NaN values.
    """
    rpv = np.asarray(rpv_values, dtype=float)
    if rpv.ndim != 1 or rpv.size == 0:
        raise ValueError("rpv_values must be a non-empty 1-d sequence")
    steps = np.diff(rpv)
    if rpv.size > 1 and not (np.all(steps > 0) or np.all(steps < 0)):
        raise ValueError("rpv_values must be strictly monotone")
    objective = resolve_objective(objective)

    entries = []
    previous = None
    for r in rpv:
        lo, hi = fiber_bounds(float(r)) if callable(fiber_bounds) else fiber_bounds
        try:
            problem = FiberProblem(rpv_index, float(r), (float(lo), float(hi)), objective)
            result = None
            if warm_start and previous is not None:
                half = 0.25 * (hi - lo)
                wlo, whi = max(lo, previous - half), min(hi, previous + half)
                if whi > wlo:
                    windowed = maximize_fiber(
                        FiberProblem(rpv_index, float(r), (wlo, whi), objective), model, coarse_points, tol)
                    if windowed.status != BOUNDARY or windowed.maximizer in (lo, hi):
                        result = windowed
            if result is None:
                result = maximize_fiber(problem, model, coarse_points, tol)
        except (GeostretchError, ValueError):
            entries.append(SimEntry(float(r), math.nan, math.nan, FAILED))
            previous = None
            continue
        entries.append(SimEntry(float(r), result.maximizer, result.value, result.status))
        previous = result.maximizer
    return SimCurve(tuple(entries))


def compare_reference(curve: SimCurve, reference: Callable[[float], float]) -> ReferenceDeviation:
    """Absolute deviation of converged maximizers from ``reference(rpv_value)``."""
    if len(curve) == 0:
        raise ValueError("empty curve")
    errs = [abs(e.maximizer - float(reference(e.rpv_value)))
            for e in curve if e.status == CONVERGED]
    if not errs:
        raise ValueError("curve has no converged entries")
    return ReferenceDeviation(max_abs=max(errs), mean_abs=sum(errs) / len(errs), per_point=tuple(errs))
