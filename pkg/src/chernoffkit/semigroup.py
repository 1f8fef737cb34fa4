"""Chernoff iteration, refinement studies and cross-scheme comparison."""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from chernoffkit.functions import SmoothFunction, probe_functions
from chernoffkit.grid import (
    CompactWindow,
    Grid1d,
    GridFunction,
    WeightKappa,
    kappa_norm,
    sample_function,
    sup_norm_on_window,
)
from chernoffkit.operators import SchemeStep, generator_of, hamiltonian_eval
from chernoffkit.properties import PropertyReport, check_all

# errors below this are treated as exact when judging a refinement trend
EXACT_FLOOR = 1e-12


@dataclass(frozen=True)
class TimeSchedule:
    t: float
    h: float
    k: int

    @property
    def error(self) -> float:
        return abs(self.k * self.h - self.t)


def make_schedule(t: float, h: float) -> TimeSchedule:
    """``k = round(t/h)`` with ties to even."""
    if t < 0:
        raise ValueError("t must be non-negative")
    if not h > 0:
        raise ValueError("h must be positive")
    return TimeSchedule(float(t), float(h), int(round(t / h)))


class StepFailure(RuntimeError):
    def __init__(self, step_index: int, cause: Exception, level: int | None = None):
        where = f"step {step_index}" + ("" if level is None else f" of level {level}")
        super().__init__(f"{where}: {cause}")
        self.step_index = step_index
        self.level = level
        self.cause = cause


@dataclass
class EvolveReport:
    result: GridFunction
    kappa_trace: list[float]
    wall_time: float
    schedule: TimeSchedule
    initial_kappa: float

    def trace_bounded(self, c: float = 0.0, slack: float = 1e-12) -> bool:
        bound = self.initial_kappa + self.schedule.k * self.schedule.h * c
        return all(math.isfinite(v) and v <= bound + slack * max(1.0, bound) for v in self.kappa_trace)


def chernoff_evolve(
    step: SchemeStep, f: GridFunction, sched: TimeSchedule, k: WeightKappa | None = None
) -> EvolveReport:
    """Apply ``step`` ``sched.k`` times, tracing the weighted norm."""
    t0 = time.perf_counter()
    cur = f
    trace = []
    for i in range(sched.k):
        try:
            cur = step.apply(cur)
        except Exception as exc:  # noqa: BLE001 - re-raised with the step index
            raise StepFailure(i, exc) from exc
        trace.append(kappa_norm(cur, k))
    return EvolveReport(cur, trace, time.perf_counter() - t0, sched, kappa_norm(f, k))


@dataclass(frozen=True)
class RefinementLadder:
    levels: tuple[tuple[SchemeStep, Grid1d], ...]
    rule: str = ""

    def __post_init__(self):
        lv = tuple(self.levels)
        if len(lv) < 3:
            raise ValueError("a refinement ladder needs at least 3 levels")
        hs = [s.h for s, _ in lv]
        ds = [g.spacing for _, g in lv]
        if any(b >= a for a, b in zip(hs, hs[1:])):
            raise ValueError("ladder time steps must strictly decrease")
        if any(b > a for a, b in zip(ds, ds[1:])):
            raise ValueError("ladder grid spacings must not increase")
        object.__setattr__(self, "levels", lv)


@dataclass
class LevelResult:
    level: int
    delta: float
    h: float
    k: int
    error: float
    order: float | None
    result: GridFunction
    wall_time: float


@dataclass
class RateTable:
    rows: list[LevelResult]
    eventually_decreasing: bool

    @property
    def errors(self) -> list[float]:
        return [r.error for r in self.rows]

    @property
    def final_error(self) -> float:
        return self.rows[-1].error

    def csv_rows(self):
        return [(r.level, r.delta, r.h, r.k, r.error, r.order) for r in self.rows]


def empirical_orders(errors: Sequence[float]) -> list[float | None]:
    out: list[float | None] = [None]
    for a, b in zip(errors, errors[1:]):
        out.append(math.log2(a / b) if a > 0 and b > 0 else None)
    return out


def eventually_decreasing(errors: Sequence[float], floor: float = EXACT_FLOOR) -> bool:
    """Last refinement reduces the error, or the finest error is at round-off level."""
    if not errors:
        return False
    if errors[-1] <= floor:
        return True
    if len(errors) < 2:
        return False
    return errors[-1] < errors[-2]


def _reference_values(reference, x: np.ndarray) -> np.ndarray:
    if isinstance(reference, GridFunction):
        g = reference.grid
        u = (x - g.origin) / g.spacing
        i = np.rint(u).astype(np.int64)
        if np.any(np.abs(u - i) > 1e-9 * np.maximum(1.0, np.abs(u))) or np.any((i < 0) | (i >= g.count)):
            raise ValueError("reference grid does not contain the window nodes")
        return reference.values[i]
    return np.asarray(reference(x), dtype=float) * np.ones_like(x)


def map_levels(fn: Callable, items: Sequence, threads: int = 1) -> list:
    """Ordered map, optionally on a thread pool; results never depend on ``threads``."""
    if threads <= 1 or len(items) <= 1:
        return [fn(i, it) for i, it in enumerate(items)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(fn, i, it) for i, it in enumerate(items)]
        return [fut.result() for fut in futures]


def evaluate_levels(
    levels: Sequence[tuple[SchemeStep, Grid1d]],
    f: Callable,
    t: float,
    w: CompactWindow,
    reference="finest",
    threads: int = 1,
) -> RateTable:
    """Evolve ``f`` on each ``(step, grid)`` level and tabulate window errors.

    ``reference`` is ``"finest"`` (the last level's result), a grid function
    containing the window nodes, or a vectorised callable of the node array.
    """

    def run(i, level):
        step, grid = level
        sched = make_schedule(t, step.h)
        try:
            return chernoff_evolve(step, sample_function(f, grid), sched)
        except StepFailure as exc:
            raise StepFailure(exc.step_index, exc.cause, level=i) from exc

    reports = map_levels(run, list(levels), threads)
    ref = reports[-1].result if isinstance(reference, str) and reference == "finest" else reference
    rows = []
    for i, ((step, grid), rep) in enumerate(zip(levels, reports)):
        idx = grid.window_indices(w)
        x = grid.nodes[idx]
        err = float(np.max(np.abs(rep.result.values[idx] - _reference_values(ref, x))))
        rows.append(LevelResult(i, grid.spacing, step.h, rep.schedule.k, err, None, rep.result, rep.wall_time))
    for row, order in zip(rows, empirical_orders([r.error for r in rows])):
        row.order = order
    return RateTable(rows, eventually_decreasing([r.error for r in rows]))


def refinement_study(
    ladder: RefinementLadder,
    f: Callable,
    t: float,
    w: CompactWindow,
    reference="finest",
    threads: int = 1,
) -> RateTable:
    """Per-level window errors, empirical orders and an eventual-decrease verdict."""
    return evaluate_levels(ladder.levels, f, t, w, reference, threads)


class NotComparableError(ValueError):
    pass


PROBE_TOL = 1e-6
PROBE_NODES = np.linspace(-3.0, 3.0, 61)


def generator_gap(a: SchemeStep, b: SchemeStep, probes: Sequence[SmoothFunction] | None = None) -> float:
    ga, gb = generator_of(a), generator_of(b)
    worst = 0.0
    for pr in probes or probe_functions():
        va = hamiltonian_eval(ga, pr, PROBE_NODES)
        vb = hamiltonian_eval(gb, pr, PROBE_NODES)
        worst = max(worst, float(np.max(np.abs(va - vb))))
    return worst


@dataclass
class Comparison:
    distance: float
    result_a: GridFunction
    result_b: GridFunction
    schedule_a: TimeSchedule
    schedule_b: TimeSchedule
    generator_gap: float


def compare_evolutions(
    step_a: SchemeStep,
    step_b: SchemeStep,
    f: GridFunction,
    t: float,
    w: CompactWindow,
    probe_tol: float = PROBE_TOL,
) -> Comparison:
    """Gate on generator agreement, then evolve both schemes to ``t``."""
    gap = 0.0 if step_a is step_b else generator_gap(step_a, step_b)
    if gap > probe_tol:
        raise NotComparableError(f"schemes are not comparable: generator probes differ by {gap:.3e}")
    sa, sb = make_schedule(t, step_a.h), make_schedule(t, step_b.h)
    ra = chernoff_evolve(step_a, f, sa).result
    rb = ra if step_b is step_a else chernoff_evolve(step_b, f, sb).result
    return Comparison(sup_norm_on_window(ra, rb, w), ra, rb, sa, sb, gap)


def comparison_run(
    step_a: SchemeStep,
    step_b: SchemeStep,
    f: GridFunction,
    t: float,
    w: CompactWindow,
    probe_tol: float = PROBE_TOL,
) -> float:
    """Window distance between the two evolutions of ``f`` to time ``t``."""
    return compare_evolutions(step_a, step_b, f, t, w, probe_tol).distance


@dataclass
class EquicontinuityReport:
    ratios: list[float | None]
    output_distances: list[float]
    input_distances: list[float]

    @property
    def empirical_c(self) -> float | None:
        vals = [r for r in self.ratios if r is not None]
        return max(vals) if vals else None


def equicontinuity_probe(
    step: SchemeStep,
    r: float,
    t: float,
    w: CompactWindow,
    perturbations: Sequence[tuple[GridFunction, GridFunction]],
    margin: float | None = None,
) -> EquicontinuityReport:
    """Ratio of output distance on ``w`` to input distance on the widened window.

    ``margin`` defaults to the scheme's domain of dependence over ``t``.
    """
    ratios, outs, ins = [], [], []
    for f, g in perturbations:
        if max(kappa_norm(f), kappa_norm(g)) > r:
            raise ValueError("perturbation pair exceeds the norm bound r")
        sched = make_schedule(t, step.h)
        m = margin
        if m is None:
            m = step.stencil_radius(f.grid) * f.grid.spacing * sched.k
        wide = CompactWindow(max(w.lo - m, f.grid.lo), min(w.hi + m, f.grid.hi))
        d_in = sup_norm_on_window(f, g, wide)
        fo = chernoff_evolve(step, f, sched).result
        go = chernoff_evolve(step, g, sched).result
        d_out = sup_norm_on_window(fo, go, w)
        ins.append(d_in)
        outs.append(d_out)
        ratios.append(None if d_in == 0 else d_out / d_in)
    return EquicontinuityReport(ratios, outs, ins)


def convexity_certificate(step: SchemeStep, trials: int, seed: int, grid: Grid1d | None = None) -> PropertyReport:
    """Run every structural property check on seeded random data."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    return check_all(step, trials, seed, grid)
