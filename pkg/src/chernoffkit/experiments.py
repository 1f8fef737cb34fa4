"""Experiment pipelines behind the command-line runner."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from chernoffkit import __version__
from chernoffkit.config import ExperimentConfig, Level, build_step, parse_function, parse_penalty
from chernoffkit.grid import CompactWindow, Grid1d, sample_function
from chernoffkit.io import write_csv, write_grid_csv, write_json
from chernoffkit.operators import discrete_generator, generator_of, generator_residual
from chernoffkit.oracles import g_heat_convex, gaussian_heat, large_deviations_limit, ode_flow
from chernoffkit.properties import PROPERTY_NAMES
from chernoffkit.semigroup import (
    compare_evolutions,
    convexity_certificate,
    empirical_orders,
    evaluate_levels,
    eventually_decreasing,
    map_levels,
)

SUMMARY_SCHEMA = 1
PROPERTY_NODES = 121


@dataclass
class Verdict:
    passed: bool | None  # None: not applicable
    value: float | None = None
    tolerance: float | None = None
    note: str = ""

    def to_dict(self) -> dict:
        out = {"passed": self.passed}
        if self.value is not None:
            out["value"] = self.value
        if self.tolerance is not None:
            out["tolerance"] = self.tolerance
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class RunReport:
    config: dict
    levels: list[dict] = field(default_factory=list)
    verdicts: dict[str, Verdict] = field(default_factory=dict)
    error_rows: list[tuple] = field(default_factory=list)
    snapshots: dict[str, tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)
    details: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts.values() if v.passed is not None)

    def summary(self) -> dict:
        out = {
            "schema_version": SUMMARY_SCHEMA,
            "artifact_version": __version__,
            "config": self.config,
            "levels": self.levels,
            "verdicts": {k: v.to_dict() for k, v in self.verdicts.items()},
        }
        if self.details:
            out["details"] = self.details
        out["passed"] = self.passed
        return out


def _oracle_on_nodes(cfg: ExperimentConfig, t: float, drift=None) -> Callable | str:
    """Reference values as a callable of uniformly spaced window nodes."""
    ref = cfg.resolved["reference"]
    kind = ref["kind"]
    f = cfg.initial()
    if kind == "finest":
        return "finest"

    def as_grid(x: np.ndarray):
        dx = float(x[1] - x[0]) if x.size > 1 else 1.0
        g = Grid1d(float(x[0]), dx, max(x.size, 3))
        return g, CompactWindow(float(x[0]), float(x[-1]) if x.size > 1 else float(x[0]) + dx)

    if kind == "gaussian-heat":
        return lambda x: gaussian_heat(f, ref["sigma"], t, *reversed(as_grid(x))).values
    if kind == "g-heat-convex":
        return lambda x: g_heat_convex(f, ref["sigma_lo"], ref["sigma_hi"], t, *reversed(as_grid(x))).values
    if kind == "hopf-lax":
        pen = parse_penalty(ref["penalty"], "reference.penalty")
        yw = CompactWindow(ref["y_lo"], ref["y_hi"])
        return lambda x: large_deviations_limit(f, pen, t, *reversed(as_grid(x)), y_window=yw, mesh=ref["mesh"]).values
    if kind == "ode-flow":
        if drift is None:
            raise ValueError("ode-flow reference needs a drift-carrying scheme")
        return lambda x: f(ode_flow(drift, t, x, ref["rtol"]))
    raise ValueError(f"reference {kind!r} cannot be evaluated")


def _selected(levels: list[Level], level_filter: int | None) -> list[Level]:
    if level_filter is None:
        return levels
    if not 0 <= level_filter < len(levels):
        raise IndexError(f"level filter {level_filter} outside 0..{len(levels) - 1}")
    return [levels[level_filter]]


def _trend_verdicts(report: RunReport, errors: list[float], cfg: ExperimentConfig, name="final_error"):
    tol = cfg.resolved["tolerances"]
    final = errors[-1]
    report.verdicts[name] = Verdict(final <= tol["final_error"], final, tol["final_error"])
    if not tol["require_decrease"]:
        report.verdicts["eventually_decreasing"] = Verdict(None, note="not required")
    elif len(errors) < 2 and final > 1e-12:
        report.verdicts["eventually_decreasing"] = Verdict(None, note="single level")
    else:
        report.verdicts["eventually_decreasing"] = Verdict(eventually_decreasing(errors))


def run_refinement(cfg: ExperimentConfig, threads: int, level_filter: int | None) -> RunReport:
    rep = RunReport(cfg.resolved)
    levels = _selected(cfg.levels, level_filter)
    sch = cfg.resolved["scheme"]
    pairs = [(build_step(sch, lv, "scheme"), cfg.grid(lv)) for lv in levels]
    t = cfg.resolved["time"]["t"]
    drift = parse_function(sch["drift"], "scheme.drift") if "drift" in sch else None
    reference = _oracle_on_nodes(cfg, t, drift)
    table = evaluate_levels(pairs, cfg.initial(), t, cfg.window, reference, threads)
    for lv, row in zip(levels, table.rows):
        rep.levels.append(dict(lv.echo(), h=row.h, k=row.k, error=row.error, order=row.order))
        rep.error_rows.append((lv.index, row.delta, row.h, row.k, row.error, row.order))
        rep.snapshots[f"function_{lv.index}.csv"] = (row.result.nodes, row.result.values)
        rep.timings[f"level_{lv.index}"] = row.wall_time
    _trend_verdicts(rep, table.errors, cfg)
    return rep


def run_generator(cfg: ExperimentConfig, threads: int, level_filter: int | None) -> RunReport:
    rep = RunReport(cfg.resolved)
    levels = _selected(cfg.levels, level_filter)
    sch = cfg.resolved["scheme"]
    f = cfg.initial()
    w = cfg.window

    def run(i, lv):
        t0 = time.perf_counter()
        step = build_step(sch, lv, "scheme")
        grid = cfg.grid(lv)
        res = generator_residual(step, generator_of(step), f, w, grid)
        disc = discrete_generator(step, f, grid)
        return step, res, disc, time.perf_counter() - t0

    out = map_levels(run, levels, threads)
    errors = [o[1] for o in out]
    orders = empirical_orders(errors)
    for lv, (step, res, disc, wall), order in zip(levels, out, orders):
        rep.levels.append(dict(lv.echo(), h=step.h, k=1, error=res, order=order))
        rep.error_rows.append((lv.index, lv.delta, step.h, 1, res, order))
        rep.snapshots[f"function_{lv.index}.csv"] = (disc.nodes, disc.values)
        rep.timings[f"level_{lv.index}"] = wall
    _trend_verdicts(rep, errors, cfg)
    return rep


def run_compare(cfg: ExperimentConfig, threads: int, level_filter: int | None) -> RunReport:
    rep = RunReport(cfg.resolved)
    levels = _selected(cfg.levels, level_filter)
    res = cfg.resolved
    t = res["time"]["t"]
    f = cfg.initial()
    w = cfg.window
    drift = parse_function(res["scheme_a"]["drift"], "scheme_a.drift") if "drift" in res["scheme_a"] else None
    reference = None if res["reference"]["kind"] in ("none", "finest") else _oracle_on_nodes(cfg, t, drift)

    def run(i, lv):
        t0 = time.perf_counter()
        a = build_step(res["scheme_a"], lv, "scheme_a")
        b = build_step(res["scheme_b"], lv, "scheme_b")
        grid = cfg.grid(lv)
        cmp = compare_evolutions(a, b, sample_function(f, grid), t, w)
        ref_err = None
        if reference is not None:
            idx = grid.window_indices(w)
            r = reference(grid.nodes[idx])
            ref_err = (float(np.max(np.abs(cmp.result_a.values[idx] - r))),
                       float(np.max(np.abs(cmp.result_b.values[idx] - r))))
        return cmp, ref_err, time.perf_counter() - t0

    out = map_levels(run, levels, threads)
    errors = [o[0].distance for o in out]
    orders = empirical_orders(errors)
    for lv, (cmp, ref_err, wall), order in zip(levels, out, orders):
        row = dict(lv.echo(), h_a=cmp.schedule_a.h, k_a=cmp.schedule_a.k, h_b=cmp.schedule_b.h,
                   k_b=cmp.schedule_b.k, generator_gap=cmp.generator_gap, error=cmp.distance, order=order)
        if ref_err is not None:
            row["reference_error_a"], row["reference_error_b"] = ref_err
        rep.levels.append(row)
        rep.error_rows.append((lv.index, lv.delta, cmp.schedule_a.h, cmp.schedule_a.k, cmp.distance, order))
        rep.snapshots[f"function_{lv.index}.csv"] = (cmp.result_a.nodes, cmp.result_a.values)
        rep.snapshots[f"function_{lv.index}_b.csv"] = (cmp.result_b.nodes, cmp.result_b.values)
        rep.timings[f"level_{lv.index}"] = wall
    _trend_verdicts(rep, errors, cfg, name="final_distance")
    tol = res["tolerances"].get("reference_error")
    last = out[-1][1]
    if tol is not None:
        if last is None:
            rep.verdicts["reference_error"] = Verdict(None, note="no oracle reference configured")
        else:
            rep.verdicts["reference_error"] = Verdict(max(last) <= tol, max(last), tol)
    return rep


def run_properties(cfg: ExperimentConfig, threads: int, level_filter: int | None) -> RunReport:
    rep = RunReport(cfg.resolved)
    props = cfg.resolved["properties"]
    seed = cfg.resolved["seed"]
    blocks = list(enumerate(props["schemes"]))
    if level_filter is not None:
        blocks = [blocks[level_filter]]

    def run(_, item):
        i, sch = item
        t0 = time.perf_counter()
        step = build_step(sch, cfg.levels[i], f"properties.schemes[{i}]")
        d = sch["delta"]
        grid = Grid1d(-d * (PROPERTY_NODES // 2), d, PROPERTY_NODES)
        result = convexity_certificate(step, props["trials"], seed, grid)
        return i, sch, result, time.perf_counter() - t0

    out = map_levels(run, blocks, threads)
    per_kind = []
    all_violations = []
    for i, sch, result, wall in out:
        counts = result.counts()
        per_kind.append({
            "index": i,
            "kind": sch["kind"],
            "trials": result.trials,
            "checked": {name: result.checked.get(name, 0) for name in PROPERTY_NAMES},
            "violations": {name: counts.get(name, 0) for name in PROPERTY_NAMES},
        })
        for v in result.violations:
            all_violations.append({"index": i, "kind": sch["kind"], "property": v.property,
                                   "trial": v.trial, "node": v.node, "excess": v.excess,
                                   "detail": v.detail})
        rep.timings[f"scheme_{i}"] = wall
    rep.details = {"schemes": per_kind, "violations": all_violations}
    rep.verdicts["zero_violations"] = Verdict(not all_violations, float(len(all_violations)), 0.0)
    return rep


def run_experiment(cfg: ExperimentConfig, threads: int = 1, level_filter: int | None = None) -> RunReport:
    t0 = time.perf_counter()
    exp = cfg.experiment
    if exp == "properties":
        rep = run_properties(cfg, threads, level_filter)
    elif exp == "compare":
        rep = run_compare(cfg, threads, level_filter)
    elif cfg.resolved["study"] == "generator":
        rep = run_generator(cfg, threads, level_filter)
    else:
        rep = run_refinement(cfg, threads, level_filter)
    rep.timings["total"] = time.perf_counter() - t0
    return rep


def emit_report(report: RunReport, out_dir, timings: bool = False) -> list[Path]:
    """Write ``summary.json``, ``errors.csv`` and snapshots; returns the written paths."""
    d = Path(out_dir)
    d.mkdir(parents=True, exist_ok=True)
    written = []
    p = d / "summary.json"
    write_json(p, report.summary())
    written.append(p)
    if report.error_rows:
        p = d / "errors.csv"
        write_csv(p, ["level", "delta", "h", "k", "error", "order"], report.error_rows)
        written.append(p)
    for name, (x, v) in report.snapshots.items():
        p = d / name
        write_grid_csv(p, x, v)
        written.append(p)
    if timings:
        p = d / "timings.json"
        write_json(p, report.timings)
        written.append(p)
    return written
