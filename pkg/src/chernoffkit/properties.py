"""Randomised checks of the structural assumptions on one-step operators."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from chernoffkit.grid import Grid1d, GridFunction, lipschitz_estimate, shift
from chernoffkit.operators import SchemeStep

SLACK = 1e-12

PROPERTY_NAMES = (
    "monotonicity",
    "convexity",
    "lemma_b1",
    "normalization",
    "nonexpansive",
    "lipschitz_growth",
    "translation",
)


@dataclass
class Violation:
    property: str
    trial: int
    excess: float
    node: int
    detail: str = ""


@dataclass
class PropertyReport:
    kind: str
    trials: int
    checked: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def counts(self) -> dict:
        out = {name: 0 for name in self.checked}
        for v in self.violations:
            out[v.property] = out.get(v.property, 0) + 1
        return out


def _slack(*arrays: np.ndarray) -> float:
    # absolute slack, scaled up only when the data itself exceeds unit size
    scale = max([1.0] + [float(np.max(np.abs(a))) for a in arrays])
    return SLACK * scale


def _record(rep: PropertyReport, name: str, trial: int, excess: np.ndarray, tol: float, detail=""):
    rep.checked[name] = rep.checked.get(name, 0) + 1
    worst = int(np.argmax(excess))
    if excess[worst] > tol:
        rep.violations.append(Violation(name, trial, float(excess[worst]), worst, detail))


def random_function(rng: np.random.Generator, grid: Grid1d, amplitude: float = 1.0) -> GridFunction:
    """Rough-plus-smooth random sample: uniform noise over a random low-frequency wave."""
    x = (grid.nodes - grid.lo) / (grid.hi - grid.lo)
    smooth = sum(
        rng.uniform(-1, 1) * np.sin((k + 1) * math.pi * x + rng.uniform(0, 2 * math.pi))
        for k in range(3)
    ) / 3.0
    rough = rng.uniform(-1, 1, grid.count)
    mix = rng.uniform(0, 1)
    return GridFunction(grid, amplitude * (mix * smooth + (1 - mix) * rough))


def property_grid(step: SchemeStep) -> Grid1d:
    """Small grid compatible with the step's spacing requirements."""
    p = step.params
    spacing = getattr(p, "delta", None)
    if spacing is None and step.kind.value == "wasserstein":
        d = np.diff(p.shift_grid)
        spacing = float(d.min()) if d.size else 0.05
    if spacing is None:
        spacing = 0.05
    n = 121
    return Grid1d(-spacing * (n // 2), spacing, n)


def check_all(step: SchemeStep, trials: int, seed: int, grid: Grid1d | None = None) -> PropertyReport:
    grid = grid or property_grid(step)
    rng = np.random.default_rng(seed)
    rep = PropertyReport(step.kind.value, trials)
    radius = step.stencil_radius(grid)
    zero = GridFunction(grid, np.zeros(grid.count))
    growth = math.exp(step.meta.lip_growth * step.h)
    omega = math.exp(step.meta.omega * step.h)

    for trial in range(trials):
        f = random_function(rng, grid)
        g = random_function(rng, grid)
        bump = GridFunction(grid, np.abs(random_function(rng, grid).values))
        sf, sg = step(f), step(g)

        # monotonicity: f <= f + bump
        up = step(f + bump)
        _record(rep, "monotonicity", trial, sf.values - up.values, _slack(sf.values, up.values))

        # convexity
        lam = rng.uniform(0.0, 1.0)
        mix = step(f * lam + g * (1 - lam))
        rhs = lam * sf.values + (1 - lam) * sg.values
        _record(rep, "convexity", trial, mix.values - rhs, _slack(mix.values, rhs))

        # v - w inequality with lambda in (0, 1]
        mu = 1.0 - rng.uniform(0.0, 0.95)
        lifted = step((f - g) * (1.0 / mu) + g)
        lhs = sf.values - sg.values
        rhs = mu * (lifted.values - sg.values)
        _record(rep, "lemma_b1", trial, lhs - rhs, _slack(lifted.values, sf.values, sg.values),
                f"lambda={mu!r}")

        # normalisation, exact
        z = step(zero)
        _record(rep, "normalization", trial, np.abs(z.values), 0.0)

        # sup-norm non-expansiveness
        dist_in = float(np.max(np.abs(f.values - g.values)))
        dist_out = np.abs(sf.values - sg.values)
        _record(rep, "nonexpansive", trial, dist_out - omega * dist_in, _slack(sf.values, sg.values))

        # Lipschitz growth on nodes away from the boundary
        inner = slice(min(radius, grid.count // 3), grid.count - min(radius, grid.count // 3))
        if radius >= grid.count:
            inner = slice(0, grid.count)
        lip_in = lipschitz_estimate(f)
        out_slice = GridFunction(_subgrid(grid, inner), sf.values[inner])
        excess = np.array([lipschitz_estimate(out_slice) - growth * lip_in])
        _record(rep, "lipschitz_growth", trial, excess, SLACK * max(1.0, lip_in))

        # translation commutation
        if step.meta.translation_invariant:
            s = int(rng.integers(1, 6)) * (1 if rng.uniform() < 0.5 else -1)
            a = step(shift(f, s)).values
            b = shift(sf, s).values
            margin = radius + abs(s)
            if 2 * margin < grid.count:
                sl = slice(margin, grid.count - margin)
                _record(rep, "translation", trial, np.abs(a[sl] - b[sl]), 0.0, f"shift={s}")
    return rep


def _subgrid(grid: Grid1d, sl: slice) -> Grid1d:
    start = sl.start or 0
    stop = grid.count if sl.stop is None else sl.stop
    return Grid1d(grid.origin + start * grid.spacing, grid.spacing, stop - start)
