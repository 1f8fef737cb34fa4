"""One-step operators and their generator descriptors.

Every step maps a :class:`GridFunction` to a fresh one of the same grid.  The
per-node suprema (over diffusion levels, actions, measures or shifts) are
taken in a fixed order and sums over atoms are accumulated elementwise, so the
output at a node depends only on the values its stencil reads.  This makes the
translation-invariant kinds commute with grid shifts bit for bit away from
the boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import solve_banded

from chernoffkit.functions import SmoothFunction, identity
from chernoffkit.grid import (
    CompactWindow,
    Grid1d,
    GridFunction,
    displaced,
    sample_function,
    second_difference_values,
)
from chernoffkit.sublinear import (
    AmbiguitySet,
    DiscreteMeasure,
    Penalty,
    PenaltyKind,
    check_centering,
    conjugate_of,
    wasserstein_1d,
)


class AdmissibilityError(ValueError):
    """Parameter record violates a scheme invariant; ``field`` names the culprit."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class StepKind(str, Enum):
    FD_HJB = "fd-hjb"
    EULER = "euler"
    TILT = "tilt"
    CONTROL = "control"
    WASSERSTEIN = "wasserstein"
    RESOLVENT = "resolvent"
    YOSIDA = "yosida"


@dataclass(frozen=True)
class StepMeta:
    omega: float = 0.0
    lip_growth: float = 0.0
    translation_invariant: bool = False


# ---------------------------------------------------------------- parameters


@dataclass(frozen=True, eq=False)
class FdHjbParams:
    delta: float
    sigma_max: float
    penalty: Penalty
    sigma_grid_size: int = 65
    sigma_grid: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.delta > 0:
            raise AdmissibilityError("delta must be positive", "delta")
        if not self.sigma_max > 0:
            raise AdmissibilityError("sigma_max must be positive", "sigma_max")
        if self.sigma_grid_size < 2:
            raise AdmissibilityError("sigma_grid_size must be at least 2", "sigma_grid_size")
        z = self.penalty.zero_point
        if not 0 <= z <= self.sigma_max:
            raise AdmissibilityError(
                f"penalty zero point {z} lies outside [0, sigma_max={self.sigma_max}]", "penalty"
            )
        pts = [np.linspace(0.0, self.sigma_max, int(self.sigma_grid_size)), [z]]
        if self.penalty.kind is PenaltyKind.INDICATOR:
            pts.append([b for b in self.penalty.domain if b <= self.sigma_max])
        grid = np.unique(np.concatenate(pts))
        grid.setflags(write=False)
        object.__setattr__(self, "sigma_grid", grid)

    def cfl(self, h: float) -> float:
        return self.sigma_max**2 * h / self.delta**2


@dataclass(frozen=True)
class SublinearEulerParams:
    drift: SmoothFunction
    noise_scale: float
    noise: AmbiguitySet

    def __post_init__(self):
        if not self.noise_scale >= 0:
            raise AdmissibilityError("noise_scale must be non-negative", "noise_scale")
        if self.drift.lipschitz is None or self.drift.bound is None:
            raise AdmissibilityError("drift needs a recorded Lipschitz constant and bound", "drift")
        verdict = check_centering(self.noise)
        if not verdict.passed:
            raise AdmissibilityError(
                f"noise is not centred: sup E[+-xi] = {verdict.worst_linear}", "noise"
            )

    @property
    def constant_drift(self) -> bool:
        return self.drift.lipschitz == 0


@dataclass(frozen=True)
class TiltParams:
    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise AdmissibilityError("alpha must be positive", "alpha")


@dataclass(frozen=True)
class Action:
    a: float
    b: float
    cost: float

    def __post_init__(self):
        if not (self.a >= 0 and self.cost >= 0):
            raise AdmissibilityError("actions need a >= 0 and cost >= 0", "actions")


@dataclass(frozen=True)
class ControlParams:
    actions: tuple[Action, ...]
    noise: AmbiguitySet

    def __post_init__(self):
        acts = tuple(self.actions)
        if not acts:
            raise AdmissibilityError("action list is empty", "actions")
        if not any(act.cost == 0 for act in acts):
            raise AdmissibilityError("some action must have zero cost", "actions")
        object.__setattr__(self, "actions", acts)
        verdict = check_centering(self.noise)
        if not verdict.passed:
            raise AdmissibilityError("noise is not centred", "noise")

    @property
    def superlinear_cost(self) -> bool:
        """Cost grows faster than the drift magnitude across the recorded actions."""
        big = [act for act in self.actions if abs(act.b) > 0]
        if len(big) < 2:
            return True
        ratios = sorted((abs(act.b), act.cost / abs(act.b)) for act in big)
        return ratios[-1][1] > ratios[0][1]


@dataclass(frozen=True, eq=False)
class WassersteinShiftParams:
    base_measure: DiscreteMeasure
    penalty: Penalty
    shift_grid: np.ndarray
    transport: SmoothFunction = field(default_factory=identity)
    p: float = 1.0
    # generator of the unperturbed step, (f, f', f'', x) -> values
    reference_generator: Optional[Callable] = None

    def __post_init__(self):
        lam = np.unique(np.asarray(self.shift_grid, dtype=float))
        if not np.any(lam == 0.0):
            raise AdmissibilityError("shift grid must contain 0", "shift_grid")
        if not self.penalty.superlinear:
            raise AdmissibilityError("penalty must grow superlinearly", "penalty")
        if self.penalty.zero_point != 0.0:
            raise AdmissibilityError("penalty must vanish at 0", "penalty")
        lam.setflags(write=False)
        object.__setattr__(self, "shift_grid", lam)

    @property
    def trivial_reference(self) -> bool:
        return self.transport.name == "identity" and np.array_equal(
            self.base_measure.points, [0.0]
        )


@dataclass(frozen=True, eq=False)
class ResolventSupParams:
    thetas: tuple[float, ...]
    lam: float
    delta: float

    def __post_init__(self):
        th = tuple(float(t) for t in self.thetas)
        if not th or any(t < 0 for t in th):
            raise AdmissibilityError("thetas must be a non-empty list of non-negative values", "thetas")
        if not self.lam > 0:
            raise AdmissibilityError("lambda must be positive", "lambda")
        if not self.delta > 0:
            raise AdmissibilityError("delta must be positive", "delta")
        object.__setattr__(self, "thetas", th)


# --------------------------------------------------------------- the stepper


@dataclass(frozen=True, eq=False)
class SchemeStep:
    kind: StepKind
    h: float
    params: object
    meta: StepMeta
    inner: Optional["SchemeStep"] = None
    # per-shift penalty h*phi(W_p/h) for the Wasserstein kind
    _shift_costs: Optional[np.ndarray] = field(default=None, repr=False)

    def __call__(self, f: GridFunction) -> GridFunction:
        return self.apply(f)

    def apply(self, f: GridFunction) -> GridFunction:
        fn = _APPLY[self.kind]
        return fn(self, f)

    # constructors --------------------------------------------------------

    @classmethod
    def fd_hjb(cls, p: FdHjbParams, h: float) -> "SchemeStep":
        _check_h(h)
        if p.cfl(h) > 1.0:
            raise AdmissibilityError(
                f"CFL violated: sigma_max^2 h / delta^2 = {p.cfl(h):.6g} > 1", "sigma_max"
            )
        step = cls(StepKind.FD_HJB, h, p, StepMeta(0.0, 0.0, True))
        return _probe_zero(step, Grid1d(0.0, p.delta, 21))

    @classmethod
    def sublinear_euler(cls, p: SublinearEulerParams, h: float) -> "SchemeStep":
        _check_h(h)
        meta = StepMeta(0.0, float(p.drift.lipschitz), p.constant_drift)
        return _probe_zero(cls(StepKind.EULER, h, p, meta), Grid1d(-1.0, 0.1, 21))

    @classmethod
    def exp_tilt(cls, p: TiltParams, inner: "SchemeStep") -> "SchemeStep":
        if inner.kind is not StepKind.EULER:
            raise AdmissibilityError(
                "the tilted step needs a sublinear Euler inner step", "inner"
            )
        meta = StepMeta(0.0, inner.meta.lip_growth, inner.meta.translation_invariant)
        step = cls(StepKind.TILT, inner.h, p, meta, inner=inner)
        return _probe_zero(step, Grid1d(-1.0, 0.1, 21))

    @classmethod
    def control(cls, p: ControlParams, h: float) -> "SchemeStep":
        _check_h(h)
        return _probe_zero(
            cls(StepKind.CONTROL, h, p, StepMeta(0.0, 0.0, True)), Grid1d(-1.0, 0.1, 21)
        )

    @classmethod
    def wasserstein_shift(cls, p: WassersteinShiftParams, h: float) -> "SchemeStep":
        _check_h(h)
        mu = p.base_measure
        dist = np.array([wasserstein_1d(mu, mu.shifted(lam), p.p) for lam in p.shift_grid])
        costs = h * np.asarray(p.penalty(dist / h), dtype=float)
        if not np.any(np.isfinite(costs)):
            raise AdmissibilityError("every shift carries infinite penalty", "shift_grid")
        costs.setflags(write=False)
        ell = float(p.transport.lipschitz if p.transport.lipschitz is not None else math.inf)
        if not math.isfinite(ell):
            raise AdmissibilityError("transport needs a recorded Lipschitz constant", "transport")
        meta = StepMeta(0.0, max(0.0, math.log(ell)) / h if ell > 0 else 0.0,
                        p.transport.name == "identity")
        step = cls(StepKind.WASSERSTEIN, h, p, meta, _shift_costs=costs)
        spacing = _min_positive_gap(p.shift_grid) or 0.1
        return _probe_zero(step, Grid1d(-10 * spacing, spacing, 21))

    @classmethod
    def resolvent_sup(cls, p: ResolventSupParams, h: float | None = None) -> "SchemeStep":
        h = _resolvent_h(p, h)
        step = cls(StepKind.RESOLVENT, h, p, StepMeta(0.0, 0.0, False))
        return _probe_zero(step, Grid1d(0.0, p.delta, 21))

    @classmethod
    def yosida(cls, p: ResolventSupParams, h: float | None = None) -> "SchemeStep":
        h = _resolvent_h(p, h)
        step = cls(StepKind.YOSIDA, h, p, StepMeta(0.0, 0.0, False))
        return _probe_zero(step, Grid1d(0.0, p.delta, 21))

    # diagnostics ---------------------------------------------------------

    def stencil_radius(self, grid: Grid1d) -> int:
        """Number of nodes on either side that one application may read.

        Global solves return ``grid.count``.
        """
        dx = grid.spacing
        p = self.params
        if self.kind is StepKind.FD_HJB:
            return 1
        if self.kind is StepKind.TILT:
            return self.inner.stencil_radius(grid)
        if self.kind is StepKind.EULER:
            reach = self.h * p.drift.bound + p.noise_scale * math.sqrt(self.h) * _max_atom(p.noise)
        elif self.kind is StepKind.CONTROL:
            xi = _max_atom(p.noise)
            reach = max(math.sqrt(a.a * self.h) * xi + abs(a.b) * self.h for a in p.actions)
        elif self.kind is StepKind.WASSERSTEIN:
            if not self.meta.translation_invariant:
                return grid.count
            reach = float(np.max(np.abs(p.base_measure.points))) + float(
                np.max(np.abs(p.shift_grid))
            )
        else:
            return grid.count
        return int(math.ceil(reach / dx - 1e-9)) + 1

    def describe(self) -> dict:
        out = {"kind": self.kind.value, "h": self.h}
        out.update(_describe_params(self))
        out["meta"] = {
            "omega": self.meta.omega,
            "lip_growth": self.meta.lip_growth,
            "translation_invariant": self.meta.translation_invariant,
        }
        return out


def _check_h(h: float) -> None:
    if not (h > 0 and math.isfinite(h)):
        raise AdmissibilityError(f"time step must be positive, got {h}", "h")


def _resolvent_h(p: ResolventSupParams, h: float | None) -> float:
    expected = 1.0 / p.lam
    if h is None:
        return expected
    if abs(h - expected) > 1e-12 * expected:
        raise AdmissibilityError(f"resolvent step needs h = 1/lambda = {expected}, got {h}", "h")
    return float(h)


def _probe_zero(step: SchemeStep, grid: Grid1d) -> SchemeStep:
    out = step.apply(GridFunction(grid, np.zeros(grid.count)))
    if np.any(out.values != 0.0):
        raise AdmissibilityError(f"{step.kind.value} step does not map 0 to 0", "penalty")
    return step


def _max_atom(amb: AmbiguitySet) -> float:
    return max(float(np.max(np.abs(m.points))) for m in amb.measures)


def _min_positive_gap(a: np.ndarray) -> float | None:
    d = np.diff(np.unique(a))
    return float(d.min()) if d.size else None


def _require_spacing(grid: Grid1d, delta: float, field_name: str = "delta") -> None:
    if abs(grid.spacing - delta) > 1e-12 * delta:
        raise AdmissibilityError(
            f"grid spacing {grid.spacing} does not match scheme delta {delta}", field_name
        )


# ------------------------------------------------------------ step kernels


def fd_hjb_step(p: FdHjbParams, h: float, f: GridFunction) -> GridFunction:
    _require_spacing(f.grid, p.delta)
    if p.cfl(h) > 1.0:
        raise AdmissibilityError(
            f"CFL violated: sigma_max^2 h / delta^2 = {p.cfl(h):.6g} > 1", "sigma_max"
        )
    d2 = second_difference_values(f.values, p.delta)
    sig = p.sigma_grid
    cost = np.asarray(p.penalty(sig), dtype=float)
    keep = np.isfinite(cost)
    best = None
    for s, c in zip(sig[keep].tolist(), cost[keep].tolist()):
        cand = (0.5 * s * s) * d2 - c
        best = cand if best is None else np.maximum(best, cand)
    return f.with_values(f.values + h * best)


def _euler_offsets(p: SublinearEulerParams, h: float, x: np.ndarray):
    if p.constant_drift:
        return h * float(p.drift(np.zeros(1))[0])
    return h * np.asarray(p.drift(x), dtype=float)


def _measure_reads(f: GridFunction, base_offset, measure: DiscreteMeasure, scale: float):
    """Interpolated ``f`` at ``x + base_offset + scale * atom`` for every atom."""
    return [
        displaced(f.values, f.grid.spacing, base_offset + scale * pt)
        for pt in measure.points.tolist()
    ]


def _weighted_sum(weights: np.ndarray, reads: Sequence[np.ndarray]) -> np.ndarray:
    acc = weights[0] * reads[0]
    for w, r in zip(weights[1:].tolist(), reads[1:]):
        acc = acc + w * r
    return acc


def sublinear_euler_step(p: SublinearEulerParams, h: float, f: GridFunction) -> GridFunction:
    base = _euler_offsets(p, h, f.nodes)
    scale = p.noise_scale * math.sqrt(h)
    best = None
    for m in p.noise.measures:
        val = _weighted_sum(m.weights, _measure_reads(f, base, m, scale))
        best = val if best is None else np.maximum(best, val)
    return f.with_values(best)


def exp_tilt_step(p: TiltParams, inner: SchemeStep, h: float, f: GridFunction) -> GridFunction:
    """``(1/alpha) log(inner(exp(alpha f)))``, shifted per node for stability.

    The inner step is positively homogeneous, so at each node the exponent can
    be reduced by the largest value its stencil reads; the shift is added back
    after the logarithm.
    """
    if inner.kind is not StepKind.EULER:
        raise AdmissibilityError("the tilted step needs a sublinear Euler inner step", "inner")
    q = inner.params
    alpha = p.alpha
    base = _euler_offsets(q, h, f.nodes)
    scale = q.noise_scale * math.sqrt(h)
    reads = [_measure_reads(f, base, m, scale) for m in q.noise.measures]
    top = None
    for rs in reads:
        for r in rs:
            top = r if top is None else np.maximum(top, r)
    best = None
    for m, rs in zip(q.noise.measures, reads):
        val = _weighted_sum(m.weights, [np.exp(alpha * (r - top)) for r in rs])
        best = val if best is None else np.maximum(best, val)
    if np.any(best <= 0) or not np.all(np.isfinite(best)):
        raise ArithmeticError("tilted inner expectation is not positive and finite")
    return f.with_values(top + np.log(best) / alpha)


def control_step(p: ControlParams, h: float, f: GridFunction) -> GridFunction:
    best = None
    for act in p.actions:
        scale = math.sqrt(act.a * h)
        for m in p.noise.measures:
            val = _weighted_sum(m.weights, _measure_reads(f, act.b * h, m, scale)) - act.cost * h
            best = val if best is None else np.maximum(best, val)
    return f.with_values(best)


def wasserstein_shift_step(
    p: WassersteinShiftParams, h: float, f: GridFunction, costs: np.ndarray | None = None
) -> GridFunction:
    if costs is None:
        mu = p.base_measure
        dist = np.array([wasserstein_1d(mu, mu.shifted(lam), p.p) for lam in p.shift_grid])
        costs = h * np.asarray(p.penalty(dist / h), dtype=float)
    if not np.any(np.isfinite(costs)):
        raise AdmissibilityError("every shift carries infinite penalty", "shift_grid")
    mu = p.base_measure
    if p.transport.name == "identity":
        base = 0.0
    else:
        base = np.asarray(p.transport(f.nodes), dtype=float) - f.nodes
    best = None
    for lam, c in zip(p.shift_grid.tolist(), costs.tolist()):
        if not math.isfinite(c):
            continue
        reads = _measure_reads(f, base + lam, mu, 1.0)
        val = _weighted_sum(mu.weights, reads) - c
        best = val if best is None else np.maximum(best, val)
    return f.with_values(best)


RESIDUAL_RTOL = 1e-9


def _resolvent_matrix(n: int, lam: float, theta: float, delta: float) -> np.ndarray:
    """Banded storage of ``lam - theta * Laplacian`` with pinned end rows."""
    k = theta / (delta * delta)
    ab = np.zeros((3, n))
    ab[1, :] = lam + 2.0 * k
    ab[0, 1:] = -k
    ab[2, :-1] = -k
    ab[1, 0] = ab[1, -1] = 1.0
    ab[0, 1] = 0.0
    ab[2, -2] = 0.0
    return ab


def _banded_apply(ab: np.ndarray, u: np.ndarray) -> np.ndarray:
    out = ab[1] * u
    out[:-1] += ab[0, 1:] * u[1:]
    out[1:] += ab[2, :-1] * u[:-1]
    return out


def resolvent_solve(values: np.ndarray, lam: float, theta: float, delta: float) -> np.ndarray:
    """``lam (lam - theta Laplacian)^{-1}`` applied to ``values``; end nodes pinned."""
    n = values.shape[0]
    ab = _resolvent_matrix(n, lam, theta, delta)
    rhs = lam * values
    rhs[0], rhs[-1] = values[0], values[-1]
    u = solve_banded((1, 1), ab, rhs, check_finite=False)
    resid = float(np.max(np.abs(_banded_apply(ab, u) - rhs)))
    scale = lam * float(np.max(np.abs(values)))
    if resid > RESIDUAL_RTOL * scale:
        raise ArithmeticError(f"resolvent residual {resid:.3e} exceeds {RESIDUAL_RTOL} * {scale:.3e}")
    return u


def resolvent_sup_step(p: ResolventSupParams, h: float, f: GridFunction) -> GridFunction:
    _require_spacing(f.grid, p.delta)
    best = None
    for th in p.thetas:
        u = resolvent_solve(f.values.copy(), p.lam, th, p.delta)
        best = u if best is None else np.maximum(best, u)
    return f.with_values(best)


SERIES_TAIL = 1e-12
SERIES_MAX_TERMS = 64


def yosida_exponential(values: np.ndarray, lam: float, theta: float, delta: float) -> np.ndarray:
    """``sum_k B^k f / k!`` with ``B = lam (lam - theta Laplacian)^{-1}``."""
    norm = float(np.max(np.abs(values))) if values.size else 0.0
    total = values.copy()
    term = values.copy()
    k = 0
    bound = norm
    while bound >= SERIES_TAIL:
        if k >= SERIES_MAX_TERMS:
            raise ArithmeticError(f"exponential series did not converge within {SERIES_MAX_TERMS} terms")
        term = resolvent_solve(term, lam, theta, delta) / (k + 1)
        total = total + term
        k += 1
        bound = norm / math.factorial(k + 1)
    return total


def yosida_step(p: ResolventSupParams, h: float, f: GridFunction) -> GridFunction:
    _require_spacing(f.grid, p.delta)
    best = None
    for th in p.thetas:
        u = yosida_exponential(f.values.copy(), p.lam, th, p.delta)
        best = u if best is None else np.maximum(best, u)
    return f.with_values(math.exp(-1.0) * best)


_APPLY = {
    StepKind.FD_HJB: lambda s, f: fd_hjb_step(s.params, s.h, f),
    StepKind.EULER: lambda s, f: sublinear_euler_step(s.params, s.h, f),
    StepKind.TILT: lambda s, f: exp_tilt_step(s.params, s.inner, s.h, f),
    StepKind.CONTROL: lambda s, f: control_step(s.params, s.h, f),
    StepKind.WASSERSTEIN: lambda s, f: wasserstein_shift_step(s.params, s.h, f, s._shift_costs),
    StepKind.RESOLVENT: lambda s, f: resolvent_sup_step(s.params, s.h, f),
    StepKind.YOSIDA: lambda s, f: yosida_step(s.params, s.h, f),
}


def _describe_params(step: SchemeStep) -> dict:
    p = step.params
    k = step.kind
    if k is StepKind.FD_HJB:
        return {"delta": p.delta, "sigma_max": p.sigma_max, "penalty": p.penalty.to_dict(),
                "sigma_grid_size": p.sigma_grid_size}
    if k is StepKind.EULER:
        return {"drift": p.drift.describe(), "noise_scale": p.noise_scale, "noise": p.noise.to_dict()}
    if k is StepKind.TILT:
        return {"alpha": p.alpha, "inner": step.inner.describe()}
    if k is StepKind.CONTROL:
        return {"actions": [[a.a, a.b, a.cost] for a in p.actions], "noise": p.noise.to_dict()}
    if k is StepKind.WASSERSTEIN:
        return {"transport": p.transport.describe(), "base_measure": p.base_measure.to_dict(),
                "penalty": p.penalty.to_dict(), "p": p.p,
                "shift_min": float(p.shift_grid[0]), "shift_max": float(p.shift_grid[-1]),
                "shift_count": int(p.shift_grid.size)}
    return {"thetas": list(p.thetas), "lambda": p.lam, "delta": p.delta}


# ----------------------------------------------------------- generators


@dataclass(frozen=True, eq=False)
class GeneratorDescriptor:
    """Closed form of ``A f`` in terms of ``(f, f', f'', x)`` samples."""

    kind: StepKind
    formula: Callable[[np.ndarray, np.ndarray, np.ndarray, np.ndarray], np.ndarray]
    label: str

    def evaluate(self, f0, f1, f2, x) -> np.ndarray:
        args = [np.atleast_1d(np.asarray(v, dtype=float)) for v in (f0, f1, f2, x)]
        return np.asarray(self.formula(*args), dtype=float)


def _sup_over_measures(m2: np.ndarray, coeff: np.ndarray) -> np.ndarray:
    """``max_mu E_mu[xi^2] * coeff`` for every entry of ``coeff``."""
    return np.where(coeff >= 0, m2.max() * coeff, m2.min() * coeff)


def _fd_hamiltonian(p: FdHjbParams):
    """``a -> sup_{sigma >= 0} (sigma^2 a / 2 - phi(sigma))`` in the variable ``s = sigma^2/2``."""
    pen = p.penalty
    if not pen.superquadratic:
        raise AdmissibilityError("diffusion penalty must grow faster than sigma^2", "penalty")
    lo, hi = pen.domain
    dom = (lo * lo / 2.0, hi * hi / 2.0 if math.isfinite(hi) else math.inf)
    zero = pen.zero_point**2 / 2.0

    def ham(a):
        vals, _ = conjugate_of(lambda s: pen(np.sqrt(2.0 * np.asarray(s))), dom, zero, a)
        return vals

    return ham


def generator_of(step: SchemeStep) -> GeneratorDescriptor:
    p = step.params
    k = step.kind
    if k is StepKind.FD_HJB:
        ham = _fd_hamiltonian(p)
        return GeneratorDescriptor(k, lambda f0, f1, f2, x: ham(f2), "sup_s (s f'' - phi(sqrt(2s)))")
    if k is StepKind.EULER:
        m2 = p.noise.second_moments
        d = p.noise_scale

        def euler(f0, f1, f2, x):
            return 0.5 * d * d * _sup_over_measures(m2, f2) + f1 * p.drift(x)

        return GeneratorDescriptor(k, euler, "sup_mu 1/2 d^2 E[xi^2] f'' + f' psi")
    if k is StepKind.TILT:
        q = step.inner.params
        m2 = q.noise.second_moments
        d = q.noise_scale
        gamma = p.alpha * d * d

        def tilt(f0, f1, f2, x):
            return 0.5 * _sup_over_measures(m2, d * d * f2 + gamma * f1 * f1) + f1 * q.drift(x)

        return GeneratorDescriptor(k, tilt, "sup_mu 1/2 E[xi^2] (d^2 f'' + gamma f'^2) + f' psi")
    if k is StepKind.CONTROL:
        m2 = p.noise.second_moments

        def control(f0, f1, f2, x):
            best = None
            for act in p.actions:
                val = 0.5 * act.a * _sup_over_measures(m2, f2) + act.b * f1 - act.cost
                best = val if best is None else np.maximum(best, val)
            return best

        return GeneratorDescriptor(k, control, "sup_actions 1/2 a E[xi^2] f'' + b f' - cost")
    if k is StepKind.WASSERSTEIN:
        ref = p.reference_generator
        if ref is None:
            if not p.trivial_reference:
                raise AdmissibilityError(
                    "non-trivial reference step needs an explicit reference generator",
                    "reference_generator",
                )
            ref = lambda f0, f1, f2, x: np.zeros_like(f0)
        pen = p.penalty

        def wass(f0, f1, f2, x):
            vals, _ = conjugate_of(pen, pen.domain, pen.zero_point, np.abs(f1))
            return ref(f0, f1, f2, x) + vals

        return GeneratorDescriptor(k, wass, "A0 f + phi*(|f'|)")
    thetas = p.thetas

    def heat(f0, f1, f2, x):
        return np.max(np.stack([th * f2 for th in thetas]), axis=0)

    return GeneratorDescriptor(k, heat, "sup_theta theta f''")


def hamiltonian_eval(g: GeneratorDescriptor, f: SmoothFunction, x) -> np.ndarray | float:
    """Closed-form generator value of ``g`` applied to ``f`` at ``x``."""
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    out = g.evaluate(f(xa), f.d1(xa), f.d2(xa), xa)
    if not np.all(np.isfinite(out)):
        raise ArithmeticError("generator evaluation is not finite")
    return float(out[0]) if np.ndim(x) == 0 else out


def discrete_generator(step: SchemeStep, f: SmoothFunction, grid: Grid1d) -> GridFunction:
    fhat = sample_function(f, grid)
    return fhat.with_values((step.apply(fhat).values - fhat.values) / step.h)


def generator_residual(
    step: SchemeStep,
    g: GeneratorDescriptor,
    f: SmoothFunction,
    w: CompactWindow,
    grid: Grid1d,
) -> float:
    """``sup`` over window nodes of ``|(step(f) - f)/h - A f|``."""
    disc = discrete_generator(step, f, grid)
    idx = grid.window_indices(w)
    x = grid.nodes[idx]
    exact = np.atleast_1d(hamiltonian_eval(g, f, x))
    return float(np.max(np.abs(disc.values[idx] - exact)))
