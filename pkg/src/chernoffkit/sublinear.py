"""Sublinear expectations, convex penalties, conjugates and 1-D transport distances."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

WEIGHT_SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Finitely supported probability measure on the real line."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).ravel()
        wts = np.array(self.weights, dtype=float).ravel()
        if pts.size == 0 or pts.shape != wts.shape:
            raise ValueError("measure needs matching non-empty points and weights")
        if not (np.all(np.isfinite(pts)) and np.all(np.isfinite(wts))):
            raise ValueError("measure atoms must be finite")
        if np.any(wts <= 0):
            raise ValueError("measure weights must be positive")
        if abs(wts.sum() - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(f"measure weights sum to {wts.sum()!r}, not 1")
        if np.any(np.diff(pts) <= 0):
            raise ValueError("measure points must be strictly increasing")
        pts.setflags(write=False)
        wts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", wts)

    @classmethod
    def from_atoms(cls, atoms: Sequence[tuple[float, float]]) -> "DiscreteMeasure":
        pairs = sorted((float(p), float(w)) for p, w in atoms)
        return cls([p for p, _ in pairs], [w for _, w in pairs])

    @classmethod
    def dirac(cls, x: float = 0.0) -> "DiscreteMeasure":
        return cls([x], [1.0])

    @classmethod
    def rademacher(cls, scale: float = 1.0) -> "DiscreteMeasure":
        s = abs(float(scale))
        if s == 0:
            return cls.dirac(0.0)
        return cls([-s, s], [0.5, 0.5])

    def moment(self, g: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.dot(self.weights, g(self.points)))

    def shifted(self, lam: float) -> "DiscreteMeasure":
        return DiscreteMeasure(self.points + lam, self.weights)

    def __eq__(self, other):
        return (
            isinstance(other, DiscreteMeasure)
            and np.array_equal(self.points, other.points)
            and np.array_equal(self.weights, other.weights)
        )

    def __hash__(self):
        return hash((self.points.tobytes(), self.weights.tobytes()))

    def to_dict(self) -> dict:
        return {"points": [float(p) for p in self.points], "weights": [float(w) for w in self.weights]}


@dataclass(frozen=True)
class AmbiguitySet:
    measures: tuple[DiscreteMeasure, ...]

    def __post_init__(self):
        ms = tuple(self.measures)
        if not ms:
            raise ValueError("ambiguity set must contain at least one measure")
        for m in ms:
            if not isinstance(m, DiscreteMeasure):
                raise TypeError("ambiguity set members must be DiscreteMeasure")
        object.__setattr__(self, "measures", ms)

    @classmethod
    def single(cls, m: DiscreteMeasure) -> "AmbiguitySet":
        return cls((m,))

    @property
    def second_moments(self) -> np.ndarray:
        return np.array([m.moment(np.square) for m in self.measures])

    def to_dict(self) -> dict:
        return {"measures": [m.to_dict() for m in self.measures]}


def expect_sublinear(amb: AmbiguitySet, g: Callable) -> float:
    """``max`` over the measures of ``sum(weight * g(point))``."""
    best = -math.inf
    for m in amb.measures:
        vals = np.asarray(g(m.points), dtype=float) * np.ones_like(m.points)
        bad = np.flatnonzero(~np.isfinite(vals))
        if bad.size:
            raise ValueError(f"g is not finite at atom {m.points[bad[0]]!r}")
        best = max(best, float(np.dot(m.weights, vals)))
    return best


@dataclass(frozen=True)
class CenteringVerdict:
    passed: bool
    worst_linear: float
    mean: float
    second_moment: float
    third_abs_moment: float


def check_centering(amb: AmbiguitySet, tol: float = 1e-12) -> CenteringVerdict:
    """Check ``E[a xi] <= tol`` for ``a = +1, -1`` and report upper moments."""
    up = expect_sublinear(amb, lambda x: x)
    down = expect_sublinear(amb, lambda x: -x)
    worst = max(up, down)
    return CenteringVerdict(
        passed=worst <= tol,
        worst_linear=worst,
        mean=up,
        second_moment=expect_sublinear(amb, np.square),
        third_abs_moment=expect_sublinear(amb, lambda x: np.abs(x) ** 3),
    )


class PenaltyKind(str, Enum):
    INDICATOR = "indicator"
    POWER = "power"
    QUADRATIC = "quadratic"


@dataclass(frozen=True)
class Penalty:
    """Convex penalty on a half-line or interval, with a zero point.

    ``indicator``: 0 on ``[lo, hi]`` and ``+inf`` elsewhere.
    ``power``: ``c * b**q`` for ``b >= 0``.
    ``quadratic``: ``c * b**2`` for ``b >= 0``.
    """

    kind: PenaltyKind
    lo: float = 0.0
    hi: float = 0.0
    c: float = 1.0
    q: float = 2.0

    def __post_init__(self):
        kind = PenaltyKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is PenaltyKind.INDICATOR:
            if not (0 <= self.lo <= self.hi and math.isfinite(self.hi)):
                raise ValueError(f"indicator needs 0 <= lo <= hi < inf, got [{self.lo}, {self.hi}]")
        else:
            if not self.c > 0:
                raise ValueError("penalty coefficient c must be positive")
            if kind is PenaltyKind.POWER and not self.q > 1:
                raise ValueError("power penalty needs q > 1")

    @classmethod
    def indicator(cls, lo: float, hi: float) -> "Penalty":
        return cls(PenaltyKind.INDICATOR, lo=float(lo), hi=float(hi))

    @classmethod
    def power(cls, c: float, q: float) -> "Penalty":
        return cls(PenaltyKind.POWER, c=float(c), q=float(q))

    @classmethod
    def quadratic(cls, c: float) -> "Penalty":
        return cls(PenaltyKind.QUADRATIC, c=float(c), q=2.0)

    @property
    def domain(self) -> tuple[float, float]:
        if self.kind is PenaltyKind.INDICATOR:
            return (self.lo, self.hi)
        return (0.0, math.inf)

    @property
    def zero_point(self) -> float:
        return self.lo if self.kind is PenaltyKind.INDICATOR else 0.0

    @property
    def superquadratic(self) -> bool:
        """Whether ``phi(b) / b**2 -> inf``."""
        return self.kind is PenaltyKind.INDICATOR or (
            self.kind is PenaltyKind.POWER and self.q > 2
        )

    @property
    def superlinear(self) -> bool:
        """Whether ``phi(b) / b -> inf``."""
        return True

    def __call__(self, b):
        b = np.asarray(b, dtype=float)
        lo, hi = self.domain
        inside = (b >= lo) & (b <= hi)
        if self.kind is PenaltyKind.INDICATOR:
            vals = np.zeros_like(b)
        else:
            vals = self.c * np.abs(b) ** self.q
        out = np.where(inside, vals, np.inf)
        return out if out.ndim else float(out)

    def to_dict(self) -> dict:
        if self.kind is PenaltyKind.INDICATOR:
            return {"kind": "indicator", "lo": self.lo, "hi": self.hi}
        if self.kind is PenaltyKind.POWER:
            return {"kind": "power", "c": self.c, "q": self.q}
        return {"kind": "quadratic", "c": self.c}


@dataclass(frozen=True, eq=False)
class ConjugateTable:
    penalty: Penalty
    a: np.ndarray
    phi_star: np.ndarray
    argmax_b: np.ndarray = field(repr=False)

    def rows(self):
        return zip(self.a.tolist(), self.phi_star.tolist(), self.argmax_b.tolist())

    def to_csv(self, path) -> None:
        from chernoffkit.io import write_csv

        write_csv(path, ["a", "phi_star", "argmax_b"], list(self.rows()))


COARSE_POINTS = 257
GOLDEN_TOL = 1e-10
MAX_DOUBLINGS = 60


def _search_bound(obj: Callable, start: float, a: float) -> float:
    """Double ``B`` until the objective has dropped on two consecutive doublings."""
    b = max(1.0, 2.0 * start)
    prev = float(obj(b))
    drops = 0
    for _ in range(MAX_DOUBLINGS):
        nxt = float(obj(2.0 * b))
        b *= 2.0
        drops = drops + 1 if nxt < prev else 0
        if drops >= 2:
            return b
        prev = nxt
    raise ValueError(f"conjugate supremum appears unbounded at a={a!r}")


def maximize_concave(
    obj: Callable,
    lo: float,
    hi: float,
    anchor: float,
    refine_iters: int = 200,
    coarse: int = COARSE_POINTS,
) -> tuple[float, float]:
    """Maximise a concave scalar function on ``[lo, hi]``.

    ``obj`` must accept arrays.  Coarse grid search (always containing
    ``anchor``) then bounded Brent refinement (golden-section steps with
    parabolic acceleration) on the bracket around the discrete argmax.
    Returns ``(best_value, argmax)``.
    """
    grid = np.unique(np.concatenate((np.linspace(lo, hi, coarse), [anchor])))
    vals = np.asarray(obj(grid), dtype=float)
    i = int(np.argmax(vals))
    best_b, best_v = float(grid[i]), float(vals[i])
    left, right = float(grid[max(i - 1, 0)]), float(grid[min(i + 1, grid.size - 1)])
    if refine_iters > 0 and right > left:
        res = minimize_scalar(
            lambda b: -float(obj(b)),
            bounds=(left, right),
            method="bounded",
            options={"xatol": GOLDEN_TOL, "maxiter": int(refine_iters)},
        )
        if -res.fun > best_v:
            best_v, best_b = float(-res.fun), float(res.x)
    return best_v, best_b


def conjugate_of(
    fn: Callable,
    domain: tuple[float, float],
    zero_point: float,
    a_values,
    refine_iters: int = 200,
) -> tuple[np.ndarray, np.ndarray]:
    """``sup_b (a b - fn(b))`` over ``domain`` for each ``a``; returns values and maximisers.

    ``fn`` must accept arrays.
    """
    a_arr = np.atleast_1d(np.asarray(a_values, dtype=float))
    if not np.all(np.isfinite(a_arr)):
        raise ValueError("a-grid must be finite")
    lo, hi = domain
    vals = np.empty_like(a_arr)
    args = np.empty_like(a_arr)
    for j, a in enumerate(a_arr.tolist()):
        obj = lambda b, a=a: a * np.asarray(b, dtype=float) - fn(b)
        upper = hi if math.isfinite(hi) else _search_bound(obj, max(lo, zero_point), a)
        vals[j], args[j] = maximize_concave(obj, lo, upper, zero_point, refine_iters)
    # normalise signed zeros so serialised tables never show -0
    return vals + 0.0, args + 0.0


def convex_conjugate(p: Penalty, a_grid, refine_iters: int = 200) -> ConjugateTable:
    """Tabulate ``phi*(a) = sup_b (a b - phi(b))`` with its maximisers."""
    a_arr = np.atleast_1d(np.asarray(a_grid, dtype=float))
    vals, args = conjugate_of(p, p.domain, p.zero_point, a_arr, refine_iters)
    return ConjugateTable(p, a_arr, vals, args)


def _quantile_function(m: DiscreteMeasure):
    return np.cumsum(m.weights), m.points


def wasserstein_1d(mu: DiscreteMeasure, nu: DiscreteMeasure, p: float = 1.0) -> float:
    """``W_p`` between two discrete measures via the monotone (quantile) coupling."""
    if p < 1:
        raise ValueError("p must be >= 1")
    cu, pu = _quantile_function(mu)
    cv, pv = _quantile_function(nu)
    breaks = np.unique(np.concatenate(([0.0], cu, cv)))
    breaks = breaks[breaks <= 1.0]
    if breaks[-1] < 1.0:
        breaks = np.append(breaks, 1.0)
    mids = 0.5 * (breaks[:-1] + breaks[1:])
    widths = np.diff(breaks)
    qu = pu[np.minimum(np.searchsorted(cu, mids), pu.size - 1)]
    qv = pv[np.minimum(np.searchsorted(cv, mids), pv.size - 1)]
    total = float(np.sum(widths * np.abs(qu - qv) ** p))
    return total ** (1.0 / p)
