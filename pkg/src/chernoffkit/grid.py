"""Uniform one-dimensional lattices and weighted sup-norms.

Grid functions are extended beyond the lattice by constant continuation of
the boundary value; every stencil and interpolation routine in the package
goes through the index helpers defined here so that this convention is
applied in exactly one place.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

# relative tolerance when deciding whether two node coordinates coincide
_NODE_MATCH_RTOL = 1e-9


@dataclass(frozen=True)
class Grid1d:
    """Nodes ``origin + i * spacing`` for ``0 <= i < count``."""

    origin: float
    spacing: float
    count: int

    def __post_init__(self):
        if not (self.spacing > 0 and math.isfinite(self.spacing)):
            raise ValueError(f"grid spacing must be positive, got {self.spacing}")
        if int(self.count) != self.count or self.count < 3:
            raise ValueError(f"grid needs at least 3 nodes, got {self.count}")
        if not math.isfinite(self.origin):
            raise ValueError("grid origin must be finite")

    @classmethod
    def from_span(cls, lo: float, hi: float, spacing: float) -> "Grid1d":
        """Grid starting at ``lo`` whose last node is the largest one not beyond ``hi``.

        ``hi - lo`` should be an integer multiple of ``spacing``; a remainder
        smaller than ``1e-9 * spacing`` is absorbed.
        """
        n = (hi - lo) / spacing
        cells = int(math.floor(n + 1e-9))
        return cls(float(lo), float(spacing), cells + 1)

    @property
    def nodes(self) -> np.ndarray:
        return self.origin + self.spacing * np.arange(self.count, dtype=float)

    @property
    def lo(self) -> float:
        return self.origin

    @property
    def hi(self) -> float:
        return self.origin + self.spacing * (self.count - 1)

    def index_of(self, x: float) -> int:
        """Index of the node at ``x``; raises if ``x`` is not a node."""
        u = (x - self.origin) / self.spacing
        i = int(round(u))
        if abs(u - i) > _NODE_MATCH_RTOL * max(1.0, abs(u)) or not 0 <= i < self.count:
            raise ValueError(f"{x} is not a node of {self}")
        return i

    def window_indices(self, window: "CompactWindow") -> np.ndarray:
        """Indices of the nodes lying in ``[window.lo, window.hi]``."""
        if window.lo < self.lo - 1e-12 or window.hi > self.hi + 1e-12:
            raise ValueError(
                f"window [{window.lo}, {window.hi}] outside grid span [{self.lo}, {self.hi}]"
            )
        tol = _NODE_MATCH_RTOL * self.spacing
        i0 = int(math.ceil((window.lo - self.origin - tol) / self.spacing))
        i1 = int(math.floor((window.hi - self.origin + tol) / self.spacing))
        return np.arange(max(i0, 0), min(i1, self.count - 1) + 1)


class KappaKind(str, Enum):
    CONSTANT = "constant"
    POLYNOMIAL = "polynomial"


@dataclass(frozen=True)
class WeightKappa:
    """Bounded positive weight; ``constant`` or ``(1 + x^2)^(-p/2)``.

    ``c_kappa`` is the exact value of ``sup_x sup_{|y|<=1} kappa(x)/kappa(x-y)``.
    For the polynomial weight the inner ratio ``(1+(x+1)^2)/(1+x^2)`` peaks at
    ``x = (sqrt(5)-1)/2`` with value ``(3+sqrt(5))/2``.
    """

    kind: KappaKind = KappaKind.CONSTANT
    p: float = 0.0
    c_kappa: float = field(init=False)

    def __post_init__(self):
        kind = KappaKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is KappaKind.CONSTANT:
            c = 1.0
        else:
            if not self.p > 0:
                raise ValueError("polynomial weight needs p > 0")
            c = ((3.0 + math.sqrt(5.0)) / 2.0) ** (self.p / 2.0)
        object.__setattr__(self, "c_kappa", c)

    @classmethod
    def constant(cls) -> "WeightKappa":
        return cls(KappaKind.CONSTANT)

    @classmethod
    def polynomial(cls, p: float) -> "WeightKappa":
        return cls(KappaKind.POLYNOMIAL, p)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind is KappaKind.CONSTANT:
            return np.ones_like(x)
        return (1.0 + x * x) ** (-self.p / 2.0)

    def sampled_c_kappa(self, x: np.ndarray, ys: np.ndarray) -> float:
        """Estimate of ``c_kappa`` from the sample points ``x`` and shifts ``ys``."""
        ratios = self(x)[:, None] / self(x[:, None] - ys[None, :])
        return float(ratios.max())


@dataclass(frozen=True)
class CompactWindow:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"window needs lo < hi, got [{self.lo}, {self.hi}]")

    def widened(self, margin: float) -> "CompactWindow":
        return CompactWindow(self.lo - margin, self.hi + margin)

    def check_inside(self, grid: Grid1d, margin: float = 0.0) -> None:
        """Raise unless the window widened by ``margin`` fits in the grid span."""
        if self.lo - margin < grid.lo - 1e-12 or self.hi + margin > grid.hi + 1e-12:
            raise ValueError(
                f"window [{self.lo}, {self.hi}] with margin {margin} does not fit "
                f"in grid span [{grid.lo}, {grid.hi}]"
            )


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: Grid1d
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.count,):
            raise ValueError(f"expected {self.grid.count} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            bad = int(np.flatnonzero(~np.isfinite(v))[0])
            raise ValueError(f"non-finite value at node {bad} (x={self.grid.nodes[bad]})")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.grid, values)

    def __add__(self, other):
        if isinstance(other, GridFunction):
            _same_grid(self, other)
            return self.with_values(self.values + other.values)
        return self.with_values(self.values + float(other))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, GridFunction):
            _same_grid(self, other)
            return self.with_values(self.values - other.values)
        return self.with_values(self.values - float(other))

    def __mul__(self, c):
        return self.with_values(self.values * float(c))

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)

    def at(self, x: float) -> float:
        return float(self.values[self.grid.index_of(x)])

    def to_csv(self, path) -> None:
        from chernoffkit.io import write_grid_csv

        write_grid_csv(path, self.nodes, self.values)


def _same_grid(f: GridFunction, g: GridFunction) -> None:
    if f.grid != g.grid:
        raise ValueError("grid functions live on different grids")


def sample_function(g: Callable, grid: Grid1d) -> GridFunction:
    """Evaluate ``g`` at every node; ``g`` may be vectorised or scalar."""
    x = grid.nodes
    try:
        values = np.asarray(g(x), dtype=float)
        if values.shape != x.shape:
            values = np.broadcast_to(values, x.shape).astype(float)
    except (TypeError, ValueError):
        values = np.array([float(g(xi)) for xi in x])
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        i = int(bad[0])
        raise ValueError(f"function is not finite at node {i} (x={x[i]!r})")
    return GridFunction(grid, values)


def kappa_norm(f: GridFunction, k: WeightKappa | None = None) -> float:
    k = k or WeightKappa.constant()
    w = np.abs(f.values) * k(f.nodes)
    return _ordered_max(w)


def sup_norm_on_window(f: GridFunction, g: GridFunction, w: CompactWindow) -> float:
    _same_grid(f, g)
    idx = f.grid.window_indices(w)
    return _ordered_max(np.abs(f.values[idx] - g.values[idx]))


def _ordered_max(a: np.ndarray) -> float:
    # max is exact in floating point, so order does not affect the result
    return float(a.max()) if a.size else 0.0


def extended_take(values: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """``values[idx]`` with indices clipped to the lattice (constant continuation)."""
    return values[np.clip(idx, 0, values.shape[0] - 1)]


def second_difference_values(values: np.ndarray, spacing: float) -> np.ndarray:
    padded = np.concatenate(([values[0]], values, [values[-1]]))
    return (padded[2:] - 2.0 * padded[1:-1] + padded[:-2]) / (spacing * spacing)


def second_central_difference(f: GridFunction) -> GridFunction:
    return f.with_values(second_difference_values(f.values, f.grid.spacing))


def shift(f: GridFunction, steps: int) -> GridFunction:
    """``(shift f)(x_i) = f(x_{i+steps})`` with constant continuation."""
    steps = int(steps)
    if abs(steps) >= f.grid.count:
        raise ValueError(f"|steps| = {abs(steps)} must be below node count {f.grid.count}")
    idx = np.arange(f.grid.count) + steps
    return f.with_values(extended_take(f.values, idx))


def lipschitz_estimate(f: GridFunction) -> float:
    return _ordered_max(np.abs(np.diff(f.values)) / f.grid.spacing)


def displaced(values: np.ndarray, spacing: float, offsets) -> np.ndarray:
    """Values of the piecewise-linear interpolant at ``node_i + offsets[i]``.

    Works in index space: node ``i`` reads ``(1-theta) f[i+j] + theta f[i+j+1]``
    with ``j = floor(offset/spacing)``.  A common scalar offset therefore yields
    the same weights at every node, which keeps the operation exactly
    shift-equivariant away from the boundary.  Beyond the lattice the boundary
    value is continued.
    """
    n = values.shape[0]
    u = np.asarray(offsets, dtype=float) / spacing
    j = np.floor(u)
    theta = u - j
    base = np.arange(n) + j.astype(np.int64)
    lo = extended_take(values, base)
    if np.ndim(theta) == 0:
        if theta == 0.0:
            return lo
        hi = extended_take(values, base + 1)
        return (1.0 - theta) * lo + theta * hi
    hi = extended_take(values, base + 1)
    out = (1.0 - theta) * lo + theta * hi
    exact = theta == 0.0
    if exact.any():
        out[exact] = lo[exact]
    return out


@dataclass
class MixedConvergenceReport:
    kappa_norms: list[float]
    bounded: bool
    # distances[n][m]: sup distance of fs[n] to the target on windows[m]
    distances: list[list[float]]
    decreasing: list[bool]

    @property
    def sup_kappa_norm(self) -> float:
        return max(self.kappa_norms)


def _values_at_nodes(target, x: np.ndarray) -> np.ndarray:
    if isinstance(target, GridFunction):
        g = target.grid
        u = (x - g.origin) / g.spacing
        i = np.rint(u)
        if np.any(np.abs(u - i) > _NODE_MATCH_RTOL * np.maximum(1.0, np.abs(u))) or np.any(
            (i < 0) | (i >= g.count)
        ):
            raise ValueError("window nodes are not shared with the target grid")
        return target.values[i.astype(np.int64)]
    return np.asarray(target(x), dtype=float) * np.ones_like(x)


def mixed_convergence_check(
    fs: Sequence[GridFunction],
    target,
    windows: Sequence[CompactWindow],
    k: WeightKappa | None = None,
    bound: float = math.inf,
) -> MixedConvergenceReport:
    """Sequential mixed-topology diagnostic.

    Checks that ``sup_n ||fs[n]||_kappa <= bound`` and reports, for every
    window, the sup distance between ``fs[n]`` and ``target`` on the nodes of
    ``fs[n]`` inside that window.  ``target`` is a grid function whose nodes
    include those window nodes, or a vectorised callable.
    """
    if len(fs) == 0:
        raise ValueError("empty sequence")
    norms = [kappa_norm(f, k) for f in fs]
    distances = []
    for f in fs:
        row = []
        for w in windows:
            idx = f.grid.window_indices(w)
            x = f.nodes[idx]
            row.append(_ordered_max(np.abs(f.values[idx] - _values_at_nodes(target, x))))
        distances.append(row)
    decreasing = []
    for m in range(len(windows)):
        col = [d[m] for d in distances]
        decreasing.append(all(b <= a for a, b in zip(col, col[1:])))
    return MixedConvergenceReport(norms, max(norms) <= bound, distances, decreasing)
