"""Independent reference solutions.

Nothing here touches the scheme code: the heat oracles integrate against the
Gaussian density, the Hopf-Lax oracle maximises directly over velocities and
the ODE oracle is a fixed-step Runge-Kutta integrator with step halving.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import simpson
from scipy.optimize import minimize_scalar

from chernoffkit.grid import CompactWindow, Grid1d, GridFunction
from chernoffkit.sublinear import Penalty

Z_CUTOFF = 8.0
Z_MESH = 1e-3


@dataclass(frozen=True, eq=False)
class OracleResult:
    x: np.ndarray
    values: np.ndarray
    method: str
    resolution: dict = field(default_factory=dict)

    def to_csv(self, path) -> None:
        from chernoffkit.io import write_grid_csv

        write_grid_csv(path, self.x, self.values)

    def as_grid_function(self, grid: Grid1d, window: CompactWindow) -> GridFunction:
        """Grid function equal to the oracle on window nodes and NaN-free zero elsewhere."""
        vals = np.zeros(grid.count)
        vals[grid.window_indices(window)] = self.values
        return GridFunction(grid, vals)


def _window_nodes(w: CompactWindow, grid: Grid1d) -> np.ndarray:
    return grid.nodes[grid.window_indices(w)]


def _gaussian_average(f: Callable, x: np.ndarray, scale: float) -> np.ndarray:
    n = int(round(2 * Z_CUTOFF / Z_MESH))
    z = np.linspace(-Z_CUTOFF, Z_CUTOFF, n + 1)
    dens = np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
    out = np.empty_like(x)
    for i, xi in enumerate(x.tolist()):
        out[i] = simpson(np.asarray(f(xi + scale * z), dtype=float) * dens, x=z)
    return out


def gaussian_heat(
    f: Callable, sigma: float, t: float, w: CompactWindow, grid: Grid1d
) -> OracleResult:
    """``E[f(x + sigma W_t)]`` on the window nodes by Simpson quadrature in ``z``."""
    if sigma < 0 or t < 0:
        raise ValueError("sigma and t must be non-negative")
    x = _window_nodes(w, grid)
    scale = sigma * math.sqrt(t)
    vals = np.asarray(f(x), dtype=float) * np.ones_like(x) if scale == 0 else _gaussian_average(f, x, scale)
    return OracleResult(
        x, vals, "gaussian-heat",
        {"z_cutoff": Z_CUTOFF, "z_mesh": Z_MESH, "x_mesh": Z_MESH * scale, "consumer_spacing": grid.spacing},
    )


def g_heat_convex(
    f: Callable,
    sigma_lo: float,
    sigma_hi: float,
    t: float,
    w: CompactWindow,
    grid: Grid1d,
) -> OracleResult:
    """G-heat solution for convex data: Gaussian heat at the largest volatility."""
    if not 0 <= sigma_lo <= sigma_hi:
        raise ValueError("need 0 <= sigma_lo <= sigma_hi")
    reach = Z_CUTOFF * sigma_hi * math.sqrt(max(t, 0.0))
    y = np.linspace(w.lo - reach, w.hi + reach, 4001)
    fy = np.asarray(f(y), dtype=float) * np.ones_like(y)
    mid = 0.5 * (fy[:-2] + fy[2:]) - fy[1:-1]
    if np.any(mid < -1e-12 * max(1.0, float(np.max(np.abs(fy))))):
        i = int(np.argmin(mid)) + 1
        raise ValueError(f"data is not convex near x={y[i]!r}")
    res = gaussian_heat(f, sigma_hi, t, w, grid)
    return OracleResult(res.x, res.values, "g-heat-convex", dict(res.resolution, sigma=sigma_hi))


def hopf_lax(
    f: Callable,
    p: Penalty,
    t: float,
    x: float,
    y_window: CompactWindow,
    mesh: float,
) -> float:
    """``sup_y f(x + t y) - t phi(y)`` by brute force plus one bounded refinement."""
    if t == 0:
        return float(f(np.array([x]))[0])
    y = np.arange(y_window.lo, y_window.hi + 0.5 * mesh, mesh)
    pen = np.asarray(p(np.abs(y)), dtype=float)
    vals = np.asarray(f(x + t * y), dtype=float) - t * pen
    i = int(np.argmax(vals))
    if i == 0 or i == y.size - 1:
        raise ValueError(f"Hopf-Lax maximiser at the edge of the y-window at x={x!r}; enlarge y_window")
    best = float(vals[i])
    obj = lambda yy: -(float(f(np.array([x + t * yy]))[0]) - t * float(p(abs(yy))))
    res = minimize_scalar(obj, bounds=(float(y[i - 1]), float(y[i + 1])), method="bounded",
                          options={"xatol": 1e-12})
    return max(best, float(-res.fun))


def large_deviations_limit(
    f: Callable, p: Penalty, t: float, w: CompactWindow, grid: Grid1d,
    y_window: CompactWindow | None = None, mesh: float = 1e-3,
) -> OracleResult:
    """Hopf-Lax values on the window nodes."""
    yw = y_window or CompactWindow(-6.0, 6.0)
    x = _window_nodes(w, grid)
    vals = np.array([hopf_lax(f, p, t, float(xi), yw, mesh) for xi in x.tolist()])
    return OracleResult(x, vals, "hopf-lax", {"y_mesh": mesh, "y_window": [yw.lo, yw.hi]})


def rate_function_rademacher(y):
    """Legendre transform of ``z -> z^2/2``: the Rademacher rate function ``y^2/2``."""
    y = np.asarray(y, dtype=float)
    return 0.5 * y * y


def _rk4(psi: Callable, t: float, x: np.ndarray, steps: int) -> np.ndarray:
    dt = t / steps
    u = x.astype(float).copy()
    for _ in range(steps):
        k1 = psi(u)
        k2 = psi(u + 0.5 * dt * k1)
        k3 = psi(u + 0.5 * dt * k2)
        k4 = psi(u + dt * k3)
        u = u + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return u


MAX_HALVINGS = 20


def ode_flow(psi: Callable, t: float, x, rtol: float = 1e-10):
    """Solution at time ``t`` of ``u' = psi(u)``, ``u(0) = x`` (vectorised in ``x``)."""
    if t < 0:
        raise ValueError("t must be non-negative")
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if t == 0:
        return float(xa[0]) if np.ndim(x) == 0 else xa.copy()
    g = lambda u: np.asarray(psi(u), dtype=float) * np.ones_like(u)
    steps = max(1, int(math.ceil(t / 0.1)))
    prev = _rk4(g, t, xa, steps)
    for _ in range(MAX_HALVINGS):
        steps *= 2
        cur = _rk4(g, t, xa, steps)
        if np.all(np.abs(cur - prev) <= rtol * np.maximum(1.0, np.abs(cur))):
            return float(cur[0]) if np.ndim(x) == 0 else cur
        prev = cur
    raise ArithmeticError(f"ODE flow did not converge after {MAX_HALVINGS} halvings")
