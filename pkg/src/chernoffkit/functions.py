"""Named closed-form test functions with first and second derivatives.

Used as initial data, generator probes and drift fields.  Every entry is
vectorised over numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class SmoothFunction:
    name: str
    f: Callable[[np.ndarray], np.ndarray]
    d1: Callable[[np.ndarray], np.ndarray]
    d2: Callable[[np.ndarray], np.ndarray]
    params: dict = field(default_factory=dict)
    # global Lipschitz constant and sup bound when known (needed for drifts)
    lipschitz: float | None = None
    bound: float | None = None
    convex: bool = False

    def __call__(self, x):
        return self.f(np.asarray(x, dtype=float))

    def describe(self) -> dict:
        return {"name": self.name, "params": dict(self.params)}


def _const(c: float):
    return lambda x: np.full_like(np.asarray(x, dtype=float), c)


def gaussian_bump(height: float = 1.0, center: float = 0.0, width: float = 1.0) -> SmoothFunction:
    """``height * exp(-((x - center) / width)**2)``."""
    s2 = width * width

    def f(x):
        return height * np.exp(-((x - center) ** 2) / s2)

    def d1(x):
        return -2.0 * (x - center) / s2 * f(x)

    def d2(x):
        u = x - center
        return (4.0 * u * u / (s2 * s2) - 2.0 / s2) * f(x)

    p = {"height": height, "center": center, "width": width}
    return SmoothFunction("gaussian-bump", f, d1, d2, p, bound=abs(height))


def modulated_gaussian(
    frequency: float = 1.0, center: float = 0.0, scale: float = 8.0
) -> SmoothFunction:
    """``sin(frequency (x - center)) * exp(-(x - center)**2 / scale)``."""
    w = frequency

    def parts(x):
        u = x - center
        e = np.exp(-u * u / scale)
        return u, np.sin(w * u), np.cos(w * u), e

    def f(x):
        _, s, _, e = parts(x)
        return s * e

    def d1(x):
        u, s, c, e = parts(x)
        return (w * c - 2.0 * u / scale * s) * e

    def d2(x):
        u, s, c, e = parts(x)
        g = -2.0 * u / scale
        return ((-w * w + g * g - 2.0 / scale) * s + 2.0 * w * g * c) * e

    p = {"frequency": frequency, "center": center, "scale": scale}
    return SmoothFunction("modulated-gaussian", f, d1, d2, p, bound=1.0)


def quadratic(coef: float = 1.0, center: float = 0.0) -> SmoothFunction:
    """``coef * (x - center)**2``; convex for ``coef >= 0``."""

    def f(x):
        return coef * (x - center) ** 2

    def d1(x):
        return 2.0 * coef * (x - center)

    return SmoothFunction(
        "quadratic", f, d1, _const(2.0 * coef), {"coef": coef, "center": center}, convex=coef >= 0
    )


def constant(value: float = 0.0) -> SmoothFunction:
    return SmoothFunction(
        "constant", _const(value), _const(0.0), _const(0.0), {"value": value}, 0.0, abs(value), True
    )


def clipped_linear(slope: float = 1.0, lo: float = -1.0, hi: float = 1.0) -> SmoothFunction:
    """``slope * clip(x, lo, hi)``; derivatives are taken away from the kinks."""

    def f(x):
        return slope * np.clip(x, lo, hi)

    def d1(x):
        return np.where((x > lo) & (x < hi), slope, 0.0)

    bound = abs(slope) * max(abs(lo), abs(hi))
    p = {"slope": slope, "lo": lo, "hi": hi}
    return SmoothFunction("clipped-linear", f, d1, _const(0.0), p, abs(slope), bound)


def tanh_drift(amplitude: float = 1.0, center: float = 0.0) -> SmoothFunction:
    """``amplitude * tanh(x - center)``, Lipschitz constant ``|amplitude|``."""

    def f(x):
        return amplitude * np.tanh(x - center)

    def d1(x):
        return amplitude / np.cosh(x - center) ** 2

    def d2(x):
        t = np.tanh(x - center)
        return -2.0 * amplitude * t * (1.0 - t * t)

    p = {"amplitude": amplitude, "center": center}
    return SmoothFunction("tanh", f, d1, d2, p, abs(amplitude), abs(amplitude))


def sine_drift(amplitude: float = 1.0, frequency: float = 1.0) -> SmoothFunction:
    def f(x):
        return amplitude * np.sin(frequency * x)

    def d1(x):
        return amplitude * frequency * np.cos(frequency * x)

    def d2(x):
        return -amplitude * frequency**2 * np.sin(frequency * x)

    p = {"amplitude": amplitude, "frequency": frequency}
    return SmoothFunction("sine", f, d1, d2, p, abs(amplitude * frequency), abs(amplitude))


def identity() -> SmoothFunction:
    return SmoothFunction("identity", lambda x: np.asarray(x, dtype=float), _const(1.0), _const(0.0), {}, 1.0)


LIBRARY: dict[str, Callable[..., SmoothFunction]] = {
    "gaussian-bump": gaussian_bump,
    "modulated-gaussian": modulated_gaussian,
    "quadratic": quadratic,
    "constant": constant,
    "clipped-linear": clipped_linear,
    "tanh": tanh_drift,
    "sine": sine_drift,
    "identity": identity,
}


def named(name: str, **params) -> SmoothFunction:
    try:
        factory = LIBRARY[name]
    except KeyError:
        raise ValueError(f"unknown function {name!r}; choose from {sorted(LIBRARY)}") from None
    return factory(**params)


def probe_functions() -> list[SmoothFunction]:
    """Eight fixed smooth probes used to compare generators."""
    return [
        gaussian_bump(1.0, 0.0, 1.0),
        gaussian_bump(0.5, 0.7, 0.6),
        gaussian_bump(-1.0, -0.5, 1.5),
        gaussian_bump(2.0, 1.2, 2.5),
        modulated_gaussian(1.0, 0.0, 8.0),
        modulated_gaussian(2.0, 0.3, 4.0),
        modulated_gaussian(0.5, -1.0, 2.0),
        modulated_gaussian(3.0, 0.5, 6.0),
    ]
