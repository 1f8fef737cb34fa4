"""Experiment configuration: parsing, validation and resolution into scheme objects.

The grammar is documented in ``docs/CONFIG.md``.  Resolution expands every
rule into explicit per-level numbers; the resolved dictionary is echoed in
each report so a run can be reproduced from its output alone.
"""

from __future__ import annotations

import copy
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10
    import tomli as tomllib

from chernoffkit import functions
from chernoffkit.grid import CompactWindow, Grid1d
from chernoffkit.operators import (
    Action,
    AdmissibilityError,
    ControlParams,
    FdHjbParams,
    ResolventSupParams,
    SchemeStep,
    SublinearEulerParams,
    TiltParams,
    WassersteinShiftParams,
)
from chernoffkit.sublinear import AmbiguitySet, DiscreteMeasure, Penalty

SCHEMA_VERSION = 1

SCHEME_KINDS = ("fd-hjb", "euler", "tilt", "control", "wasserstein", "resolvent", "yosida")
EXPERIMENTS = SCHEME_KINDS + ("compare", "properties")
STUDIES = ("refinement", "generator")
REFERENCE_KINDS = ("gaussian-heat", "g-heat-convex", "ode-flow", "hopf-lax", "finest", "none")

DESCRIPTIONS = {
    "fd-hjb": "finite-difference HJB scheme with a diffusion penalty",
    "euler": "randomised explicit Euler scheme under a finite ambiguity set",
    "tilt": "exponentially tilted Euler scheme (optionally with the large-deviations coupling)",
    "control": "discrete static control scheme over a finite action list",
    "wasserstein": "Wasserstein-penalised shift perturbation of a reference step",
    "resolvent": "supremum of linear implicit-Euler (resolvent) steps",
    "yosida": "supremum of exponentiated Yosida steps",
    "compare": "two schemes with matching generators evolved side by side",
    "properties": "seeded structural property suite over a list of schemes",
}


class ConfigError(ValueError):
    """Invalid configuration; ``path`` is the dotted field path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


def _get(d: dict, key: str, path: str, kind=None, default=Any):
    if key not in d:
        if default is Any:
            raise ConfigError(f"{path}.{key}" if path else key, "missing required field")
        return default
    v = d[key]
    if kind is float:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{path}.{key}" if path else key, f"expected a number, got {v!r}")
        v = float(v)
        if not math.isfinite(v):
            raise ConfigError(f"{path}.{key}" if path else key, "must be finite")
    elif kind is int:
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(f"{path}.{key}" if path else key, f"expected an integer, got {v!r}")
    elif kind is str:
        if not isinstance(v, str):
            raise ConfigError(f"{path}.{key}" if path else key, f"expected a string, got {v!r}")
    elif kind is dict:
        if not isinstance(v, dict):
            raise ConfigError(f"{path}.{key}" if path else key, "expected a table")
    elif kind is list:
        if not isinstance(v, list):
            raise ConfigError(f"{path}.{key}" if path else key, "expected an array")
    return v


def _float_list(v, path: str) -> list[float]:
    vals = v if isinstance(v, list) else [v]
    out = []
    for i, x in enumerate(vals):
        if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
            raise ConfigError(f"{path}[{i}]", f"expected a finite number, got {x!r}")
        out.append(float(x))
    return out


def _check_keys(d: dict, allowed: set, path: str) -> None:
    for k in d:
        if k not in allowed:
            raise ConfigError(f"{path}.{k}" if path else k, "unknown field")


# ------------------------------------------------------------- sub-records


def parse_penalty(d, path: str) -> Penalty:
    if not isinstance(d, dict):
        raise ConfigError(path, "expected a table")
    kind = _get(d, "kind", path, str)
    try:
        if kind == "indicator":
            _check_keys(d, {"kind", "lo", "hi"}, path)
            return Penalty.indicator(_get(d, "lo", path, float), _get(d, "hi", path, float))
        if kind == "power":
            _check_keys(d, {"kind", "c", "q"}, path)
            return Penalty.power(_get(d, "c", path, float), _get(d, "q", path, float))
        if kind == "quadratic":
            _check_keys(d, {"kind", "c"}, path)
            return Penalty.quadratic(_get(d, "c", path, float))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(path, str(exc)) from None
    raise ConfigError(f"{path}.kind", f"unknown penalty kind {kind!r}")


def parse_measure(d, path: str) -> DiscreteMeasure:
    if d == "rademacher":
        return DiscreteMeasure.rademacher()
    if d == "dirac":
        return DiscreteMeasure.dirac(0.0)
    if not isinstance(d, dict):
        raise ConfigError(path, "expected a table with points and weights")
    _check_keys(d, {"points", "weights"}, path)
    try:
        return DiscreteMeasure.from_atoms(
            zip(_float_list(_get(d, "points", path), f"{path}.points"),
                _float_list(_get(d, "weights", path), f"{path}.weights"))
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(path, str(exc)) from None


def parse_ambiguity(v, path: str) -> AmbiguitySet:
    items = v if isinstance(v, list) else [v]
    if not items:
        raise ConfigError(path, "ambiguity set is empty")
    return AmbiguitySet(tuple(parse_measure(m, f"{path}[{i}]") for i, m in enumerate(items)))


def parse_function(d, path: str) -> functions.SmoothFunction:
    if not isinstance(d, dict):
        raise ConfigError(path, "expected a table with name and params")
    _check_keys(d, {"name", "params"}, path)
    name = _get(d, "name", path, str)
    params = _get(d, "params", path, dict, {})
    if name not in functions.LIBRARY:
        raise ConfigError(f"{path}.name", f"unknown function {name!r}")
    try:
        return functions.named(name, **params)
    except TypeError as exc:
        raise ConfigError(f"{path}.params", str(exc)) from None


# ----------------------------------------------------------------- levels


@dataclass
class Level:
    index: int
    delta: float
    h: float | None = None
    lam: float | None = None
    alpha: float | None = None
    noise_scale: float | None = None

    def echo(self) -> dict:
        out = {"level": self.index, "delta": self.delta}
        for k in ("h", "lam", "alpha", "noise_scale"):
            v = getattr(self, k)
            if v is not None:
                out["lambda" if k == "lam" else k] = v
        return out


def _resolve_levels(lad: dict, path: str = "ladder") -> list[Level]:
    _check_keys(lad, {"delta", "h", "h_rule", "lambda", "n", "coupling"}, path)
    coupling = lad.get("coupling")
    if coupling is not None and coupling != "large-deviations":
        raise ConfigError(f"{path}.coupling", f"unknown coupling {coupling!r}")
    if coupling == "large-deviations":
        ns = _float_list(_get(lad, "n", path), f"{path}.n")
        for k in ("delta", "h", "h_rule", "lambda"):
            if k in lad:
                raise ConfigError(f"{path}.{k}", "derived from n under the large-deviations coupling")
        levels = []
        for i, n in enumerate(ns):
            if n <= 0:
                raise ConfigError(f"{path}.n[{i}]", "must be positive")
            h = 1.0 / n
            d = n ** -0.25
            levels.append(Level(i, d * math.sqrt(h), h=h, alpha=1.0 / (d * d), noise_scale=d))
        return levels
    if "n" in lad:
        raise ConfigError(f"{path}.n", "only used with coupling = \"large-deviations\"")

    lams = _float_list(lad["lambda"], f"{path}.lambda") if "lambda" in lad else None
    deltas = _float_list(_get(lad, "delta", path), f"{path}.delta")
    hs = _float_list(lad["h"], f"{path}.h") if "h" in lad else None
    count = max(len(deltas), len(hs or []), len(lams or []))
    for name, seq in (("delta", deltas), ("h", hs), ("lambda", lams)):
        if seq is not None and len(seq) not in (1, count):
            raise ConfigError(f"{path}.{name}", f"expected 1 or {count} entries")

    def pick(seq, i):
        return None if seq is None else seq[0 if len(seq) == 1 else i]

    if "h_rule" in lad and hs is not None:
        raise ConfigError(f"{path}.h_rule", "give either h or h_rule, not both")
    levels = []
    for i in range(count):
        d = pick(deltas, i)
        if not d > 0:
            raise ConfigError(f"{path}.delta", "spacings must be positive")
        h = pick(hs, i)
        if "h_rule" in lad:
            h = _apply_rule(lad["h_rule"], d, f"{path}.h_rule")
        lam = pick(lams, i)
        if lam is not None:
            if not lam > 0:
                raise ConfigError(f"{path}.lambda", "must be positive")
            h = 1.0 / lam
        levels.append(Level(i, d, h=h, lam=lam))
    return levels


def _apply_rule(rule, delta: float, path: str) -> float:
    if not isinstance(rule, dict):
        raise ConfigError(path, "expected a table {c, q}")
    _check_keys(rule, {"c", "q"}, path)
    return _get(rule, "c", path, float) * delta ** _get(rule, "q", path, float)


# ------------------------------------------------------------ scheme blocks


SCHEME_FIELDS = {
    "fd-hjb": {"kind", "sigma_max", "penalty", "sigma_grid_size", "h_rule", "h"},
    "euler": {"kind", "drift", "noise_scale", "noise", "h_rule", "h"},
    "tilt": {"kind", "alpha", "drift", "noise_scale", "noise", "h_rule", "h"},
    "control": {"kind", "actions", "sigma_actions", "noise", "h_rule", "h"},
    "wasserstein": {"kind", "penalty", "base_measure", "shift_span", "p", "h_rule", "h"},
    "resolvent": {"kind", "thetas"},
    "yosida": {"kind", "thetas"},
}


def resolve_scheme(block: dict, path: str) -> dict:
    """Validate a scheme table and fill defaults; returns the resolved echo."""
    if not isinstance(block, dict):
        raise ConfigError(path, "expected a table")
    kind = _get(block, "kind", path, str)
    if kind not in SCHEME_KINDS:
        raise ConfigError(f"{path}.kind", f"unknown scheme kind {kind!r}")
    _check_keys(block, SCHEME_FIELDS[kind], path)
    out: dict = {"kind": kind}
    if "h_rule" in block:
        _apply_rule(block["h_rule"], 1.0, f"{path}.h_rule")
        out["h_rule"] = dict(block["h_rule"])
    if "h" in block:
        out["h"] = _float_list(block["h"], f"{path}.h")
    if kind == "fd-hjb":
        out["sigma_max"] = _get(block, "sigma_max", path, float)
        out["penalty"] = parse_penalty(_get(block, "penalty", path), f"{path}.penalty").to_dict()
        out["sigma_grid_size"] = _get(block, "sigma_grid_size", path, int, 65)
    elif kind in ("euler", "tilt"):
        out["drift"] = copy.deepcopy(block.get("drift", {"name": "constant", "params": {"value": 0.0}}))
        parse_function(out["drift"], f"{path}.drift")
        if "noise_scale" in block:
            out["noise_scale"] = _get(block, "noise_scale", path, float)
        out["noise"] = [m.to_dict() for m in parse_ambiguity(_get(block, "noise", path), f"{path}.noise").measures]
        if kind == "tilt" and "alpha" in block:
            out["alpha"] = _get(block, "alpha", path, float)
    elif kind == "control":
        acts = []
        if "actions" in block:
            for i, a in enumerate(_get(block, "actions", path, list)):
                trip = _float_list(a, f"{path}.actions[{i}]")
                if len(trip) != 3:
                    raise ConfigError(f"{path}.actions[{i}]", "expected [a, b, cost]")
                acts.append(trip)
        if "sigma_actions" in block:
            sa = _get(block, "sigma_actions", path, dict)
            _check_keys(sa, {"lo", "hi", "count"}, f"{path}.sigma_actions")
            sig = np.linspace(_get(sa, "lo", f"{path}.sigma_actions", float),
                              _get(sa, "hi", f"{path}.sigma_actions", float),
                              _get(sa, "count", f"{path}.sigma_actions", int))
            acts.extend([float(s * s), 0.0, 0.0] for s in sig.tolist())
        if not acts:
            raise ConfigError(f"{path}.actions", "action list is empty")
        out["actions"] = acts
        out["noise"] = [m.to_dict() for m in parse_ambiguity(block.get("noise", "rademacher"), f"{path}.noise").measures]
    elif kind == "wasserstein":
        out["penalty"] = parse_penalty(_get(block, "penalty", path), f"{path}.penalty").to_dict()
        out["base_measure"] = parse_measure(block.get("base_measure", "dirac"), f"{path}.base_measure").to_dict()
        out["shift_span"] = _get(block, "shift_span", path, float, 1.0)
        out["p"] = _get(block, "p", path, float, 1.0)
        if out["p"] < 1:
            raise ConfigError(f"{path}.p", "must be at least 1")
    else:
        out["thetas"] = _float_list(_get(block, "thetas", path), f"{path}.thetas")
    return out


def _time_step(scheme: dict, level: Level, path: str) -> float:
    if "h" in scheme:
        hs = scheme["h"]
        return hs[0] if len(hs) == 1 else hs[level.index]
    if "h_rule" in scheme:
        return _apply_rule(scheme["h_rule"], level.delta, f"{path}.h_rule")
    if level.h is None:
        raise ConfigError(f"{path}.h", "no time step: give ladder.h, ladder.h_rule or a scheme h")
    return level.h


def _amb(measures: list) -> AmbiguitySet:
    return AmbiguitySet(tuple(DiscreteMeasure(m["points"], m["weights"]) for m in measures))


def _penalty(d: dict) -> Penalty:
    return parse_penalty(d, "penalty")


def build_step(scheme: dict, level: Level, path: str) -> SchemeStep:
    """Construct the scheme step for one ladder level; admissibility errors carry field paths."""
    kind = scheme["kind"]
    try:
        if kind in ("resolvent", "yosida"):
            if level.lam is None:
                raise ConfigError("ladder.lambda", f"{kind} schemes need a lambda ladder")
            p = ResolventSupParams(tuple(scheme["thetas"]), level.lam, level.delta)
            return SchemeStep.resolvent_sup(p) if kind == "resolvent" else SchemeStep.yosida(p)
        h = _time_step(scheme, level, path)
        if kind == "fd-hjb":
            p = FdHjbParams(level.delta, scheme["sigma_max"], _penalty(scheme["penalty"]),
                            scheme["sigma_grid_size"])
            return SchemeStep.fd_hjb(p, h)
        if kind in ("euler", "tilt"):
            noise_scale = scheme.get("noise_scale", level.noise_scale)
            if noise_scale is None:
                raise ConfigError(f"{path}.noise_scale", "missing required field")
            drift = parse_function(scheme["drift"], f"{path}.drift")
            inner = SchemeStep.sublinear_euler(SublinearEulerParams(drift, noise_scale, _amb(scheme["noise"])), h)
            if kind == "euler":
                return inner
            alpha = scheme.get("alpha", level.alpha)
            if alpha is None:
                raise ConfigError(f"{path}.alpha", "missing required field")
            return SchemeStep.exp_tilt(TiltParams(alpha), inner)
        if kind == "control":
            acts = tuple(Action(*a) for a in scheme["actions"])
            return SchemeStep.control(ControlParams(acts, _amb(scheme["noise"])), h)
        if kind == "wasserstein":
            n = int(math.floor(scheme["shift_span"] / level.delta + 1e-9))
            shifts = level.delta * np.arange(-n, n + 1)
            bm = scheme["base_measure"]
            p = WassersteinShiftParams(DiscreteMeasure(bm["points"], bm["weights"]),
                                       _penalty(scheme["penalty"]), shifts, p=scheme["p"])
            return SchemeStep.wasserstein_shift(p, h)
    except AdmissibilityError as exc:
        name = exc.field or "kind"
        if name in ("delta", "h", "lambda"):
            raise ConfigError(f"ladder.{name}" if name != "h" or "h" not in scheme else f"{path}.h",
                              str(exc)) from None
        raise ConfigError(f"{path}.{name}", str(exc)) from None
    raise ConfigError(f"{path}.kind", f"unknown scheme kind {kind!r}")


# -------------------------------------------------------------- top level


@dataclass
class ExperimentConfig:
    resolved: dict
    levels: list[Level]
    source: str = ""
    extras: dict = field(default_factory=dict)

    @property
    def experiment(self) -> str:
        return self.resolved["experiment"]

    @property
    def grid_span(self) -> tuple[float, float]:
        g = self.resolved["grid"]
        return g["lo"], g["hi"]

    def grid(self, level: Level) -> Grid1d:
        lo, hi = self.grid_span
        return Grid1d.from_span(lo, hi, level.delta)

    @property
    def window(self) -> CompactWindow:
        w = self.resolved["window"]
        return CompactWindow(w["lo"], w["hi"])

    def initial(self) -> functions.SmoothFunction:
        return parse_function(self.resolved["initial"], "initial")


TOP_FIELDS = {
    "schema_version", "experiment", "study", "seed", "grid", "ladder", "time", "scheme",
    "scheme_a", "scheme_b", "initial", "window", "reference", "tolerances", "properties",
}


def _resolve_reference(d: dict, path: str = "reference") -> dict:
    kind = _get(d, "kind", path, str)
    if kind not in REFERENCE_KINDS:
        raise ConfigError(f"{path}.kind", f"unknown reference kind {kind!r}")
    out = {"kind": kind}
    if kind == "gaussian-heat":
        _check_keys(d, {"kind", "sigma"}, path)
        out["sigma"] = _get(d, "sigma", path, float)
    elif kind == "g-heat-convex":
        _check_keys(d, {"kind", "sigma_lo", "sigma_hi"}, path)
        out["sigma_lo"] = _get(d, "sigma_lo", path, float)
        out["sigma_hi"] = _get(d, "sigma_hi", path, float)
    elif kind == "ode-flow":
        _check_keys(d, {"kind", "rtol"}, path)
        out["rtol"] = _get(d, "rtol", path, float, 1e-10)
    elif kind == "hopf-lax":
        _check_keys(d, {"kind", "penalty", "y_lo", "y_hi", "mesh"}, path)
        out["penalty"] = parse_penalty(d.get("penalty", {"kind": "quadratic", "c": 0.5}), f"{path}.penalty").to_dict()
        out["y_lo"] = _get(d, "y_lo", path, float, -6.0)
        out["y_hi"] = _get(d, "y_hi", path, float, 6.0)
        out["mesh"] = _get(d, "mesh", path, float, 1e-3)
    else:
        _check_keys(d, {"kind"}, path)
    return out


def resolve(raw: dict, source: str = "") -> ExperimentConfig:
    _check_keys(raw, TOP_FIELDS, "")
    version = _get(raw, "schema_version", "", int)
    if version != SCHEMA_VERSION:
        raise ConfigError("schema_version", f"unsupported schema version {version} (expected {SCHEMA_VERSION})")
    exp = _get(raw, "experiment", "", str)
    if exp not in EXPERIMENTS:
        raise ConfigError("experiment", f"unknown experiment {exp!r}; choose from {list(EXPERIMENTS)}")
    res: dict = {"schema_version": version, "experiment": exp}

    if exp == "properties":
        res["seed"] = _get(raw, "seed", "", int)
        props = _get(raw, "properties", "", dict)
        _check_keys(props, {"trials", "schemes"}, "properties")
        trials = _get(props, "trials", "properties", int, 100)
        if trials < 1:
            raise ConfigError("properties.trials", "must be at least 1")
        blocks = _get(props, "schemes", "properties", list)
        if not blocks:
            raise ConfigError("properties.schemes", "no schemes listed")
        schemes = []
        levels = []
        for i, b in enumerate(blocks):
            path = f"properties.schemes[{i}]"
            if not isinstance(b, dict):
                raise ConfigError(path, "expected a table")
            inner = {k: v for k, v in b.items() if k not in ("delta", "lambda")}
            sch = resolve_scheme(inner, path)
            sch["delta"] = _get(b, "delta", path, float)
            if sch["kind"] in ("resolvent", "yosida"):
                sch["lambda"] = _get(b, "lambda", path, float)
            elif "h" not in sch and "h_rule" not in sch:
                raise ConfigError(f"{path}.h", "missing required field")
            schemes.append(sch)
            lv = Level(i, sch["delta"], lam=sch.get("lambda"))
            if lv.lam is not None:
                lv.h = 1.0 / lv.lam
            levels.append(lv)
            build_step(sch, lv, path)
        res["properties"] = {"trials": trials, "schemes": schemes}
        return ExperimentConfig(res, levels, source)

    if "seed" in raw:
        res["seed"] = _get(raw, "seed", "", int)
    grid = _get(raw, "grid", "", dict)
    _check_keys(grid, {"lo", "hi"}, "grid")
    lo, hi = _get(grid, "lo", "grid", float), _get(grid, "hi", "grid", float)
    if not lo < hi:
        raise ConfigError("grid.hi", "grid needs lo < hi")
    res["grid"] = {"lo": lo, "hi": hi}

    study = raw.get("study", "refinement")
    if exp == "compare":
        if "study" in raw:
            raise ConfigError("study", "not used by compare experiments")
        study = None
    elif study not in STUDIES:
        raise ConfigError("study", f"unknown study {study!r}; choose from {list(STUDIES)}")
    if study is not None:
        res["study"] = study

    levels = _resolve_levels(_get(raw, "ladder", "", dict))
    for a, b in zip(levels, levels[1:]):
        if b.delta > a.delta:
            raise ConfigError("ladder.delta", "grid spacings must not increase along the ladder")

    if study != "generator":
        t = _get(_get(raw, "time", "", dict), "t", "time", float)
        if t < 0:
            raise ConfigError("time.t", "must be non-negative")
        res["time"] = {"t": t}
    elif "time" in raw:
        raise ConfigError("time", "generator studies take a single step; remove the time table")

    init = _get(raw, "initial", "", dict)
    parse_function(init, "initial")
    res["initial"] = {"name": init["name"], "params": dict(init.get("params", {}))}

    win = _get(raw, "window", "", dict)
    _check_keys(win, {"lo", "hi"}, "window")
    wlo, whi = _get(win, "lo", "window", float), _get(win, "hi", "window", float)
    if not wlo < whi:
        raise ConfigError("window.hi", "window needs lo < hi")
    if wlo < lo or whi > hi:
        raise ConfigError("window", "window lies outside the grid span")
    res["window"] = {"lo": wlo, "hi": whi}

    if exp == "compare":
        if "scheme" in raw:
            raise ConfigError("scheme", "compare experiments use scheme_a and scheme_b")
        res["scheme_a"] = resolve_scheme(_get(raw, "scheme_a", "", dict), "scheme_a")
        res["scheme_b"] = resolve_scheme(_get(raw, "scheme_b", "", dict), "scheme_b")
        blocks = [("scheme_a", res["scheme_a"]), ("scheme_b", res["scheme_b"])]
    else:
        res["scheme"] = resolve_scheme(_get(raw, "scheme", "", dict), "scheme")
        if res["scheme"]["kind"] != exp:
            raise ConfigError("scheme.kind", f"scheme kind {res['scheme']['kind']!r} does not match experiment {exp!r}")
        blocks = [("scheme", res["scheme"])]

    if study == "refinement" and len(levels) < 3:
        raise ConfigError("ladder", "a refinement ladder needs at least 3 levels")

    ref = raw.get("reference", {"kind": "finest" if study == "refinement" else "none"})
    if not isinstance(ref, dict):
        raise ConfigError("reference", "expected a table")
    res["reference"] = _resolve_reference(ref)
    if study == "generator" and res["reference"]["kind"] != "none":
        raise ConfigError("reference.kind", "generator studies compare against the closed-form generator")

    tol = raw.get("tolerances", {})
    if not isinstance(tol, dict):
        raise ConfigError("tolerances", "expected a table")
    _check_keys(tol, {"final_error", "reference_error", "require_decrease"}, "tolerances")
    res["tolerances"] = {
        "final_error": _get(tol, "final_error", "tolerances", float, math.inf),
        "require_decrease": bool(tol.get("require_decrease", True)),
    }
    if "reference_error" in tol:
        res["tolerances"]["reference_error"] = _get(tol, "reference_error", "tolerances", float)

    # build every level now so admissibility problems surface before any run
    steps_h = []
    for lv in levels:
        hs = []
        for name, sch in blocks:
            step = build_step(sch, lv, name)
            hs.append(step.h)
        steps_h.append(hs)
    for j, (name, _) in enumerate(blocks):
        col = [hs[j] for hs in steps_h]
        if any(b >= a for a, b in zip(col, col[1:])) and study == "refinement":
            raise ConfigError("ladder.h", "time steps must strictly decrease along the ladder")
    res["ladder"] = [lv.echo() for lv in levels]
    return ExperimentConfig(res, levels, source)


def load_config(path) -> ExperimentConfig:
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("<file>", f"not valid TOML: {exc}") from None
    return resolve(raw, str(path))
