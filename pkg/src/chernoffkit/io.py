"""Deterministic CSV/JSON writers; every float is written with 17 significant digits."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np


def fmt_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    if v is None:
        return ""
    return str(v)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_cell(v) for v in row) for row in rows)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_grid_csv(path, x, values) -> None:
    write_csv(path, ["x", "value"], zip(np.asarray(x).tolist(), np.asarray(values).tolist()))


def _json_scalar(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        x = float(v)
        # JSON has no non-finite literals
        return fmt_float(x) if math.isfinite(x) else f'"{fmt_float(x)}"'
    if isinstance(v, str):
        import json

        return json.dumps(v, ensure_ascii=False)
    raise TypeError(f"cannot serialise {type(v).__name__}")


def dumps_json(obj: Any, indent: int = 2) -> str:
    """JSON text with fixed key order (insertion order) and 17-digit floats."""

    def emit(o, level: int) -> str:
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{pad}{_json_scalar(str(k))}: {emit(v, level + 1)}" for k, v in o.items()]
            return "{\n" + ",\n".join(items) + "\n" + end + "}"
        if isinstance(o, (list, tuple, np.ndarray)):
            seq = list(o.tolist() if isinstance(o, np.ndarray) else o)
            if not seq:
                return "[]"
            items = [f"{pad}{emit(v, level + 1)}" for v in seq]
            return "[\n" + ",\n".join(items) + "\n" + end + "]"
        return _json_scalar(o)

    return emit(obj, 0) + "\n"


def write_json(path, obj: Any) -> None:
    Path(path).write_text(dumps_json(obj), encoding="utf-8")
