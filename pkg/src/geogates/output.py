"""Deterministic CSV/JSON writers and grid specs shared by the command line."""

from __future__ import annotations

import json
import math
import os
from typing import Iterable, Sequence

import numpy as np


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


def dumps(obj) -> str:
    """Sorted-key JSON with a trailing newline; identical input gives identical bytes."""
    return json.dumps(_plain(obj), sort_keys=True, indent=2) + "\n"


def write_json(path: str, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(obj))


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    return str(v)


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence], config: dict) -> None:
    """CSV with one ``# config: {...}`` comment line, a header row and ``.`` decimals."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# config: " + json.dumps(_plain(config), sort_keys=True) + "\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_cell(v) for v in row) + "\n")


def read_csv(path: str):
    """Return ``(config, header, rows)`` from a file written by ``write_csv``."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    config = json.loads(lines[0][len("# config: "):])
    header = lines[1].split(",")
    rows = [[_parse(x) for x in line.split(",")] for line in lines[2:] if line]
    return config, header, rows


def _parse(cell: str):
    try:
        return float(cell)
    except ValueError:
        return cell


def grid_values(spec) -> list[float]:
    """A list of numbers, or ``{start, stop, num[, log]}`` for linear or log spacing."""
    if isinstance(spec, (list, tuple)):
        return [float(x) for x in spec]
    if isinstance(spec, dict):
        unknown = set(spec) - {"start", "stop", "num", "log"}
        if unknown:
            raise ValueError(f"unknown grid keys {sorted(unknown)}")
        num = int(spec.get("num", 0))
        if num < 0:
            raise ValueError("grid size must be non-negative")
        start, stop = float(spec["start"]), float(spec["stop"])
        if spec.get("log", False):
            if start <= 0 or stop <= 0:
                raise ValueError("log grids need positive bounds")
            return [float(x) for x in np.geomspace(start, stop, num)]
        return [float(x) for x in np.linspace(start, stop, num)]
    if isinstance(spec, (int, float)):
        return [float(spec)]
    raise ValueError(f"cannot read grid spec {spec!r}")


def ensure_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path
