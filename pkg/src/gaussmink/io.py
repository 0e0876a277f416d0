"""JSON and CSV file formats.

Floats are written with ``repr``, the shortest decimal string that parses back
to the same double, so every round trip is bit exact.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .circle_grid import Grid
from .convex_body import Body, body_from_support
from .errors import InvalidMeasure
from .variational import MeasureDensity


class FormatError(ValueError):
    pass


def _floats(values) -> list[float]:
    return [float(v) for v in np.asarray(values, dtype=float)]


def _read_json(path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise FormatError(f"{path}: expected a JSON object")
    return data


def _write_json(path, data: dict):
    Path(path).write_text(json.dumps(data, indent=1) + "\n")


def body_to_dict(body: Body) -> dict:
    return {"n": 2, "grid": body.grid.size, "support": _floats(body.h)}


def body_from_dict(data: dict) -> Body:
    if data.get("n") != 2:
        raise FormatError(f"only planar bodies (n = 2) are supported, got n = {data.get('n')!r}")
    try:
        support = np.asarray(data["support"], dtype=float)
        grid = Grid(data["grid"])
    except KeyError as exc:
        raise FormatError(f"body file is missing {exc}") from None
    if support.shape != (grid.size,):
        raise FormatError(f"support has {support.size} samples, grid says {grid.size}")
    return body_from_support(support, grid)


def write_body(path, body: Body):
    _write_json(path, body_to_dict(body))


def read_body(path) -> Body:
    return body_from_dict(_read_json(path))


def measure_to_dict(mu: MeasureDensity) -> dict:
    return {"grid": mu.grid.size, "density": _floats(mu.density), "even": bool(mu.even)}


def measure_from_dict(data: dict) -> MeasureDensity:
    try:
        grid = Grid(data["grid"])
        dens = np.asarray(data["density"], dtype=float)
    except KeyError as exc:
        raise FormatError(f"measure file is missing {exc}") from None
    if dens.shape != (grid.size,):
        raise FormatError(f"density has {dens.size} samples, grid says {grid.size}")
    even = data.get("even", False)
    if not isinstance(even, bool):
        raise InvalidMeasure("'even' must be a boolean")
    return MeasureDensity(grid, dens, even)


def write_measure(path, mu: MeasureDensity):
    _write_json(path, measure_to_dict(mu))


def read_measure(path) -> MeasureDensity:
    return measure_from_dict(_read_json(path))


def write_json(path, data: dict):
    _write_json(path, data)


def read_json(path) -> dict:
    return _read_json(path)


def rows_to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        # float() first: numpy scalars repr as np.float64(...) under numpy 2
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()
