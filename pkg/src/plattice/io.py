"""Result persistence: atomic writes, round-trip float CSV, JSON."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .domain import Domain


def fmt_float(x: float) -> str:
    # repr is the shortest string that round-trips
    return repr(float(x))


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps_json(payload: Any) -> str:
    return json.dumps(_jsonable(payload), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path: str | Path, payload: Any) -> None:
    atomic_write_text(path, dumps_json(payload))


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
    atomic_write_text(path, buf.getvalue())


def write_grid_function(path: str | Path, d: Domain, u: np.ndarray) -> None:
    """One row per vertex in row-major order: coordinates, then the value."""
    coords = d.coords()
    header = [f"x{i}" for i in range(d.dim)] + ["value"]
    rows = ([*map(int, c), float(v)] for c, v in zip(coords, u))
    write_csv(path, header, rows)


def read_grid_function(path: str | Path, d: Domain) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[-1] != "value" or len(header) != d.dim + 1:
            raise ValueError(f"{path}: expected columns x0..x{d.dim - 1},value")
        u = np.zeros(d.vertex_count)
        seen = np.zeros(d.vertex_count, dtype=bool)
        for lineno, row in enumerate(reader, start=2):
            try:
                i = d.index([int(c) for c in row[:-1]])
                u[i] = float(row[-1])
            except (ValueError, IndexError) as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
            seen[i] = True
    if not seen.all():
        raise ValueError(f"{path}: {int((~seen).sum())} vertices missing")
    return u


GNUPLOT_TRACE = """# gnuplot script: energy and residual per iteration
set datafile separator ","
set key autotitle columnhead
set logscale y2
set y2tics
set xlabel "iteration"
plot "trace.csv" using 1:2 with lines title "energy", \\
     "trace.csv" using 1:3 axes x1y2 with lines title "residual"
"""

GNUPLOT_FIBER = """# gnuplot script: fibering profile
set datafile separator ","
set key autotitle columnhead
set xlabel "t"
plot "fiber.csv" using 1:2 with linespoints title "psi", \\
     "fiber.csv" using 1:3 with linespoints title "slope"
"""

GNUPLOT_SWEEP = """# gnuplot script: ground energy along the sweep axis
set datafile separator ","
set key autotitle columnhead
set xlabel "parameter"
plot "sweep.csv" using 1:2 with linespoints title "b"
"""
