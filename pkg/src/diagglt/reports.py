"""Verdicts and CSV/JSON emitters shared by every report type.

CSV files start with one ``# {json header}`` comment line followed by a plain
header row and the data rows.  Floats are written with ``repr`` so a re-run
with the same configuration reproduces the file byte for byte.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from diagglt import config


@dataclass(frozen=True)
class Verdict:
    passed: bool
    reason: str
    threshold: float
    tail_window: int

    def __bool__(self):
        return self.passed

    @property
    def label(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def to_dict(self) -> dict:
        return {"verdict": self.label, "reason": self.reason,
                "threshold": self.threshold, "tail_window": self.tail_window}


def tail_verdict(sizes, values, threshold, tail_window=config.DEFAULT_TAIL_WINDOW,
                 decay_exponent=config.DECAY_EXPONENT) -> Verdict:
    """Finite stand-in for ``values -> 0`` along ``sizes``.

    Looks only at the last ``tail_window`` entries.  PASS when they are
    non-increasing and either the last one is within ``threshold`` or the
    tail shrinks at least like ``size**(-decay_exponent)``.  A tail that is
    entirely within ``threshold`` also passes (fluctuations below tolerance).
    """
    sizes = np.asarray(sizes, dtype=float)
    v = np.asarray(values, dtype=float)
    w = max(1, min(int(tail_window), v.size))
    ts, tv = sizes[-w:], v[-w:]
    if not np.all(np.isfinite(tv)):
        return Verdict(False, "non-finite tail values", threshold, w)
    slack = 1e-12 * np.maximum(1.0, np.abs(tv[:-1]))
    monotone = bool(np.all(np.diff(tv) <= slack))
    if np.all(tv <= threshold):
        return Verdict(True, "tail within threshold", threshold, w)
    if monotone and tv[-1] <= threshold:
        return Verdict(True, "tail non-increasing and last value within threshold", threshold, w)
    if monotone and w > 1 and tv[0] > 0:
        bound = tv[0] * (ts[0] / ts[-1]) ** decay_exponent
        if tv[-1] <= bound:
            return Verdict(True, f"tail decays at least like size^-{decay_exponent:g}",
                           threshold, w)
    why = "tail not non-increasing" if not monotone else "tail neither within threshold nor vanishing"
    return Verdict(False, why, threshold, w)


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (complex, np.complexfloating)):
        return repr(complex(x))
    return str(x)


def jsonable(obj):
    """Recursively convert numpy / complex values into JSON-serialisable ones."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else repr(f)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, Verdict):
        return obj.to_dict()
    if hasattr(obj, "to_dict"):
        return jsonable(obj.to_dict())
    return obj


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2)


def csv_text(columns: Sequence[str], rows, header: dict | None = None) -> str:
    buf = io.StringIO()
    if header is not None:
        buf.write("# " + json.dumps(jsonable(header), sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def write_csv(path, columns, rows, header=None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(csv_text(columns, rows, header))
    return path


def read_csv(path):
    """Return ``(header_dict_or_None, column_names, rows_as_str_lists)``."""
    lines = Path(path).read_text().splitlines()
    header = None
    if lines and lines[0].startswith("# "):
        header = json.loads(lines[0][2:])
        lines = lines[1:]
    reader = csv.reader(lines)
    columns = next(reader)
    return header, columns, [r for r in reader if r]


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj) + "\n")
    return path


# symbol and diagonal files ---------------------------------------------

def symbol_to_csv(symbol, path=None, resolution=None, header=None) -> str:
    """``x,re,im`` rows at the nodes ``i/m`` (``m`` = grid size or ``resolution``)."""
    m = symbol.grid_size or resolution or config.DEFAULT_RESOLUTION
    x = np.arange(1, m + 1) / m
    v = np.asarray(symbol(x), dtype=complex)
    text = csv_text(["x", "re", "im"], zip(x, v.real, v.imag), header)
    if path is not None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)
    return text


def read_symbol_csv(path):
    from diagglt.symbols import Symbol

    _, columns, rows = read_csv(path)
    if columns != ["x", "re", "im"]:
        raise ValueError(f"{path}: expected columns x,re,im, got {columns}")
    v = np.array([complex(float(r[1]), float(r[2])) for r in rows])
    m = v.size
    x = np.array([float(r[0]) for r in rows])
    if not np.allclose(x, np.arange(1, m + 1) / m, atol=1e-12):
        raise ValueError(f"{path}: x column must be the nodes i/m")
    return Symbol.from_grid(v, descriptor=f"file:{path}")


def diagonal_to_csv(d, path=None, header=None) -> str:
    d = np.asarray(d, dtype=complex)
    text = csv_text(["i", "re", "im"], zip(range(1, d.size + 1), d.real, d.imag), header)
    if path is not None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)
    return text


def read_diagonal_table(path) -> dict:
    """Read ``n,i,re,im`` rows into ``{n: diagonal}`` (real arrays when all ``im`` vanish)."""
    _, columns, rows = read_csv(path)
    if columns != ["n", "i", "re", "im"]:
        raise ValueError(f"{path}: expected columns n,i,re,im, got {columns}")
    table: dict = {}
    for r in rows:
        n, i = int(r[0]), int(r[1])
        table.setdefault(n, {})[i] = complex(float(r[2]), float(r[3]))
    out = {}
    for n, entries in table.items():
        if sorted(entries) != list(range(1, n + 1)):
            raise ValueError(f"{path}: size {n} does not list entries 1..{n}")
        v = np.array([entries[i] for i in range(1, n + 1)])
        out[n] = v.real.copy() if np.all(v.imag == 0) else v
    return out
