"""File formats: flat config files, CSV tables and JSON, written atomically."""
import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .distfit import Histogram
from .exceptions import ConfigError


def parse_config(text):
    """Parse ``key = value`` lines; ``#`` starts a comment. Keys are normalized to snake_case."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_").lower()
        if not key:
            raise ConfigError(f"config line {lineno}: empty key")
        if key in out:
            raise ConfigError(f"config line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def load_config(path):
    return parse_config(Path(path).read_text(encoding="utf-8"))


def atomic_write_text(path, text):
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


def _cell(value):
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    if isinstance(value, (np.integer,)):
        return str(int(value))
    return "" if value is None else str(value)


def csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def write_csv(path, header, rows):
    atomic_write_text(path, csv_text(header, rows))


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _finite(obj):
    # JSON has no Infinity; encode as the string "inf"
    if isinstance(obj, float) and math.isinf(obj):
        return "inf" if obj > 0 else "-inf"
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def json_text(data):
    return json.dumps(_finite(data), indent=2, sort_keys=True, default=_json_default) + "\n"


def write_json(path, data):
    atomic_write_text(path, json_text(data))


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def wealth_rows(wealth, income):
    """``(rank, wealth, income)`` sorted by wealth, richest first (rank 1)."""
    order = np.argsort(-np.asarray(wealth), kind="stable")
    return [(i + 1, float(wealth[j]), float(income[j])) for i, j in enumerate(order)]


def histogram_rows(hist):
    e = hist.bin_edges
    return [(float(e[i]), float(e[i + 1]), float(c)) for i, c in enumerate(hist.counts)]


def write_histogram(path, hist):
    write_csv(path, ("bin_lo", "bin_hi", "count"), histogram_rows(hist))


def read_table(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ConfigError(f"{path} is empty") from None
        rows = [r for r in reader if r]
    return header, rows


def read_histogram(path, assumed_error=100.0):
    header, rows = read_table(path)
    if header != ["bin_lo", "bin_hi", "count"]:
        raise ConfigError(f"{path}: expected header bin_lo,bin_hi,count, got {','.join(header)}")
    arr = np.array([[float(x) for x in r] for r in rows])
    if arr.size == 0:
        raise ConfigError(f"{path}: no bins")
    if not np.allclose(arr[1:, 0], arr[:-1, 1]):
        raise ConfigError(f"{path}: bins must be contiguous")
    edges = np.append(arr[:, 0], arr[-1, 1])
    return Histogram(bin_edges=edges, counts=arr[:, 2], assumed_error=assumed_error)


def read_values(path, column=None):
    """One numeric column from a CSV; defaults to ``wealth`` or the only column."""
    header, rows = read_table(path)
    if column is None:
        if "wealth" in header:
            column = "wealth"
        elif len(header) == 1:
            column = header[0]
        else:
            raise ConfigError(f"{path}: choose a column from {header}")
    if column not in header:
        raise ConfigError(f"{path}: no column {column!r}")
    j = header.index(column)
    return np.array([float(r[j]) for r in rows])


def is_histogram_file(path):
    header, _ = read_table(path)
    return header == ["bin_lo", "bin_hi", "count"]
