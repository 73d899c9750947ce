"""Embedding files (CSV and NPY) and report serialization.

CSV input: comma separated, '.' decimal point, optional single header row,
UTF-8.  NPY input: format version 1.0, little-endian float32/float64,
C order.  Numbers are written with 17 significant digits so float64 values
survive a write/read cycle unchanged.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Optional

import numpy as np
from numpy.lib import format as npy_format

from .errors import InvalidArgumentError, LoadError
from .geometry import PointCloud

FORMATS = ("csv", "npy")
_NPY_DTYPES = {"<f4", "<f8"}


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def infer_format(path, fmt: Optional[str] = None) -> str:
    if fmt is not None:
        if fmt not in FORMATS:
            raise InvalidArgumentError(f"unsupported embedding format {fmt!r}")
        return fmt
    suffix = Path(path).suffix.lower().lstrip(".")
    return suffix if suffix in FORMATS else "csv"


def _parse_float(text: str) -> float:
    # float() also takes "nan", "inf", "1_0"; only the first two can slip
    # through a numeric-looking check and are rejected by the caller
    return float(text.strip())


def _is_number(text: str) -> bool:
    try:
        _parse_float(text)
    except ValueError:
        return False
    return True


def read_csv_array(path) -> np.ndarray:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise LoadError(path, f"not UTF-8 text ({exc.reason})") from None
    rows = [r for r in csv.reader(io.StringIO(text))]
    # row numbers below are 1-based file lines
    numbered = [(k + 1, r) for k, r in enumerate(rows) if any(f.strip() for f in r)]
    if not numbered:
        raise LoadError(path, "no data rows")
    first = numbered[0][1]
    if not any(_is_number(f) for f in first):
        numbered = numbered[1:]
        if not numbered:
            raise LoadError(path, "header row but no data rows")
    width = len(numbered[0][1])
    data = np.empty((len(numbered), width))
    for k, (line, r) in enumerate(numbered):
        if len(r) != width:
            raise LoadError(path, f"ragged row: expected {width} fields, got {len(r)}", line)
        for col, f in enumerate(r):
            try:
                v = _parse_float(f)
            except ValueError:
                raise LoadError(path, f"non-numeric field {f!r} in column {col}", line) from None
            if not math.isfinite(v):
                raise LoadError(path, f"non-finite value {f.strip()!r} in column {col}", line)
            data[k, col] = v
    return data


def read_npy_array(path, allowed_ndim=(2,)) -> np.ndarray:
    path = Path(path)
    with open(path, "rb") as fh:
        try:
            version = npy_format.read_magic(fh)
        except ValueError as exc:
            raise LoadError(path, f"malformed NPY header: {exc}") from None
        if version != (1, 0):
            raise LoadError(path, f"unsupported NPY version {version[0]}.{version[1]} (need 1.0)")
        try:
            shape, fortran_order, dtype = npy_format.read_array_header_1_0(fh)
        except ValueError as exc:
            raise LoadError(path, f"malformed NPY header: {exc}") from None
        if fortran_order:
            raise LoadError(path, "fortran_order=True arrays are not supported")
        if dtype.str not in _NPY_DTYPES:
            raise LoadError(path, f"unsupported element type {dtype.str!r} (need <f4 or <f8)")
        if len(shape) not in allowed_ndim:
            raise LoadError(path, f"expected a {' or '.join(map(str, allowed_ndim))}-D array, got shape {shape}")
        count = int(np.prod(shape))
        raw = fh.read(count * dtype.itemsize)
        if len(raw) != count * dtype.itemsize:
            raise LoadError(path, f"truncated data: {len(raw)} of {count * dtype.itemsize} bytes")
    arr = np.frombuffer(raw, dtype=dtype).reshape(shape).astype(np.float64)
    bad = ~np.isfinite(arr)
    if bad.any():
        row = int(np.argwhere(bad)[0, 0])
        raise LoadError(path, "non-finite value", row)
    return arr


def read_embedding_file(path, fmt: Optional[str] = None) -> PointCloud:
    """Load an ``(n, d)`` point cloud from CSV or NPY."""
    path = Path(path)
    if not path.is_file():
        raise LoadError(path, "no such file")
    fmt = infer_format(path, fmt)
    arr = read_csv_array(path) if fmt == "csv" else read_npy_array(path)
    return PointCloud(arr)


def write_cloud(cloud, path, fmt: Optional[str] = None) -> Path:
    path = Path(path)
    pts = cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud, dtype=np.float64)
    fmt = infer_format(path, fmt)
    if fmt == "npy":
        np.save(path, np.ascontiguousarray(pts))
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            for row in pts:
                fh.write(",".join(fmt_float(v) for v in row) + "\n")
    return path


def _encode(obj, indent: int, level: int) -> str:
    pad = "\n" + " " * (indent * (level + 1))
    end = "\n" + " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [json.dumps(str(k)) + ": " + _encode(v, indent, level + 1) for k, v in obj.items()]
        return "{" + pad + ("," + pad).join(items) + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [_encode(v, indent, level + 1) for v in obj]
        return "[" + pad + ("," + pad).join(items) + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        # JSON has no infinity; an open-ended interval is written as null
        return fmt_float(obj) if math.isfinite(obj) else "null"
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def dumps_json(obj, indent: int = 2) -> str:
    """JSON text with every float at 17 significant digits."""
    return _encode(obj, indent, 0) + "\n"


def dumps_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_csv_cell(v) for v in r])
    return buf.getvalue()


def _csv_cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return fmt_float(v) if math.isfinite(v) else str(float(v))
    if v is None:
        return ""
    return v
