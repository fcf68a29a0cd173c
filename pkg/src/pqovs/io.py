"""Deterministic CSV output with a one-line JSON metadata header."""

from __future__ import annotations

import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .errors import PQOVSError

__all__ = [
    "OutputError",
    "format_metadata",
    "read_metadata",
    "argv_from_metadata",
    "field_rows",
    "slice_rows",
    "curve_rows",
    "write_csv",
]

NUMBER_FORMAT = "%.16e"


class OutputError(PQOVSError, OSError):
    """Writing an output file failed."""


def _clean(obj):
    # JSON has no NaN/inf; keep the file parseable by any reader
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def format_metadata(meta: dict) -> str:
    body = {"tool": "pqovs", "version": __version__, **meta}
    return "# " + json.dumps(_clean(body), sort_keys=True, separators=(",", ":")) + "\n"


def read_metadata(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
    if not first.startswith("# "):
        raise ValueError(f"{path} has no metadata line")
    return json.loads(first[2:])


def argv_from_metadata(meta: dict, out: str) -> list[str]:
    """Command line that regenerates the file described by ``meta``."""
    argv = [meta["command"]]
    for flag, value in meta["options"].items():
        argv += [f"--{flag}", str(value)]
    return argv + ["--out", out]


def _table(columns: list[np.ndarray]) -> str:
    buf = io.StringIO()
    np.savetxt(buf, np.column_stack(columns), fmt=NUMBER_FORMAT, delimiter=",")
    return buf.getvalue()


def field_rows(field) -> tuple[str, str]:
    """Header and rows ``axis1,axis2,re,im`` of a complex field, axis2-major."""
    a1, a2 = np.meshgrid(field.axis1.values, field.axis2.values)
    v = field.values
    header = f"{field.axis1.label},{field.axis2.label},re,im\n"
    return header, _table([a1.ravel(), a2.ravel(), v.real.ravel(), v.imag.ravel()])


def slice_rows(axis1, axis2, values) -> tuple[str, str]:
    """Header and rows ``axis1,axis2,value`` of a real grid, axis2-major."""
    a1, a2 = np.meshgrid(axis1.values, axis2.values)
    header = f"{axis1.label},{axis2.label},value\n"
    return header, _table([a1.ravel(), a2.ravel(), np.asarray(values, dtype=float).ravel()])


def curve_rows(charges, values) -> tuple[str, str]:
    lines = [f"{int(q)},{NUMBER_FORMAT % v}\n" for q, v in zip(charges, values)]
    return "q,n_value\n", "".join(lines)


def write_csv(path: str, meta: dict, header: str, rows: str) -> None:
    """Write metadata, header and rows; ``path == "-"`` means stdout.

    Files are written to a temporary sibling and renamed into place, so a
    failure never leaves a partial file behind.
    """
    text = format_metadata(meta) + header + rows
    if path == "-":
        sys.stdout.write(text)
        return
    parent = os.path.dirname(os.path.abspath(path))
    tmp = None
    try:
        fd, tmp = tempfile.mkstemp(prefix=".pqovs-", suffix=".tmp", dir=parent)
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
        tmp = None
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    finally:
        if tmp is not None and os.path.exists(tmp):
            os.unlink(tmp)
