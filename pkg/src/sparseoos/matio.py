"""Plain-text CSV I/O for matrices, labeled datasets and model files.

Matrices are written one row per line, comma separated, no header, with
17 significant digits so that float64 values survive a round trip.
"""

from __future__ import annotations

import io
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class MatrixFormatError(ValueError):
    """Base class for malformed matrix files. Carries the 1-based line."""

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}: "
        if line is not None:
            where += f"line {line}: "
        super().__init__(where + message)


class RaggedRowsError(MatrixFormatError):
    pass


class ParseError(MatrixFormatError):
    pass


class NonFiniteError(MatrixFormatError):
    pass


class LabelError(MatrixFormatError):
    pass


@dataclass(frozen=True)
class LabeledSet:
    points: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        if self.points.shape[0] != self.labels.shape[0]:
            raise ValueError("label count must equal number of points")


def format_value(x: float) -> str:
    """Shortest text for ``x`` that keeps at least 17 significant digits of precision.

    Integral values print without a decimal point (``0``, ``-2``).
    """
    x = float(x)
    if x == 0.0:
        return "0"
    if x.is_integer() and abs(x) < 1e17:
        return str(int(x))
    # repr is the shortest string that round-trips exactly
    s = repr(x)
    return s


def _parse_lines(lines, path=None, first_line=1):
    rows = []
    width = None
    for offset, raw in enumerate(lines):
        lineno = first_line + offset
        line = raw.strip()
        if not line:
            continue
        tokens = line.split(",")
        row = []
        for tok in tokens:
            tok = tok.strip()
            try:
                val = float(tok)
            except ValueError:
                raise ParseError(f"cannot parse {tok!r} as a number", lineno, path) from None
            if not math.isfinite(val):
                raise NonFiniteError(f"non-finite value {tok!r}", lineno, path)
            row.append(val)
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise RaggedRowsError(
                f"expected {width} columns, found {len(row)}", lineno, path
            )
        rows.append(row)
    if not rows:
        raise MatrixFormatError("no rows", None, path)
    return np.array(rows, dtype=float)


def parse_matrix(text: str, path=None, first_line: int = 1) -> np.ndarray:
    return _parse_lines(text.splitlines(), path=path, first_line=first_line)


def read_matrix(path) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    with open(path, encoding="utf-8", newline="") as fh:
        text = fh.read()
    return parse_matrix(text, path=path)


def format_matrix(m) -> str:
    m = np.asarray(m, dtype=float)
    if m.ndim == 1:
        m = m[None, :]
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains non-finite entries")
    buf = io.StringIO()
    for row in m:
        buf.write(",".join(format_value(v) for v in row))
        buf.write("\n")
    return buf.getvalue()


def atomic_write_text(path, text: str) -> None:
    """Write ``text`` to ``path`` via a temp file in the same directory and rename."""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_matrix(path, m) -> None:
    atomic_write_text(path, format_matrix(m))


def read_labeled(path) -> LabeledSet:
    """Read a CSV whose last column is an integer class label."""
    m = read_matrix(path)
    raw = m[:, -1]
    if np.any(raw != np.round(raw)):
        bad = int(np.flatnonzero(raw != np.round(raw))[0])
        raise LabelError(f"non-integer label {raw[bad]!r}", _data_line(path, bad), path)
    if np.any(raw < 0):
        bad = int(np.flatnonzero(raw < 0)[0])
        raise LabelError(f"negative label {raw[bad]!r}", _data_line(path, bad), path)
    points = m[:, :-1]
    if points.shape[1] == 0:
        raise MatrixFormatError("labeled file needs at least one feature column", None, path)
    return LabeledSet(points=points, labels=raw.astype(np.int64))


def _data_line(path, row_index):
    # map a data-row index back to its 1-based line number, skipping blanks
    with open(path, encoding="utf-8", newline="") as fh:
        seen = -1
        for lineno, line in enumerate(fh.read().splitlines(), start=1):
            if line.strip():
                seen += 1
                if seen == row_index:
                    return lineno
    return None


# --- sectioned model files -------------------------------------------------
#
# A model file is a sequence of sections. Each starts with a ``[name]`` line;
# the body is either ``key=value`` lines or a CSV block.


def format_sections(sections) -> str:
    """``sections`` is a list of ``(name, body)``; body is a dict (key=value) or an array."""
    out = []
    for name, body in sections:
        out.append(f"[{name}]\n")
        if isinstance(body, dict):
            for key, val in body.items():
                if isinstance(val, float):
                    val = format_value(val)
                out.append(f"{key}={val}\n")
        else:
            out.append(format_matrix(body))
    return "".join(out)


def parse_sections(text: str, path=None):
    """Return ``{name: (first_body_line, [lines])}`` preserving order."""
    sections = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current in sections:
                raise MatrixFormatError(f"duplicate section [{current}]", lineno, path)
            sections[current] = (lineno + 1, [])
        elif current is None:
            if line:
                raise MatrixFormatError("content before first section", lineno, path)
        else:
            sections[current][1].append(raw)
    return sections


def section_matrix(sections, name, path=None) -> np.ndarray:
    if name not in sections:
        raise MatrixFormatError(f"missing section [{name}]", None, path)
    first, lines = sections[name]
    return _parse_lines(lines, path=path, first_line=first)


def section_dict(sections, name, path=None) -> dict:
    if name not in sections:
        raise MatrixFormatError(f"missing section [{name}]", None, path)
    first, lines = sections[name]
    out = {}
    for offset, raw in enumerate(lines):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise MatrixFormatError(f"expected key=value, got {line!r}", first + offset, path)
        key, val = line.split("=", 1)
        out[key.strip()] = val.strip()
    return out
