"""Plain-text readers and writers for priors, posteriors, labels and traces.

Floats are written with ``repr`` (shortest string that round-trips, at most 17
significant digits), so ``read(write(x)) == x`` bit for bit.  Every writer goes
through a temporary file in the destination directory followed by an atomic
rename.
"""

import csv
import io as _io
import math
import os
import tempfile

import numpy as np

from .core import EstimationTrace, validate_labels, validate_posteriors, validate_prior
from .errors import ParseError


def fmt(x):
    """Format one float for output."""
    return repr(float(x))


def _umask():
    mask = os.umask(0)
    os.umask(mask)
    return mask


def atomic_write_text(path, text):
    """Write ``text`` to a temporary file beside ``path``, then rename it over
    ``path``, so readers never observe a partial file."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.chmod(tmp, 0o666 & ~_umask())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_lines(path):
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            return fh.read().splitlines()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _strip_comment(line):
    return line.split("#", 1)[0].strip()


def _parse_float(token, line_no, col, path):
    try:
        value = float(token)
    except ValueError:
        raise ParseError(line_no, col, f"not a number: {token!r}", path) from None
    if math.isnan(value):
        raise ParseError(line_no, col, "NaN is not allowed", path)
    return value


# ---------------------------------------------------------------------------
# priors


def read_prior(path):
    values = []
    for line_no, raw in enumerate(_read_lines(path), start=1):
        token = _strip_comment(raw)
        if not token:
            continue
        values.append(_parse_float(token, line_no, 1, path))
    return validate_prior(values)


def write_prior(path, prior, comment=None):
    lines = []
    if comment:
        lines.extend(f"# {c}" for c in comment.splitlines())
    lines.extend(fmt(v) for v in np.asarray(prior, dtype=np.float64))
    atomic_write_text(path, "\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# posteriors


def _looks_numeric(cells):
    try:
        for c in cells:
            float(c)
    except ValueError:
        return False
    return True


def read_posteriors(path):
    """Read an N x K CSV of posterior rows; a non-numeric first row is a header."""
    rows = []
    width = None
    lines = _read_lines(path)
    for line_no, cells in enumerate(csv.reader(lines), start=1):
        if not cells or all(not c.strip() for c in cells):
            continue
        cells = [c.strip() for c in cells]
        if line_no == 1 and not _looks_numeric(cells):
            continue
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise ParseError(
                line_no, 1, f"expected {width} columns, found {len(cells)}", path
            )
        rows.append([_parse_float(c, line_no, j + 1, path) for j, c in enumerate(cells)])
    return validate_posteriors(rows)


def write_posteriors(path, posteriors, header=True):
    m = np.asarray(posteriors, dtype=np.float64)
    buf = _io.StringIO()
    if header:
        buf.write(",".join(f"p{k}" for k in range(m.shape[1])) + "\n")
    for row in m:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    atomic_write_text(path, buf.getvalue())


# ---------------------------------------------------------------------------
# labels


def read_labels(path, n_classes=None):
    labels = []
    for line_no, raw in enumerate(_read_lines(path), start=1):
        token = _strip_comment(raw)
        if not token:
            continue
        try:
            y = int(token)
        except ValueError:
            raise ParseError(line_no, 1, f"not an integer label: {token!r}", path) from None
        if y < 0:
            raise ParseError(line_no, 1, f"negative label {y}", path)
        if n_classes is not None and y >= n_classes:
            raise ParseError(
                line_no, 1, f"label {y} out of range for {n_classes} classes", path
            )
        labels.append(y)
    return validate_labels(np.array(labels, dtype=np.int64), n_classes)


def write_labels(path, labels):
    atomic_write_text(path, "".join(f"{int(y)}\n" for y in np.asarray(labels)))


# ---------------------------------------------------------------------------
# traces


def write_trace(path, trace):
    k = trace.estimates.shape[1]
    stored = dict(zip(trace.estimate_iterations.tolist(), trace.estimates))
    buf = _io.StringIO()
    buf.write(f"# objective: {trace.objective_name}\n")
    buf.write(f"# termination: {trace.termination}\n")
    buf.write(",".join(["iteration", "objective", "max_change"] + [f"p{j}" for j in range(k)]))
    buf.write("\n")
    for it in range(trace.objective.shape[0]):
        cells = [str(it), fmt(trace.objective[it]), fmt(trace.max_change[it])]
        est = stored.get(it)
        if est is None:
            cells.extend([""] * k)
        else:
            cells.extend(fmt(v) for v in est)
        buf.write(",".join(cells) + "\n")
    atomic_write_text(path, buf.getvalue())


def read_trace(path):
    meta = {}
    body = []
    for line in _read_lines(path):
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            meta[key.strip()] = value.strip()
        elif line.strip():
            body.append(line)
    reader = csv.reader(body)
    header = next(reader, None)
    if header is None or header[:3] != ["iteration", "objective", "max_change"]:
        raise ParseError(1, 1, "missing trace header", path)
    k = len(header) - 3
    objective, change, est_it, est = [], [], [], []
    for line_no, cells in enumerate(reader, start=2):
        if len(cells) != k + 3:
            raise ParseError(line_no, 1, f"expected {k + 3} columns", path)
        try:
            it = int(cells[0])
        except ValueError:
            raise ParseError(line_no, 1, f"bad iteration {cells[0]!r}", path) from None
        if it != len(objective):
            raise ParseError(line_no, 1, "iterations must count up from 0", path)
        objective.append(float(cells[1]))
        change.append(float(cells[2]))
        if any(c != "" for c in cells[3:]):
            est_it.append(it)
            est.append([_parse_float(c, line_no, j + 4, path) for j, c in enumerate(cells[3:])])
    return EstimationTrace(
        objective_name=meta.get("objective", "objective"),
        objective=np.array(objective),
        max_change=np.array(change),
        estimate_iterations=np.array(est_it, dtype=np.int64),
        estimates=np.array(est, dtype=np.float64).reshape(-1, k),
        termination=meta.get("termination", "max-iterations"),
    )
