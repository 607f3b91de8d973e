"""Spec-file parsing and CSV output."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .dmc import DmcChannel
from .errors import BadPmf, ConfigError
from .jscc import DmsSource

ROW_TOL = 1e-9
LOG2E = 1.0 / math.log(2.0)

BOUNDS_COLUMNS = ["n", "epsilon", "converse_bits", "achievability_bits", "normal_approx_bits",
                  "gamma_nats", "slack_nats", "types_evaluated"]
JSCC_COLUMNS = ["k", "n", "epsilon", "d", "beta", "converse_eps", "approx_k", "band_nats"]


def _read_json(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e.strerror or e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON ({e.msg} at line {e.lineno})") from e
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    return data


def _matrix(data, key, path) -> np.ndarray:
    if key not in data:
        raise ConfigError(f"{path}: missing field {key!r}")
    try:
        arr = np.array(data[key], dtype=float)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{path}: field {key!r} is not numeric") from e
    return arr


def _normalize_rows(P: np.ndarray, what: str, path) -> np.ndarray:
    """Renormalize rows whose sums are within ``ROW_TOL`` of one; reject the rest."""
    sums = P.sum(axis=-1, keepdims=True)
    off = np.abs(sums - 1.0)
    if np.any(~np.isfinite(P)) or np.any(P < 0):
        raise ConfigError(f"{path}: {what} has negative or non-finite entries")
    if np.any(off > ROW_TOL):
        bad = int(np.argmax(off.ravel()))
        raise ConfigError(f"{path}: {what} row {bad} sums to {float(sums.ravel()[bad])!r}")
    return P / sums


def channel_from_dict(data: dict, path="<channel>") -> DmcChannel:
    W = _matrix(data, "kernel", path)
    cost = _matrix(data, "cost", path)
    if W.ndim != 2:
        raise ConfigError(f"{path}: kernel must be a matrix")
    W = _normalize_rows(W, "kernel", path)
    labels = data.get("labels")
    try:
        return DmcChannel(W, cost, tuple(labels) if labels is not None else None)
    except BadPmf as e:
        raise ConfigError(f"{path}: {e}") from e


def source_from_dict(data: dict, path="<source>") -> DmsSource:
    p = _matrix(data, "pmf", path)
    D = _matrix(data, "distortion", path)
    if p.ndim != 1:
        raise ConfigError(f"{path}: pmf must be a vector")
    p = _normalize_rows(p, "pmf", path)
    try:
        return DmsSource(p, D)
    except BadPmf as e:
        raise ConfigError(f"{path}: {e}") from e


def load_channel(path) -> DmcChannel:
    """Read a channel spec: ``{"kernel": [[...]], "cost": [...], "labels": [...]}``."""
    return channel_from_dict(_read_json(path), path)


def load_source(path) -> DmsSource:
    """Read a source spec: ``{"pmf": [...], "distortion": [[...]]}``."""
    return source_from_dict(_read_json(path), path)


def fmt(x) -> str:
    """12 significant digits; integers verbatim; missing values as ``nan``."""
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.12g}"


def rate_scale(units: str) -> float:
    if units == "bits":
        return LOG2E
    if units == "nats":
        return 1.0
    raise ConfigError(f"unknown units {units!r}")


def bounds_rows(points, units="bits", channel: str | None = None):
    """CSV header and rows for a list of :class:`~costcap.bounds.BoundPoint`.

    Information columns are converted to ``units``; the column names keep
    the ``_bits`` suffix of the fixed schema.  ``gamma`` and slack stay in
    nats.
    """
    s = rate_scale(units)
    header = BOUNDS_COLUMNS + (["channel"] if channel else [])
    rows = []
    for p in points:
        row = [fmt(p.n), fmt(p.epsilon), fmt(p.log_m_converse * s), fmt(p.log_m_achievability * s),
               fmt(p.log_m_normal * s), fmt(p.gamma_used), fmt(p.diagnostics.get("slack")),
               fmt(p.diagnostics.get("types_evaluated"))]
        if channel:
            row.append(channel)
        rows.append(row)
    return header, rows


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def write_text(text: str, path):
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot write {path}: {e.strerror or e}") from e
