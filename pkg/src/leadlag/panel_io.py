"""Ingestion and persistence for panels, curves, fits, and spectra.

Panel CSV format (UTF-8, LF or CRLF):

    time,AAPL,MSFT,...
    0,0.001,-0.0002,...
    1,0.0,0.0005,...

The first column is an integer time index; when rows are uniformly strided
the stride is interpreted as the bar length in base units (so aggregated
panels round-trip their scale).  Returns are dimensionless decimals
(0.001 = 10 bps), never percentages.  The decimal separator is always '.',
independent of locale.

Results are JSON documents carrying ``"schema": 1``; curves are arrays,
fits are objects.  All floats are written with full shortest-round-trip
precision, so save/load is value-exact.  Writes go to a temporary file in the
destination directory followed by an atomic rename.
"""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError, ValidationError
from .fitting import EigenCurve, FitResult
from .model import ReturnPanel
from .spectral import Spectrum

__all__ = [
    "PanelFileHeader",
    "load_panel",
    "save_panel",
    "save_results",
    "save_curves",
    "load_curves",
    "save_fits",
    "load_fits",
    "save_spectra",
    "load_spectra",
]

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class PanelFileHeader:
    """Header metadata of a panel file."""

    asset_labels: tuple[str, ...]
    base_scale_minutes: float
    row_count: int

    def __post_init__(self):
        labels = tuple(self.asset_labels)
        if any(not lbl for lbl in labels):
            raise DataError("asset labels must be non-empty")
        if len(set(labels)) != len(labels):
            dup = next(lbl for i, lbl in enumerate(labels) if lbl in labels[:i])
            raise DataError(f"duplicate asset label {dup!r} in header")
        if self.base_scale_minutes <= 0:
            raise ValidationError("base_scale_minutes must be positive")
        if self.row_count < 0:
            raise ValidationError("row_count must be nonnegative")
        object.__setattr__(self, "asset_labels", labels)


def _atomic_write_text(path, text: str) -> None:
    path = Path(path)
    try:
        fd, tmp = tempfile.mkstemp(prefix=path.name + ".", dir=path.parent)
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from exc


def save_panel(panel: ReturnPanel, path) -> None:
    """Write a panel as CSV; the time stride encodes the base scale."""
    lines = ["time," + ",".join(panel.asset_labels)]
    stride = panel.base_scale
    for i, row in enumerate(panel.returns.T):
        lines.append(str(i * stride) + "," + ",".join(repr(float(v)) for v in row))
    _atomic_write_text(path, "\n".join(lines) + "\n")


def load_panel(path, compounding: str = "arithmetic") -> ReturnPanel:
    """Read a panel CSV.

    compounding="geometric" converts simple returns r into log-gross returns
    ln(1 + r) on load, so that downstream arithmetic block sums compound
    multiplicatively; the default leaves values untouched.
    """
    if compounding not in ("arithmetic", "geometric"):
        raise ValidationError("compounding must be 'arithmetic' or 'geometric'")
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc

    reader = csv.reader(raw.splitlines())
    rows = list(reader)
    if not rows:
        raise DataError(f"{path}: empty file")
    header = rows[0]
    if len(header) < 2 or header[0].strip().lower() != "time":
        raise DataError(f"{path}: line 1: header must be 'time,<label>,...'")
    labels = tuple(lbl.strip() for lbl in header[1:])
    n_fields = len(header)

    times = []
    data = []
    for ln, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != n_fields:
            raise DataError(f"{path}: line {ln}: expected {n_fields} fields, got {len(row)}")
        try:
            times.append(int(row[0]))
        except ValueError as exc:
            raise DataError(f"{path}: line {ln}: time index {row[0]!r} is not an integer") from exc
        try:
            values = [float(v) for v in row[1:]]
        except ValueError as exc:
            raise DataError(f"{path}: line {ln}: unparseable return value") from exc
        for j, v in enumerate(values):
            if not math.isfinite(v):
                raise DataError(f"{path}: line {ln}: non-finite return for asset {labels[j]!r}")
            if compounding == "geometric" and v <= -1.0:
                raise DataError(f"{path}: line {ln}: return <= -100% for asset {labels[j]!r} "
                                "cannot be compounded geometrically")
        data.append(values)
    if not data:
        raise DataError(f"{path}: no data rows")

    header_meta = PanelFileHeader(labels, 1.0, len(data))  # validates labels
    arr = np.asarray(data, dtype=np.float64).T
    if compounding == "geometric":
        arr = np.log1p(arr)
    strides = np.diff(times)
    if strides.size and strides[0] > 0 and np.all(strides == strides[0]):
        scale = int(strides[0])
    else:
        scale = 1
    return ReturnPanel(arr, base_scale=scale, asset_labels=header_meta.asset_labels)


def _dump(document: dict) -> str:
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


def _load_document(path, expected_kind: str) -> dict:
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON: {exc}") from exc
    if document.get("schema") != SCHEMA_VERSION:
        raise DataError(f"{path}: unsupported schema {document.get('schema')!r}")
    if document.get("kind") != expected_kind:
        raise DataError(f"{path}: expected kind {expected_kind!r}, got {document.get('kind')!r}")
    return document


def save_curves(curves: Sequence[EigenCurve], path, *, n_assets: int,
                base_scale_minutes: float = 1.0) -> None:
    document = {
        "schema": SCHEMA_VERSION,
        "kind": "curves",
        "n_assets": int(n_assets),
        "base_scale_minutes": float(base_scale_minutes),
        "curves": [
            {
                "rank": c.rank,
                "taus": [int(t) for t in c.taus],
                "values": [float(v) for v in c.values],
            }
            for c in curves
        ],
    }
    _atomic_write_text(path, _dump(document))


def load_curves(path) -> tuple[list[EigenCurve], dict]:
    document = _load_document(path, "curves")
    curves = [
        EigenCurve(np.asarray(entry["taus"], dtype=np.int64),
                   np.asarray(entry["values"], dtype=np.float64),
                   rank=int(entry["rank"]))
        for entry in document["curves"]
    ]
    meta = {
        "n_assets": document.get("n_assets"),
        "base_scale_minutes": document.get("base_scale_minutes", 1.0),
    }
    return curves, meta


def save_fits(fits: Sequence[tuple[int, FitResult]], path, *, n_assets: int,
              base_scale_minutes: float = 1.0) -> None:
    document = {
        "schema": SCHEMA_VERSION,
        "kind": "fits",
        "n_assets": int(n_assets),
        "base_scale_minutes": float(base_scale_minutes),
        "fits": [
            {
                "rank": int(rank),
                "alpha": fit.alpha,
                "amplitude": fit.amplitude,
                "gamma_f": fit.gamma_f,
                "t_alpha_minutes": fit.t_alpha,
                "rss": fit.rss,
                "iterations": fit.iterations,
                "converged": fit.converged,
            }
            for rank, fit in fits
        ],
    }
    _atomic_write_text(path, _dump(document))


def load_fits(path) -> tuple[list[tuple[int, FitResult]], dict]:
    document = _load_document(path, "fits")
    fits = [
        (
            int(entry["rank"]),
            FitResult(
                alpha=float(entry["alpha"]),
                amplitude=float(entry["amplitude"]),
                gamma_f=float(entry["gamma_f"]),
                t_alpha=float(entry["t_alpha_minutes"]),
                rss=float(entry["rss"]),
                iterations=int(entry["iterations"]),
                converged=bool(entry["converged"]),
            ),
        )
        for entry in document["fits"]
    ]
    meta = {
        "n_assets": document.get("n_assets"),
        "base_scale_minutes": document.get("base_scale_minutes", 1.0),
    }
    return fits, meta


def save_spectra(spectra: Sequence[tuple[int, Spectrum]], path) -> None:
    document = {
        "schema": SCHEMA_VERSION,
        "kind": "spectra",
        "spectra": [
            {
                "scale": int(scale),
                "eigenvalues": [float(v) for v in spectrum.eigenvalues],
                "multiplicities": [int(m) for m in spectrum.multiplicities],
            }
            for scale, spectrum in spectra
        ],
    }
    _atomic_write_text(path, _dump(document))


def load_spectra(path) -> list[tuple[int, Spectrum]]:
    document = _load_document(path, "spectra")
    return [
        (
            int(entry["scale"]),
            Spectrum(np.asarray(entry["eigenvalues"], dtype=np.float64),
                     np.asarray(entry["multiplicities"], dtype=np.int64)),
        )
        for entry in document["spectra"]
    ]


def save_results(objects, path, *, n_assets: int | None = None,
                 base_scale_minutes: float = 1.0) -> None:
    """Dispatch on payload type: curves, (rank, fit) pairs, or (scale,
    spectrum) pairs."""
    items = list(objects)
    # an empty sequence is written as an (empty) curves file
    if all(isinstance(x, EigenCurve) for x in items):
        if n_assets is None:
            raise ValidationError("saving curves requires n_assets")
        save_curves(items, path, n_assets=n_assets, base_scale_minutes=base_scale_minutes)
        return
    if all(isinstance(x, tuple) and len(x) == 2 for x in items):
        if isinstance(items[0][1], FitResult):
            if n_assets is None:
                raise ValidationError("saving fits requires n_assets")
            save_fits(items, path, n_assets=n_assets, base_scale_minutes=base_scale_minutes)
            return
        if isinstance(items[0][1], Spectrum):
            save_spectra(items, path)
            return
    raise ValidationError(f"unsupported result payload {type(items[0]).__name__!r}")
