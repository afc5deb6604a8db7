"""Readers for the experiment artifact schemas (CSV plus JSON sidecars).

These consume the exact column layouts emitted by the experiment runner;
a missing or misnamed column raises :class:`SchemaError` naming it, so a
schema drift between producer and plots fails loudly.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

MAP_COLUMNS = ("x", "y", "z", "weight", "value")
BIC_COLUMNS = ("M", "loglik", "bic", "selected")
SUMMARY_KEY_COLUMNS = ("method", "snr_db", "n")
METRICS_COLUMNS = ("method", "M", "snr_db", "seed")


class SchemaError(ValueError):
    """An input file does not match the documented artifact schema."""


def _read_rows(path, required: tuple) -> list:
    with open(path, "r", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for column in required:
            if column not in header:
                raise SchemaError(f"{path}: missing column {column!r}")
        return list(reader)


@dataclass(frozen=True)
class MapData:
    points: np.ndarray  # (P, 3) unit vectors
    weights: np.ndarray
    values: np.ndarray
    label: str = ""


def read_map_csv(path, sidecar=None) -> MapData:
    """Load an intensity-map CSV (columns x, y, z, weight, value)."""
    rows = _read_rows(path, MAP_COLUMNS)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    try:
        points = np.array([[float(r["x"]), float(r["y"]), float(r["z"])] for r in rows])
        weights = np.array([float(r["weight"]) for r in rows])
        values = np.array([float(r["value"]) for r in rows])
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{path}: non-numeric cell ({exc})") from exc
    label = ""
    if sidecar is not None:
        with open(sidecar, "r") as fh:
            label = json.load(fh).get("label", "")
    return MapData(points=points, weights=weights, values=values, label=label)


@dataclass(frozen=True)
class BicScanData:
    dims: np.ndarray
    logliks: np.ndarray
    scores: np.ndarray
    selected_dim: int


def read_bic_csv(path) -> BicScanData:
    """Load a model-order scan CSV (columns M, loglik, bic, selected)."""
    rows = _read_rows(path, BIC_COLUMNS)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    try:
        dims = np.array([int(r["M"]) for r in rows])
        logliks = np.array([float(r["loglik"]) for r in rows])
        scores = np.array([float(r["bic"]) for r in rows])
        flags = np.array([int(r["selected"]) for r in rows])
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{path}: non-numeric cell ({exc})") from exc
    picked = dims[flags == 1]
    if picked.size != 1:
        raise SchemaError(f"{path}: expected exactly one selected row, got {picked.size}")
    return BicScanData(dims=dims, logliks=logliks, scores=scores, selected_dim=int(picked[0]))


def read_summary_csv(path) -> list:
    """Load the per-(method, snr) aggregate table as a list of dicts."""
    rows = _read_rows(path, SUMMARY_KEY_COLUMNS)
    out = []
    for r in rows:
        entry = {"method": r["method"]}
        for key, val in r.items():
            if key == "method":
                continue
            try:
                entry[key] = int(val) if key == "n" else float(val)
            except (TypeError, ValueError) as exc:
                raise SchemaError(f"{path}: non-numeric cell in {key!r}") from exc
        out.append(entry)
    if not out:
        raise SchemaError(f"{path}: no data rows")
    return out


def read_metrics_csv(path) -> list:
    """Load the per-cell metric rows (method, M, snr_db, seed, scores...)."""
    rows = _read_rows(path, METRICS_COLUMNS)
    out = []
    for r in rows:
        entry = {"method": r["method"]}
        for key, val in r.items():
            if key == "method":
                continue
            try:
                entry[key] = int(val) if key in ("M", "seed") else float(val)
            except (TypeError, ValueError) as exc:
                raise SchemaError(f"{path}: non-numeric cell in {key!r}") from exc
        out.append(entry)
    return out
