"""Figure builders: map heatmaps, method comparison curves, scan profiles.

Rendering is deterministic: a fixed style, a fixed SVG hash salt, fonts
rendered as paths, and no timestamps in the output metadata, so repeated
runs on the same inputs produce identical bytes.
"""

from __future__ import annotations

import dataclasses
import json

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .projections import PROJECTIONS, project_points
from .schemas import (
    SchemaError,
    read_bic_csv,
    read_map_csv,
    read_metrics_csv,
    read_summary_csv,
)

NORMALIZATIONS = ("raw", "peak", "clip")

matplotlib.rcParams["svg.hashsalt"] = "plotkit"
matplotlib.rcParams["svg.fonttype"] = "path"


@dataclasses.dataclass(frozen=True)
class FigureSpec:
    """Rendering options shared by all figure types.

    ``projection`` applies to map figures; ``normalization`` picks how map
    values are prepared (raw values, peak-normalized, or clipped at zero);
    ``format`` selects the output encoder (png or svg).
    """

    projection: str = "gnomonic"
    normalization: str = "raw"
    format: str = "png"
    dpi: int = 150
    metrics_csv: str | None = None  # optional source for a dimension-vs-SNR panel

    def __post_init__(self):
        if self.projection not in PROJECTIONS:
            raise ValueError(f"projection must be one of {PROJECTIONS}")
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
        if self.format not in ("png", "svg"):
            raise ValueError("format must be 'png' or 'svg'")


def load_spec(path) -> FigureSpec:
    if path is None:
        return FigureSpec()
    with open(path, "r") as fh:
        data = json.load(fh)
    allowed = {f.name for f in dataclasses.fields(FigureSpec)}
    unknown = set(data) - allowed
    if unknown:
        raise SchemaError(f"{path}: unknown figure-spec fields {sorted(unknown)}")
    return FigureSpec(**data)


def normalize_values(values: np.ndarray, mode: str) -> np.ndarray:
    """Apply the requested normalization; 'peak' divides by max |value|."""
    if mode == "raw":
        return values
    if mode == "clip":
        return np.clip(values, 0.0, None)
    peak = np.max(np.abs(values))
    return values / peak if peak > 0 else values


def _save(fig, out_path, spec: FigureSpec) -> str:
    out_path = str(out_path)
    if spec.format == "svg":
        fig.savefig(out_path, format="svg", metadata={"Date": None})
    else:
        fig.savefig(out_path, format="png", dpi=spec.dpi)
    plt.close(fig)
    return out_path


def plot_map(map_csv, out_path, spec: FigureSpec = FigureSpec(), sidecar=None) -> str:
    """Render an intensity map as a projected heatmap with a colorbar.

    Negative values (possible for the unconstrained estimator) switch the
    colormap to a diverging one centered on zero so bias stays visible;
    ``clip`` normalization suppresses them instead.
    """
    data = read_map_csv(map_csv, sidecar=sidecar)
    values = normalize_values(data.values, spec.normalization)
    coords = project_points(data.points, spec.projection)

    fig, ax = plt.subplots(figsize=(5.0, 4.2))
    if np.any(values < 0):
        vmax = float(np.max(np.abs(values))) or 1.0
        shading = ax.tripcolor(
            coords[:, 0], coords[:, 1], values, cmap="RdBu_r", vmin=-vmax, vmax=vmax
        )
    else:
        shading = ax.tripcolor(coords[:, 0], coords[:, 1], values, cmap="viridis")
    ax.set_aspect("equal")
    ax.set_xlabel(f"{spec.projection} u")
    ax.set_ylabel(f"{spec.projection} v")
    if data.label:
        ax.set_title(data.label)
    fig.colorbar(shading, ax=ax, label=f"intensity ({spec.normalization})")
    fig.tight_layout()
    return _save(fig, out_path, spec)


_METHOD_STYLE = {
    "siml_joint": dict(color="#c0392b", marker="o"),
    "siml_known": dict(color="#e67e22", marker="s"),
    "mb": dict(color="#2980b9", marker="^"),
    "mvdr": dict(color="#27ae60", marker="v"),
    "aar": dict(color="#8e44ad", marker="d"),
}


def plot_comparison(summary_csv, out_path, spec: FigureSpec = FigureSpec()) -> str:
    """Render per-method MSE and contrast curves over SNR with 1-std bars.

    The MSE panel uses a log scale; error bars come from the repeat
    standard deviations stored in the summary table.
    """
    rows = read_summary_csv(summary_csv)
    methods = sorted({r["method"] for r in rows})
    fig, (ax_mse, ax_con) = plt.subplots(1, 2, figsize=(9.0, 3.8))
    for method in methods:
        chosen = sorted(
            (r for r in rows if r["method"] == method), key=lambda r: r["snr_db"]
        )
        snrs = [r["snr_db"] for r in chosen]
        style = _METHOD_STYLE.get(method, dict(marker="x"))
        ax_mse.errorbar(
            snrs,
            [r["rel_mse_fit_mean"] for r in chosen],
            yerr=[r["rel_mse_fit_std"] for r in chosen],
            label=method,
            capsize=3,
            **style,
        )
        ax_con.errorbar(
            snrs,
            [r["rms_contrast_mean"] for r in chosen],
            yerr=[r["rms_contrast_std"] for r in chosen],
            label=method,
            capsize=3,
            **style,
        )
    ax_mse.set_yscale("log")
    ax_mse.set_xlabel("SNR [dB]")
    ax_mse.set_ylabel("relative MSE (scale fitted)")
    ax_con.set_xlabel("SNR [dB]")
    ax_con.set_ylabel("RMS contrast")
    ax_con.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, out_path, spec)


def plot_bic(bic_csv, out_path, spec: FigureSpec = FigureSpec()) -> str:
    """Render the scan profile with the selected dimension marked.

    When the spec names a metrics table, a second panel shows the selected
    dimension against SNR (one point per experiment cell).
    """
    scan = read_bic_csv(bic_csv)
    with_trend = spec.metrics_csv is not None
    if with_trend:
        fig, (ax, ax_trend) = plt.subplots(1, 2, figsize=(9.0, 3.8))
    else:
        fig, ax = plt.subplots(figsize=(5.0, 3.8))

    finite = np.isfinite(scan.scores)
    ax.plot(scan.dims[finite], scan.scores[finite], "-o", ms=3, color="#2c3e50")
    picked = scan.scores[scan.dims == scan.selected_dim]
    ax.plot([scan.selected_dim], picked, "*", ms=14, color="#c0392b",
            label=f"selected M = {scan.selected_dim}")
    ax.set_xlabel("sieve dimension M")
    ax.set_ylabel("BIC")
    ax.legend(fontsize=8)

    if with_trend:
        rows = [
            r for r in read_metrics_csv(spec.metrics_csv)
            if r["method"].startswith("siml") and r["M"] > 0
        ]
        if rows:
            snrs = np.array([r["snr_db"] for r in rows])
            dims = np.array([r["M"] for r in rows])
            ax_trend.plot(snrs, dims, "o", ms=4, alpha=0.6, color="#2980b9")
            uniq = np.array(sorted(set(snrs)))
            means = np.array([dims[snrs == s].mean() for s in uniq])
            ax_trend.plot(uniq, means, "-", color="#c0392b", label="mean")
            ax_trend.legend(fontsize=8)
        ax_trend.set_xlabel("SNR [dB]")
        ax_trend.set_ylabel("selected M")
    fig.tight_layout()
    return _save(fig, out_path, spec)
