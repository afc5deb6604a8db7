"""Image-quality scores for intensity maps: relative MSE and RMS contrast.

All norms and means are weighted by the grid pixel areas, so maps on
non-uniform grids are scored without pixel-size bias.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import UndefinedMetricError
from .sphere_grid import SphereGrid


@dataclass(frozen=True)
class IntensityMap:
    """Per-pixel intensity values bound to their grid, with a free-text label."""

    grid: SphereGrid
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.size,):
            raise ValueError(
                f"expected {self.grid.size} values, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("map values must be finite")
        object.__setattr__(self, "values", values)
        values.setflags(write=False)


def _check_same_grid(a: IntensityMap, b: IntensityMap) -> None:
    if a.grid is b.grid:
        return
    if a.grid.size != b.grid.size or not np.array_equal(a.grid.points, b.grid.points):
        raise ValueError("maps live on different grids")


def scale_fit(estimate: IntensityMap, truth: IntensityMap) -> float:
    """Least-squares scale c minimizing the weighted error of c*estimate."""
    _check_same_grid(estimate, truth)
    w = estimate.grid.weights
    denom = float(np.sum(w * estimate.values**2))
    if denom == 0.0:
        return 0.0
    return float(np.sum(w * estimate.values * truth.values)) / denom


def relative_mse(
    estimate: IntensityMap, truth: IntensityMap, scale_fit_flag: bool = True
) -> float:
    """Weighted squared error relative to the truth energy.

    With ``scale_fit_flag`` the estimate is first rescaled by the
    least-squares factor ``c = <est, truth> / <est, est>`` (weighted inner
    products), removing any global gain difference; methods with
    uncalibrated output scales are compared this way.  Without it the raw
    values are scored.
    """
    _check_same_grid(estimate, truth)
    w = estimate.grid.weights
    truth_energy = float(np.sum(w * truth.values**2))
    if truth_energy == 0.0:
        raise UndefinedMetricError("reference map is identically zero")
    est = estimate.values
    if scale_fit_flag:
        est = scale_fit(estimate, truth) * est
    return float(np.sum(w * (est - truth.values) ** 2)) / truth_energy


def rms_contrast(intensity: IntensityMap) -> float:
    """Weighted standard deviation of the map about its weighted mean."""
    if intensity.grid.size < 2:
        raise ValueError("contrast needs at least two pixels")
    w = intensity.grid.weights
    total = float(np.sum(w))
    mean = float(np.sum(w * intensity.values)) / total
    var = float(np.sum(w * (intensity.values - mean) ** 2)) / total
    return float(np.sqrt(max(0.0, var)))


def write_map_csv(intensity: IntensityMap, csv_path, sidecar_path=None) -> None:
    """Export a map as CSV (x, y, z, weight, value) with an optional sidecar.

    The sidecar JSON records the label (method name and parameters).  Row
    order equals grid point order; floats carry 17 significant digits for
    byte-stable reruns.
    """
    import json

    grid = intensity.grid
    with open(csv_path, "w", newline="\n") as fh:
        fh.write("x,y,z,weight,value\n")
        for p, w, v in zip(grid.points, grid.weights, intensity.values):
            fh.write(
                f"{p[0]:.17g},{p[1]:.17g},{p[2]:.17g},{w:.17g},{v:.17g}\n"
            )
    if sidecar_path is not None:
        with open(sidecar_path, "w", newline="\n") as fh:
            json.dump({"label": intensity.label}, fh, sort_keys=True)
            fh.write("\n")
