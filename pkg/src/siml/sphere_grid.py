"""Discretizations of the unit sphere used as pixel domains for intensity maps.

Two constructions are provided: a Fibonacci lattice covering the full sphere
with uniform weights, and an equal-area concentric-ring layout for spherical
caps (partial fields of view).  Both produce a :class:`SphereGrid` whose
weights sum to the exact area of the covered region, so weighted sums over
grid values act as quadrature rules for surface integrals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

FULL_SPHERE_AREA = 4.0 * math.pi

# golden angle, radians; drives both the Fibonacci spiral and ring offsets
_GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))

_UNIT_TOL = 1e-12


def cap_area(radius: float) -> float:
    """Area in steradians of a spherical cap of the given angular radius."""
    return 2.0 * math.pi * (1.0 - math.cos(radius))


@dataclass(frozen=True)
class Direction:
    """Unit vector on the sphere, validated to machine precision."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        norm_sq = self.x * self.x + self.y * self.y + self.z * self.z
        if abs(norm_sq - 1.0) > _UNIT_TOL:
            raise ValueError(f"direction must be a unit vector, |v|^2 = {norm_sq!r}")

    @classmethod
    def from_vector(cls, v) -> "Direction":
        """Normalize an arbitrary nonzero 3-vector into a Direction."""
        v = np.asarray(v, dtype=float)
        if v.shape != (3,):
            raise ValueError(f"expected a 3-vector, got shape {v.shape}")
        norm = float(np.linalg.norm(v))
        if norm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return cls(v[0] / norm, v[1] / norm, v[2] / norm)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)


ZHAT = Direction(0.0, 0.0, 1.0)


@dataclass(frozen=True)
class SphereGrid:
    """Ordered grid points on (part of) the sphere with quadrature weights.

    Attributes
    ----------
    points : (P, 3) float array
        Unit vectors, one row per pixel.  Row order is the documented,
        deterministic construction order and is preserved by CSV export.
    weights : (P,) float array
        Positive pixel areas in steradians; their sum equals the area of
        the covered region.
    kind : str
        ``"full-sphere"`` or ``"cap"``.
    cap_center, cap_radius
        Set for cap grids only.
    """

    points: np.ndarray
    weights: np.ndarray
    kind: str
    cap_center: Direction | None = field(default=None)
    cap_radius: float | None = field(default=None)

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if points.ndim != 2 or points.shape[1] != 3:
            raise ValueError(f"points must be (P, 3), got {points.shape}")
        if weights.shape != (points.shape[0],):
            raise ValueError("one weight per point required")
        if points.shape[0] < 1:
            raise ValueError("grid needs at least one point")
        norms = np.linalg.norm(points, axis=1)
        if np.any(np.abs(norms - 1.0) > _UNIT_TOL):
            raise ValueError("grid points must be unit vectors")
        if np.any(weights <= 0.0):
            raise ValueError("all quadrature weights must be positive")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)
        points.setflags(write=False)
        weights.setflags(write=False)

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def area(self) -> float:
        """Total covered area in steradians."""
        return float(np.sum(self.weights))


def make_fibonacci_grid(n_points: int) -> SphereGrid:
    """Fibonacci lattice on the full sphere with uniform weights 4*pi/P.

    Point i sits at height z_i = 1 - (2i + 1)/P and azimuth i times the
    golden angle, which spaces points nearly uniformly without pole
    clustering.  The construction is deterministic: the same P always
    yields the same grid, byte for byte.

    Parameters
    ----------
    n_points : int
        Number of grid points, at least 1.
    """
    if n_points < 1:
        raise ValueError(f"n_points must be >= 1, got {n_points}")
    i = np.arange(n_points, dtype=float)
    z = 1.0 - (2.0 * i + 1.0) / n_points
    rho = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    phi = i * _GOLDEN_ANGLE
    points = np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])
    # exact unit norm row by row; rho is already consistent with z
    weights = np.full(n_points, FULL_SPHERE_AREA / n_points)
    return SphereGrid(points=points, weights=weights, kind="full-sphere")


def _rotation_to(center: Direction) -> np.ndarray:
    """Rotation matrix taking the +z axis onto ``center``."""
    c = center.as_array()
    cos_t = c[2]
    if cos_t > 1.0 - 1e-14:
        return np.eye(3)
    if cos_t < -1.0 + 1e-14:
        # antipodal: rotate by pi about x
        return np.diag([1.0, -1.0, -1.0])
    axis = np.array([-c[1], c[0], 0.0])
    axis /= np.linalg.norm(axis)
    sin_t = math.sqrt(max(0.0, 1.0 - cos_t * cos_t))
    k = np.array(
        [
            [0.0, -axis[2], axis[1]],
            [axis[2], 0.0, -axis[0]],
            [-axis[1], axis[0], 0.0],
        ]
    )
    return np.eye(3) + sin_t * k + (1.0 - cos_t) * (k @ k)


def make_cap_grid(center: Direction, radius: float, n_rings: int) -> SphereGrid:
    """Equal-area ring layout inside a spherical cap.

    The cap is split into ``n_rings`` bands of equal area (uniform steps in
    cos(theta)).  Each band carries one ring of points at its area midpoint,
    with the point count chosen so pixels are roughly square; the band area
    is shared equally among its points, so the weight total matches the cap
    area exactly.  Ring azimuths are offset by multiples of the golden angle
    to avoid radial alignment.  Construction is deterministic.

    Parameters
    ----------
    center : Direction
        Cap axis.
    radius : float
        Angular radius in radians, 0 < radius <= pi/2.
    n_rings : int
        Number of rings, at least 1.
    """
    if not (0.0 < radius <= math.pi / 2.0):
        raise ValueError(f"cap radius must lie in (0, pi/2], got {radius}")
    if n_rings < 1:
        raise ValueError(f"n_rings must be >= 1, got {n_rings}")

    h = 1.0 - math.cos(radius)
    points = []
    weights = []
    for k in range(1, n_rings + 1):
        cos_hi = 1.0 - (k - 1) / n_rings * h
        cos_lo = 1.0 - k / n_rings * h
        band_area = 2.0 * math.pi * (cos_hi - cos_lo)
        cos_mid = 0.5 * (cos_hi + cos_lo)
        theta = math.acos(min(1.0, max(-1.0, cos_mid)))
        dtheta = math.acos(min(1.0, max(-1.0, cos_lo))) - math.acos(
            min(1.0, max(-1.0, cos_hi))
        )
        n_pts = max(1, round(2.0 * math.pi * math.sin(theta) / dtheta))
        phi0 = k * _GOLDEN_ANGLE
        j = np.arange(n_pts, dtype=float)
        phi = phi0 + 2.0 * math.pi * j / n_pts
        sin_t = math.sin(theta)
        ring = np.column_stack(
            [sin_t * np.cos(phi), sin_t * np.sin(phi), np.full(n_pts, cos_mid)]
        )
        points.append(ring)
        weights.append(np.full(n_pts, band_area / n_pts))

    pts = np.vstack(points)
    pts = pts @ _rotation_to(center).T
    # renormalize rows; the rotation is orthogonal but roundoff accumulates
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    return SphereGrid(
        points=pts,
        weights=np.concatenate(weights),
        kind="cap",
        cap_center=center,
        cap_radius=radius,
    )


def quadrature(grid: SphereGrid, values) -> complex:
    """Weighted sum of per-pixel values, approximating the surface integral."""
    values = np.asarray(values)
    if values.shape != (grid.size,):
        raise ValueError(
            f"expected {grid.size} values, got shape {values.shape}"
        )
    return complex(np.sum(grid.weights * values))


def write_grid_csv(grid: SphereGrid, path) -> None:
    """Export the grid as CSV with columns x, y, z, weight (header row).

    Row order equals point order; floats are printed with 17 significant
    digits so the export is reproducible byte for byte.
    """
    with open(path, "w", newline="\n") as fh:
        fh.write("x,y,z,weight\n")
        for p, w in zip(grid.points, grid.weights):
            fh.write(f"{p[0]:.17g},{p[1]:.17g},{p[2]:.17g},{w:.17g}\n")
