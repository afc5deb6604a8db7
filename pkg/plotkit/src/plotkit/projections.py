"""Sphere-to-plane projections for rendering sky patches.

Both projections are centered on a reference direction (the mean of the
map's grid points unless overridden): orthographic views the sphere from
infinity along the center axis; gnomonic (tangent-plane) projects through
the sphere center onto the plane touching the reference point, which keeps
small sky patches free of pole distortion.
"""

from __future__ import annotations

import numpy as np

PROJECTIONS = ("orthographic", "gnomonic")


def _frame(center: np.ndarray):
    """Right-handed orthonormal frame (e1, e2) spanning the tangent plane."""
    center = center / np.linalg.norm(center)
    helper = np.array([0.0, 0.0, 1.0])
    if abs(center @ helper) > 0.9:
        helper = np.array([1.0, 0.0, 0.0])
    e1 = np.cross(helper, center)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(center, e1)
    return center, e1, e2


def project_points(points: np.ndarray, kind: str, center=None) -> np.ndarray:
    """Map (P, 3) unit vectors to (P, 2) plane coordinates.

    Points on the far hemisphere are rejected for the gnomonic projection
    (they have no tangent-plane image) and clipped to the rim for the
    orthographic one.
    """
    if kind not in PROJECTIONS:
        raise ValueError(f"projection must be one of {PROJECTIONS}, got {kind!r}")
    points = np.asarray(points, dtype=float)
    if center is None:
        center = points.mean(axis=0)
        norm = np.linalg.norm(center)
        if norm < 1e-12:
            center = np.array([0.0, 0.0, 1.0])
        else:
            center = center / norm
    axis, e1, e2 = _frame(np.asarray(center, dtype=float))
    u = points @ e1
    v = points @ e2
    w = points @ axis
    if kind == "orthographic":
        return np.column_stack([u, v])
    if np.any(w <= 1e-9):
        raise ValueError("gnomonic projection needs all points on the near hemisphere")
    return np.column_stack([u / w, v / w])
