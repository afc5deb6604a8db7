"""Spectral baselines: matched, minimum-variance, and adapted-response scans.

Each beamformer steers the array across the grid and scores the output
power at every pixel from the sample covariance ``S`` and steering vector
``a``:

* matched (Bartlett):          ``a^H S a / (a^H a)^2``
* minimum variance (Capon):    ``1 / (a^H S^-1 a)``
* adapted angular response:    ``(a^H S^-1 a) / (a^H S^-2 a)``

The matched normalization makes a lone unit-power point source in zero
noise peak at exactly its power.  Inverse-based scans need a positive
definite covariance; rank-deficient sample covariances (fewer snapshots
than sensors) get a small diagonal load automatically unless the caller
pins the loading explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .array_model import SensorArray, _steering_block
from .exceptions import InversionError
from .field_sim import SampleCovariance
from .sphere_grid import SphereGrid

KINDS = ("mb", "mvdr", "aar")

_AUTO_LOADING = 1e-6  # fraction of trace/L, applied when N < L


@dataclass(frozen=True)
class BeamformerSpec:
    """Scan type plus diagonal loading.

    ``diagonal_loading`` is the fraction of ``trace(S)/L`` added to the
    diagonal before inversion.  ``None`` selects the default policy: no
    loading when the sample covariance is generically full rank
    (N >= L), a load of 1e-6 otherwise.  An explicit 0.0 disables loading
    even for rank-deficient inputs.
    """

    kind: str
    diagonal_loading: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.diagonal_loading is not None and self.diagonal_loading < 0.0:
            raise ValueError("diagonal_loading must be >= 0")


def beamform_spectrum(
    cov: SampleCovariance,
    array: SensorArray,
    grid: SphereGrid,
    spec: BeamformerSpec,
) -> np.ndarray:
    """Evaluate a beamformer scan over all grid pixels.

    Returns one real, nonnegative power value per pixel.  The covariance is
    factorized once and shared across pixels.
    """
    s_mat = cov.matrix
    n = cov.dim
    if array.n_sensors != n:
        raise ValueError(f"array has {array.n_sensors} sensors, covariance is {n} x {n}")

    loading = spec.diagonal_loading
    if loading is None:
        loading = _AUTO_LOADING if cov.n_snapshots < n else 0.0
    if loading > 0.0:
        s_mat = s_mat + (loading * np.real(np.trace(s_mat)) / n) * np.eye(n)

    steer = _steering_block(array, grid.points)  # (L, P)
    norms = np.real(np.sum(steer.conj() * steer, axis=0))  # a^H a per pixel

    if spec.kind == "mb":
        powers = np.real(np.sum(steer.conj() * (s_mat @ steer), axis=0))
        return powers / norms**2

    try:
        chol = np.linalg.cholesky(s_mat)
    except np.linalg.LinAlgError as exc:
        raise InversionError(
            "sample covariance is singular; set diagonal_loading > 0 "
            "(or leave it unset for the automatic load)"
        ) from exc
    half = np.linalg.solve(chol, steer)
    solved = np.linalg.solve(chol.conj().T, half)  # S^-1 a per pixel
    quad = np.real(np.sum(steer.conj() * solved, axis=0))  # a^H S^-1 a

    if spec.kind == "mvdr":
        return 1.0 / quad
    # aar: denominator a^H S^-2 a = |S^-1 a|^2
    denom = np.real(np.sum(solved.conj() * solved, axis=0))
    return quad / denom
