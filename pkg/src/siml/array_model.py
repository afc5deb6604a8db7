"""Sensor-array geometry, steering vectors, and sampling operators.

A far-field plane wave arriving from unit direction ``r`` hits sensor ``i``
at position ``p_i`` with phase ``-2*pi*<r, p_i>/wavelength``; the vector of
those per-sensor responses is the steering vector.  Stacking steering
vectors over a sphere grid discretizes the linear map from a source field
on the sphere to the L sensor measurements.  The continuous inner products
between the sensing exponentials have the closed form
``4*pi*sinc(2*pi*d/wavelength)`` in the sensor separation ``d``, giving an
analytic L x L gram matrix without any quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .sphere_grid import FULL_SPHERE_AREA, Direction, SphereGrid

_MIN_SENSOR_SEPARATION = 1e-9  # meters; closer pairs make the gram matrix singular


@dataclass(frozen=True)
class SensorArray:
    """Sensor positions (meters) and the operating wavelength (meters).

    Positions must be pairwise distinct: near-coincident sensors produce a
    numerically singular gram matrix, and that failure should be loud at
    construction rather than deep inside an estimator.
    """

    positions: np.ndarray
    wavelength: float

    def __post_init__(self):
        positions = np.atleast_2d(np.asarray(self.positions, dtype=float))
        if positions.ndim != 2 or positions.shape[1] != 3:
            raise ValueError(f"positions must be (L, 3), got {positions.shape}")
        if positions.shape[0] < 1:
            raise ValueError("array needs at least one sensor")
        if not np.all(np.isfinite(positions)):
            raise ValueError("sensor positions must be finite")
        if not (self.wavelength > 0.0):
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")
        diff = positions[:, None, :] - positions[None, :, :]
        dist = np.linalg.norm(diff, axis=2)
        np.fill_diagonal(dist, np.inf)
        if np.min(dist) < _MIN_SENSOR_SEPARATION:
            i, j = np.unravel_index(np.argmin(dist), dist.shape)
            raise ValueError(
                f"sensors {i} and {j} are {dist[i, j]:.3e} m apart; "
                f"minimum allowed separation is {_MIN_SENSOR_SEPARATION:g} m"
            )
        object.__setattr__(self, "positions", positions)
        positions.setflags(write=False)

    @property
    def n_sensors(self) -> int:
        return self.positions.shape[0]


@dataclass(frozen=True)
class SamplingMatrix:
    """Discretized sampling operator: rows are steering vectors on a grid.

    With ``weights_absorbed`` the quadrature weights are folded into the
    columns, so ``entries @ field_values`` is directly the quadrature of the
    field against each sensing exponential.
    """

    entries: np.ndarray
    grid: SphereGrid
    weights_absorbed: bool = field(default=False)


def random_disk_array(
    n_sensors: int,
    wavelength: float,
    seed: int,
    aperture_in_wavelengths: float = 50.0,
) -> SensorArray:
    """Random planar layout, uniform over a disk at z = 0.

    The disk diameter is ``aperture_in_wavelengths`` times the wavelength.
    Deterministic given the seed.
    """
    if n_sensors < 1:
        raise ValueError("n_sensors must be >= 1")
    if aperture_in_wavelengths <= 0.0:
        raise ValueError("aperture must be positive")
    rng = np.random.default_rng(seed)
    radius = 0.5 * aperture_in_wavelengths * wavelength
    # uniform over the disk: sqrt-radial density
    r = radius * np.sqrt(rng.random(n_sensors))
    phi = 2.0 * math.pi * rng.random(n_sensors)
    positions = np.column_stack(
        [r * np.cos(phi), r * np.sin(phi), np.zeros(n_sensors)]
    )
    return SensorArray(positions=positions, wavelength=wavelength)


def steering_vector(array: SensorArray, r: Direction) -> np.ndarray:
    """Per-sensor phase response to a unit plane wave from direction ``r``.

    Entry i is ``exp(-2j*pi*<r, p_i>/wavelength)``; all entries have unit
    modulus.
    """
    phase = array.positions @ r.as_array() * (2.0 * math.pi / array.wavelength)
    return np.exp(-1j * phase)


def _steering_block(array: SensorArray, points: np.ndarray) -> np.ndarray:
    """Steering vectors for many directions at once, one column per direction."""
    phase = (array.positions @ points.T) * (2.0 * math.pi / array.wavelength)
    return np.exp(-1j * phase)


def sampling_matrix(
    array: SensorArray, grid: SphereGrid, absorb_weights: bool = False
) -> SamplingMatrix:
    """Discretize the field-to-measurements map on a sphere grid.

    Row i holds the steering vector of sensor geometry evaluated at every
    grid point.  With ``absorb_weights`` each column p is scaled by the
    pixel weight w_p, so applying the matrix to per-pixel field values
    performs the quadrature of the field against the conjugate sensing
    exponentials.
    """
    entries = _steering_block(array, grid.points)
    if absorb_weights:
        entries = entries * grid.weights[None, :]
    return SamplingMatrix(entries=entries, grid=grid, weights_absorbed=absorb_weights)


def gram_matrix(array: SensorArray) -> np.ndarray:
    """Closed-form inner products between the sensing exponentials.

    Entry (i, j) equals ``4*pi*sinc(2*pi*d_ij/wavelength)`` with
    ``d_ij = |p_i - p_j|`` and the unnormalized sinc convention
    ``sinc(x) = sin(x)/x``, ``sinc(0) = 1``.  The result is real symmetric
    with diagonal 4*pi and is positive semidefinite up to roundoff.
    """
    diff = array.positions[:, None, :] - array.positions[None, :, :]
    dist = np.linalg.norm(diff, axis=2)
    # np.sinc is normalized (sin(pi x)/(pi x)); feed it 2d/lambda to get
    # the unnormalized sinc at 2*pi*d/lambda
    h = FULL_SPHERE_AREA * np.sinc(2.0 * dist / array.wavelength)
    return 0.5 * (h + h.T)


def write_array_csv(array: SensorArray, path) -> None:
    """Export sensor positions as CSV with columns x_m, y_m, z_m.

    The wavelength travels separately in experiment configs.  Floats carry
    17 significant digits so import/export round-trips exactly.
    """
    with open(path, "w", newline="\n") as fh:
        fh.write("x_m,y_m,z_m\n")
        for p in array.positions:
            fh.write(f"{p[0]:.17g},{p[1]:.17g},{p[2]:.17g}\n")


def read_array_csv(path, wavelength: float) -> SensorArray:
    """Load sensor positions written by :func:`write_array_csv`."""
    with open(path, "r") as fh:
        header = fh.readline().strip()
        if header != "x_m,y_m,z_m":
            raise ValueError(f"unexpected array CSV header: {header!r}")
        rows = [
            [float(tok) for tok in line.strip().split(",")]
            for line in fh
            if line.strip()
        ]
    return SensorArray(positions=np.array(rows, dtype=float), wavelength=wavelength)
