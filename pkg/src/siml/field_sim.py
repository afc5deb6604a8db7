"""Ground-truth source fields and snapshot simulation.

A source field is a mixture of point sources (fixed directions, given
powers, optionally pairwise correlated) and extended Gaussian blobs
(incoherent, angular Gaussian intensity profiles).  The field induces a
population covariance of the sensor measurements; finite-snapshot sample
covariances are simulated by drawing i.i.d. circular complex Gaussian
snapshots, so N times the sample covariance is complex-Wishart distributed
with mean N times the population covariance.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .array_model import SensorArray, _steering_block, steering_vector
from .sphere_grid import Direction, SphereGrid

_HERMITIAN_TOL = 1e-12
_PSD_TRACE_TOL = 1e-10


@dataclass(frozen=True)
class PointSource:
    """Point emitter: exact direction and nonnegative power."""

    direction: Direction
    power: float

    def __post_init__(self):
        if not (self.power >= 0.0):
            raise ValueError(f"point power must be >= 0, got {self.power}")


@dataclass(frozen=True)
class BlobSource:
    """Extended emitter with a Gaussian angular intensity profile.

    The intensity at angle theta from the center is
    ``peak_power * exp(-theta^2 / (2 * width^2))``.
    """

    center: Direction
    width: float
    peak_power: float

    def __post_init__(self):
        if not (self.width > 0.0):
            raise ValueError(f"blob width must be > 0, got {self.width}")
        if not (self.peak_power >= 0.0):
            raise ValueError(f"blob peak power must be >= 0, got {self.peak_power}")


@dataclass(frozen=True)
class Correlation:
    """Complex correlation coefficient between two point components."""

    i: int
    j: int
    rho: complex

    def __post_init__(self):
        if self.i == self.j:
            raise ValueError("correlation must link two distinct components")
        if abs(self.rho) > 1.0 + 1e-12:
            raise ValueError(f"|rho| must be <= 1, got {abs(self.rho)}")


@dataclass(frozen=True)
class SourceModel:
    """Mixture of point and blob components with optional point correlations.

    The cross-covariance matrix implied by the point powers and correlation
    coefficients must be positive semidefinite; violations are rejected at
    construction.  Blobs are always mutually incoherent.
    """

    components: tuple = ()
    correlations: tuple = ()

    def __post_init__(self):
        components = tuple(self.components)
        correlations = tuple(self.correlations)
        object.__setattr__(self, "components", components)
        object.__setattr__(self, "correlations", correlations)
        point_idx = {
            k for k, c in enumerate(components) if isinstance(c, PointSource)
        }
        for corr in correlations:
            for idx in (corr.i, corr.j):
                if idx not in point_idx:
                    raise ValueError(
                        f"correlation references component {idx}, which is not "
                        "a point source"
                    )
        cross = self.point_cross_covariance()
        if cross.size:
            min_eig = float(np.min(np.linalg.eigvalsh(cross)))
            if min_eig < -1e-10:
                raise ValueError(
                    f"correlation spec is not positive semidefinite "
                    f"(min eigenvalue {min_eig:.3e})"
                )

    def point_components(self) -> list[PointSource]:
        return [c for c in self.components if isinstance(c, PointSource)]

    def blob_components(self) -> list[BlobSource]:
        return [c for c in self.components if isinstance(c, BlobSource)]

    def point_cross_covariance(self) -> np.ndarray:
        """Hermitian covariance of the point-source amplitudes.

        Entry (a, b) is ``rho_ab * sqrt(q_a * q_b)`` for correlated pairs,
        ``q_a`` on the diagonal, zero otherwise.  Indices follow the order
        of point components within ``components``.
        """
        points = self.point_components()
        order = {
            k: a
            for a, k in enumerate(
                k for k, c in enumerate(self.components) if isinstance(c, PointSource)
            )
        }
        n = len(points)
        cov = np.zeros((n, n), dtype=complex)
        for a, p in enumerate(points):
            cov[a, a] = p.power
        for corr in self.correlations:
            a, b = order[corr.i], order[corr.j]
            val = corr.rho * math.sqrt(points[a].power * points[b].power)
            cov[a, b] = val
            cov[b, a] = np.conj(val)
        return cov


@dataclass(frozen=True)
class SampleCovariance:
    """Hermitian PSD sample covariance with its snapshot count."""

    matrix: np.ndarray
    n_snapshots: int

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError(f"covariance must be square, got {matrix.shape}")
        if self.n_snapshots < 1:
            raise ValueError("n_snapshots must be >= 1")
        scale = max(1.0, float(np.max(np.abs(matrix))))
        if np.max(np.abs(matrix - matrix.conj().T)) > _HERMITIAN_TOL * scale:
            raise ValueError("covariance must be Hermitian")
        trace = float(np.real(np.trace(matrix)))
        if matrix.shape[0] > 0 and trace > 0:
            min_eig = float(np.min(np.linalg.eigvalsh(matrix)))
            if min_eig < -_PSD_TRACE_TOL * trace:
                raise ValueError(
                    f"covariance must be PSD (min eigenvalue {min_eig:.3e})"
                )
        object.__setattr__(self, "matrix", matrix)
        matrix.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def intensity_map(model: SourceModel, grid: SphereGrid) -> np.ndarray:
    """Evaluate the ground-truth intensity on the grid pixels.

    Blobs are evaluated pointwise.  Each point source deposits
    ``power / pixel_weight`` onto its nearest pixel, so the weighted sum of
    the map recovers the point power: the map acts as a per-steradian
    density.
    """
    values = np.zeros(grid.size)
    for blob in model.blob_components():
        cos_t = np.clip(grid.points @ blob.center.as_array(), -1.0, 1.0)
        theta = np.arccos(cos_t)
        values += blob.peak_power * np.exp(-(theta**2) / (2.0 * blob.width**2))
    for point in model.point_components():
        nearest = int(np.argmax(grid.points @ point.direction.as_array()))
        values[nearest] += point.power / grid.weights[nearest]
    return values


def population_covariance(
    model: SourceModel, array: SensorArray, sigma: float, grid: SphereGrid
) -> np.ndarray:
    """Covariance of the sensor measurements under the model.

    Point components use their exact directions (no pixel pinning); blob
    components are integrated over the grid by quadrature as mutually
    incoherent emitters.  A noise floor ``sigma`` adds to the diagonal.
    """
    if sigma < 0.0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    n = array.n_sensors
    cov = np.zeros((n, n), dtype=complex)

    points = model.point_components()
    if points:
        steer = np.column_stack([steering_vector(array, p.direction) for p in points])
        cross = model.point_cross_covariance()
        cov += steer @ cross @ steer.conj().T

    blobs = model.blob_components()
    if blobs:
        blob_model = SourceModel(components=tuple(blobs))
        profile = intensity_map(blob_model, grid)
        block = _steering_block(array, grid.points)
        cov += (block * (grid.weights * profile)[None, :]) @ block.conj().T

    cov += sigma * np.eye(n)
    return 0.5 * (cov + cov.conj().T)


def sample_covariance(sigma_matrix, n_snapshots: int, seed: int) -> SampleCovariance:
    """Simulate a finite-snapshot sample covariance.

    Draws ``n_snapshots`` i.i.d. circular complex Gaussian snapshots with
    the given covariance (real and imaginary parts i.i.d. normal with
    variance 1/2, so a unit-variance scalar has E|z|^2 = 1) and averages
    their outer products.  Deterministic given the seed; the expectation
    equals the population covariance.
    """
    sigma_matrix = np.asarray(sigma_matrix, dtype=complex)
    if sigma_matrix.ndim != 2 or sigma_matrix.shape[0] != sigma_matrix.shape[1]:
        raise ValueError(f"covariance must be square, got {sigma_matrix.shape}")
    if n_snapshots < 1:
        raise ValueError("n_snapshots must be >= 1")
    scale = max(1.0, float(np.max(np.abs(sigma_matrix))))
    if np.max(np.abs(sigma_matrix - sigma_matrix.conj().T)) > 1e-10 * scale:
        raise ValueError("covariance must be Hermitian")
    eigvals, eigvecs = np.linalg.eigh(sigma_matrix)
    trace = float(np.sum(eigvals))
    if eigvals[0] < -_PSD_TRACE_TOL * max(trace, 1e-300):
        raise ValueError(
            f"covariance must be PSD (min eigenvalue {eigvals[0]:.3e})"
        )
    # Hermitian square root; rank-deficient inputs (few sources, zero noise)
    # are fine because negative roundoff eigenvalues are clipped
    root = eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))[None, :]

    n = sigma_matrix.shape[0]
    rng = np.random.default_rng(seed)
    snapshots = root @ (
        (rng.standard_normal((n, n_snapshots)) + 1j * rng.standard_normal((n, n_snapshots)))
        / math.sqrt(2.0)
    )
    est = snapshots @ snapshots.conj().T / n_snapshots
    return SampleCovariance(matrix=0.5 * (est + est.conj().T), n_snapshots=n_snapshots)


def snr_db(
    model: SourceModel, array: SensorArray, sigma: float, grid: SphereGrid
) -> float:
    """Array-averaged signal power over noise power, in decibels.

    Defined as ``10*log10(trace(signal_covariance) / (L * sigma))`` where
    the signal covariance is the population covariance at zero noise.
    """
    if sigma <= 0.0:
        raise ValueError("sigma must be > 0 for a finite SNR")
    signal = population_covariance(model, array, 0.0, grid)
    return 10.0 * math.log10(
        float(np.real(np.trace(signal))) / (array.n_sensors * sigma)
    )


def sigma_for_snr_db(
    model: SourceModel, array: SensorArray, snr: float, grid: SphereGrid
) -> float:
    """Noise power that realizes a requested SNR for the given model."""
    signal = population_covariance(model, array, 0.0, grid)
    trace = float(np.real(np.trace(signal)))
    if trace <= 0.0:
        raise ValueError("source model carries no power; SNR is undefined")
    return trace / (array.n_sensors * 10.0 ** (snr / 10.0))


def model_to_json(model: SourceModel) -> dict:
    """JSON-serializable form of a source model (type-tagged components)."""
    components = []
    for c in model.components:
        if isinstance(c, PointSource):
            components.append(
                {
                    "type": "point",
                    "direction": [c.direction.x, c.direction.y, c.direction.z],
                    "power": c.power,
                }
            )
        elif isinstance(c, BlobSource):
            components.append(
                {
                    "type": "blob",
                    "center": [c.center.x, c.center.y, c.center.z],
                    "width": c.width,
                    "peak_power": c.peak_power,
                }
            )
        else:
            raise TypeError(f"unknown component type: {type(c)!r}")
    correlations = [
        {"i": corr.i, "j": corr.j, "rho": [corr.rho.real, corr.rho.imag]}
        for corr in model.correlations
    ]
    return {"components": components, "correlations": correlations}


def model_from_json(data: dict) -> SourceModel:
    """Parse a source model from its JSON form."""
    components = []
    for c in data.get("components", []):
        kind = c.get("type")
        if kind == "point":
            components.append(
                PointSource(
                    direction=Direction.from_vector(c["direction"]),
                    power=float(c["power"]),
                )
            )
        elif kind == "blob":
            components.append(
                BlobSource(
                    center=Direction.from_vector(c["center"]),
                    width=float(c["width"]),
                    peak_power=float(c["peak_power"]),
                )
            )
        else:
            raise ValueError(f"unknown component type: {kind!r}")
    correlations = []
    for corr in data.get("correlations", []):
        re, im = corr["rho"]
        correlations.append(
            Correlation(i=int(corr["i"]), j=int(corr["j"]), rho=complex(re, im))
        )
    return SourceModel(components=tuple(components), correlations=tuple(correlations))


def write_covariance_csv(cov: SampleCovariance, csv_path, sidecar_path) -> None:
    """Export a sample covariance as interleaved real/imag CSV plus sidecar.

    Row i of the CSV holds ``re(M[i,0]), im(M[i,0]), re(M[i,1]), ...``; the
    JSON sidecar records the matrix size and snapshot count.
    """
    n = cov.dim
    header = ",".join(f"re{j},im{j}" for j in range(n))
    with open(csv_path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for row in cov.matrix:
            fields = []
            for val in row:
                fields.append(f"{val.real:.17g}")
                fields.append(f"{val.imag:.17g}")
            fh.write(",".join(fields) + "\n")
    with open(sidecar_path, "w", newline="\n") as fh:
        json.dump({"L": n, "n_snapshots": cov.n_snapshots}, fh, sort_keys=True)
        fh.write("\n")


def read_covariance_csv(csv_path, sidecar_path) -> SampleCovariance:
    """Load a sample covariance written by :func:`write_covariance_csv`."""
    with open(sidecar_path, "r") as fh:
        meta = json.load(fh)
    with open(csv_path, "r") as fh:
        fh.readline()  # header
        rows = []
        for line in fh:
            if not line.strip():
                continue
            vals = [float(tok) for tok in line.strip().split(",")]
            rows.append([complex(re, im) for re, im in zip(vals[::2], vals[1::2])])
    matrix = np.array(rows, dtype=complex)
    if matrix.shape != (meta["L"], meta["L"]):
        raise ValueError(
            f"covariance CSV is {matrix.shape}, sidecar says L={meta['L']}"
        )
    return SampleCovariance(matrix=matrix, n_snapshots=int(meta["n_snapshots"]))
