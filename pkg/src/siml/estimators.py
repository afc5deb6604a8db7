"""Sieved maximum-likelihood estimation of source covariance and noise power.

The measurement covariance of an L-sensor array viewing a Gaussian source
field has the form ``Sigma = G R G^H + sigma * I`` once the search for the
source covariance kernel is restricted to the span of M sieve functions:
``R`` is the M x M Hermitian coefficient matrix of the kernel in that basis
and ``G`` is the gram matrix between sieve and sensing functions.  For the
eigenvector sieve used here the sieve functions are array-synthesized,
``psi_k = sum_i W_ik phi_i`` with ``W`` the leading eigenvectors of the
sample covariance, which makes ``G = H W`` computable in closed form from
the analytic sensing gram matrix ``H``.

Maximizing the complex-Wishart log-likelihood over Hermitian ``R`` (and
optionally ``sigma``) has closed-form solutions built from the left
pseudo-inverse of ``G``; both are implemented here together with the
likelihood itself, BIC model-order selection, and synthesis of intensity
maps from the fitted coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import json
import math

import numpy as np

from .array_model import SensorArray, _steering_block, gram_matrix
from .exceptions import (
    CoherencyError,
    ConditioningError,
    IdentifiabilityError,
    LikelihoodDomainError,
    ScanError,
)
from .field_sim import SampleCovariance, SourceModel, population_covariance
from .sphere_grid import SphereGrid

_ORTHONORMAL_TOL = 1e-10
_COHERENCY_RTOL = 1e-10
_MAX_GRAM_CONDITION = 1e12


def _as_matrix(cov) -> np.ndarray:
    """Accept a SampleCovariance or a plain Hermitian ndarray."""
    if isinstance(cov, SampleCovariance):
        return cov.matrix
    return np.asarray(cov, dtype=complex)


def _hermitianize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def _descending_eigh(matrix: np.ndarray):
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending."""
    eigvals, eigvecs = np.linalg.eigh(matrix)
    return eigvals[::-1], eigvecs[:, ::-1]


@dataclass(frozen=True)
class SievedBasis:
    """Array-synthesized sieve basis with its gram matrix.

    Attributes
    ----------
    W : (L, M) complex array
        Orthonormal coefficient columns; sieve function k is the array
        synthesis ``sum_i W_ik phi_i`` of the sensing exponentials.
    G : (L, M) complex array
        Gram matrix between sieve and sensing functions, ``G = H W``.
    M : int
        Sieve dimension, 1 <= M <= L.
    gram_conditioning : float
        Condition number of ``G^H G``; grows as M approaches L.
    """

    W: np.ndarray
    G: np.ndarray
    M: int
    gram_conditioning: float
    _svd: tuple = field(repr=False, default=None)

    @property
    def n_sensors(self) -> int:
        return self.W.shape[0]

    def pseudo_inverse_parts(self):
        """Cached SVD of G as (U, s, Vh); the left pseudo-inverse is V s^-1 U^H."""
        if self._svd is None:
            # populated by make_sieve; recompute for hand-built instances
            object.__setattr__(self, "_svd", np.linalg.svd(self.G, full_matrices=False))
        return self._svd


def make_sieve(W, gram: np.ndarray) -> SievedBasis:
    """Build a sieve basis from coefficient columns and the sensing gram matrix.

    Validates that the columns of ``W`` are orthonormal and that ``G = H W``
    has full column rank (the sieve and sensing families are coherent); the
    smallest singular value is reported when the check fails.
    """
    W = np.asarray(W, dtype=complex)
    if W.ndim != 2:
        raise ValueError(f"W must be a matrix, got shape {W.shape}")
    n, m = W.shape
    if not (1 <= m <= n):
        raise ValueError(f"sieve dimension must lie in [1, {n}], got {m}")
    ortho_err = float(np.max(np.abs(W.conj().T @ W - np.eye(m))))
    if ortho_err > _ORTHONORMAL_TOL:
        raise ValueError(
            f"sieve coefficient columns must be orthonormal "
            f"(max deviation {ortho_err:.3e})"
        )
    g = np.asarray(gram, dtype=complex) @ W
    u, s, vh = np.linalg.svd(g, full_matrices=False)
    if s[-1] <= _COHERENCY_RTOL * s[0]:
        raise CoherencyError(
            f"sieve gram matrix is rank deficient: smallest singular value "
            f"{s[-1]:.3e} (largest {s[0]:.3e})"
        )
    conditioning = float((s[0] / s[-1]) ** 2)
    return SievedBasis(
        W=W, G=g, M=m, gram_conditioning=conditioning, _svd=(u, s, vh)
    )


def eigen_sieve(cov, array: SensorArray, m: int) -> SievedBasis:
    """Sieve from the leading sample-covariance eigenvectors.

    The coefficient columns are the top ``m`` unit eigenvectors of the
    sample covariance, ordered by descending eigenvalue.  Truncating to the
    dominant eigenspace suppresses noise-dominated directions, so ``m``
    acts as a regularization knob.

    Parameters
    ----------
    cov : SampleCovariance or (L, L) Hermitian array
    array : SensorArray
    m : int
        Sieve dimension, 1 <= m <= L.
    """
    matrix = _as_matrix(cov)
    n = matrix.shape[0]
    if array.n_sensors != n:
        raise ValueError(
            f"array has {array.n_sensors} sensors, covariance is {n} x {n}"
        )
    if not (1 <= m <= n):
        raise ValueError(f"sieve dimension must lie in [1, {n}], got {m}")
    _, eigvecs = _descending_eigh(matrix)
    return make_sieve(eigvecs[:, :m], gram_matrix(array))


@dataclass(frozen=True)
class KappaEstimate:
    """Fitted sieve coefficients, noise power, and the achieved likelihood.

    ``R_hat`` is Hermitian by construction (re-symmetrized after the solve
    to strip floating-point asymmetry); it is not projected to the PSD
    cone, so synthesized intensity values can be negative.  ``sigma_clamped``
    records whether the raw noise estimate went negative and was clipped
    to zero.
    """

    R_hat: np.ndarray
    sigma_hat: float
    basis: SievedBasis
    log_likelihood: float
    sigma_clamped: bool = False


def _check_conditioning(basis: SievedBasis) -> None:
    if basis.gram_conditioning > _MAX_GRAM_CONDITION:
        raise ConditioningError(
            f"gram normal matrix condition {basis.gram_conditioning:.3e} exceeds "
            f"{_MAX_GRAM_CONDITION:.0e}; reduce the sieve dimension"
        )


def _pinv_congruence(basis: SievedBasis, matrix: np.ndarray) -> np.ndarray:
    """Compute pinv(G) @ matrix @ pinv(G)^H via the cached SVD of G."""
    u, s, vh = basis.pseudo_inverse_parts()
    inner = u.conj().T @ matrix @ u
    scaled = inner / s[:, None] / s[None, :]
    return vh.conj().T @ scaled @ vh


def log_likelihood(cov, basis: SievedBasis, coeffs, sigma: float) -> float:
    """Wishart log-likelihood of the sample covariance under a sieved model.

    Evaluates ``-trace(C^-1 S) - log det C`` with
    ``C = G R G^H + sigma * I``; additive constants of the Wishart density
    are dropped.  ``C`` must be positive definite.
    """
    s_mat = _as_matrix(cov)
    coeffs = np.asarray(coeffs, dtype=complex)
    n = s_mat.shape[0]
    model = basis.G @ coeffs @ basis.G.conj().T + sigma * np.eye(n)
    model = _hermitianize(model)
    try:
        chol = np.linalg.cholesky(model)
    except np.linalg.LinAlgError as exc:
        raise LikelihoodDomainError(
            "model covariance is not positive definite"
        ) from exc
    # trace(C^-1 S) through triangular solves; logdet from the factor diagonal
    half = np.linalg.solve(chol, s_mat)
    full = np.linalg.solve(chol.conj().T, half)
    trace_term = float(np.real(np.trace(full)))
    logdet = 2.0 * float(np.sum(np.log(np.real(np.diag(chol)))))
    return -trace_term - logdet


def _safe_log_likelihood(cov, basis: SievedBasis, coeffs, sigma: float) -> float:
    """Likelihood value, or -inf when the model covariance is singular."""
    try:
        return log_likelihood(cov, basis, coeffs, sigma)
    except LikelihoodDomainError:
        return float("-inf")


def estimate_known_noise(cov, basis: SievedBasis, sigma: float) -> KappaEstimate:
    """Maximum-likelihood sieve coefficients at a known noise power.

    The stationary point of the likelihood in ``R`` alone is
    ``R_hat = pinv(G) (S - sigma*I) pinv(G)^H``, computed through the SVD
    of ``G`` rather than by forming the normal matrix.
    """
    if sigma < 0.0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    s_mat = _as_matrix(cov)
    if basis.n_sensors != s_mat.shape[0]:
        raise ValueError("basis and covariance dimensions disagree")
    _check_conditioning(basis)
    centered = s_mat - sigma * np.eye(s_mat.shape[0])
    r_hat = _hermitianize(_pinv_congruence(basis, centered))
    return KappaEstimate(
        R_hat=r_hat,
        sigma_hat=sigma,
        basis=basis,
        log_likelihood=_safe_log_likelihood(cov, basis, r_hat, sigma),
    )


def estimate_joint(cov, basis: SievedBasis) -> KappaEstimate:
    """Joint maximum-likelihood estimate of sieve coefficients and noise.

    The noise estimate is the average sample-covariance energy outside the
    range of ``G``, ``sigma_hat = trace((I - P) S) / (L - M)`` with ``P``
    the orthogonal projector onto range(G); the coefficients then follow
    from the known-noise solution at ``sigma_hat``.  Requires strictly
    fewer sieve functions than sensors, otherwise no degrees of freedom
    remain for the noise.
    """
    s_mat = _as_matrix(cov)
    n = s_mat.shape[0]
    if basis.n_sensors != n:
        raise ValueError("basis and covariance dimensions disagree")
    if basis.M >= n:
        raise IdentifiabilityError(
            f"joint noise estimation needs M < L, got M = {basis.M}, L = {n}"
        )
    _check_conditioning(basis)
    u, _, _ = basis.pseudo_inverse_parts()
    # trace((I - U U^H) S) without materializing the projector
    residual = float(np.real(np.trace(s_mat))) - float(
        np.real(np.trace(u.conj().T @ s_mat @ u))
    )
    sigma_hat = residual / (n - basis.M)
    clamped = sigma_hat < 0.0
    if clamped:
        sigma_hat = 0.0
    centered = s_mat - sigma_hat * np.eye(n)
    r_hat = _hermitianize(_pinv_congruence(basis, centered))
    return KappaEstimate(
        R_hat=r_hat,
        sigma_hat=sigma_hat,
        basis=basis,
        log_likelihood=_safe_log_likelihood(cov, basis, r_hat, sigma_hat),
        sigma_clamped=clamped,
    )


def intensity_estimate(
    est: KappaEstimate, array: SensorArray, grid: SphereGrid
) -> np.ndarray:
    """Synthesize the fitted intensity on a grid.

    The intensity at pixel r is ``sum_ij R_ij psi_i(r) conj(psi_j(r))``
    with the sieve functions evaluated through the array exponentials,
    ``psi_k(r) = sum_i W_ik phi_i(r)``.  The quadratic form is real for
    Hermitian coefficients up to roundoff; the imaginary residue is
    discarded.  Values are not clipped, so negative excursions of the
    unconstrained estimator remain visible.
    """
    if est.basis.n_sensors != array.n_sensors:
        raise ValueError("estimate and array dimensions disagree")
    block = _steering_block(array, grid.points)  # entries conj(phi_i(r_p))
    sieve_vals = block.conj().T @ est.basis.W  # (P, M), psi_k at each pixel
    quad = np.einsum(
        "pi,ij,pj->p", sieve_vals, est.R_hat, sieve_vals.conj(), optimize=True
    )
    return np.real(quad)


def kappa_project_expectation(
    model: SourceModel,
    array: SensorArray,
    sigma: float,
    basis: SievedBasis,
    grid: SphereGrid,
) -> np.ndarray:
    """Expected sieve coefficients under the population covariance.

    For a basis held fixed (independent of the sampled data), the
    known-noise estimator is unbiased for
    ``pinv(G) (Sigma - sigma*I) pinv(G)^H``; this computes that target so
    Monte-Carlo averages of fitted coefficients can be tested against it.
    """
    if sigma < 0.0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    _check_conditioning(basis)
    pop = population_covariance(model, array, sigma, grid)
    centered = pop - sigma * np.eye(pop.shape[0])
    return _hermitianize(_pinv_congruence(basis, centered))


@dataclass(frozen=True)
class BicEntry:
    """One candidate dimension of a BIC scan; ``error`` marks skipped entries."""

    M: int
    log_likelihood: float
    bic: float
    error: str | None = None


@dataclass(frozen=True)
class BicScanResult:
    entries: tuple
    selected_M: int

    def selected_entry(self) -> BicEntry:
        for entry in self.entries:
            if entry.M == self.selected_M:
                return entry
        raise LookupError("selected dimension missing from entries")


def bic_scan(cov, array: SensorArray, m_values) -> BicScanResult:
    """Scan sieve dimensions and pick the BIC minimizer.

    For each candidate M the eigenvector sieve is built and the joint
    estimate computed; the score is ``-2 * N * loglik + 2 * M^2 * log(L)``
    with the natural logarithm, where ``loglik`` is the per-snapshot value
    reported by the estimators and ``N`` the snapshot count, so the
    complexity penalty is balanced against the likelihood of the full
    N-snapshot record (otherwise the penalty dominates at any realistic L
    and the scan always collapses to the smallest candidate).  A raw
    matrix input carries no snapshot count and uses N = 1.  Candidates
    that fail (ill-conditioned gram matrix, rank deficiency) are recorded
    as skipped entries rather than aborting the scan.  Ties select the
    smallest dimension.
    """
    matrix = _as_matrix(cov)
    n_snapshots = cov.n_snapshots if isinstance(cov, SampleCovariance) else 1
    n = matrix.shape[0]
    if array.n_sensors != n:
        raise ValueError(
            f"array has {array.n_sensors} sensors, covariance is {n} x {n}"
        )
    m_values = [int(m) for m in m_values]
    if not m_values:
        raise ValueError("m_values must not be empty")
    for m in m_values:
        if not (1 <= m <= n - 1):
            raise ValueError(f"scan dimensions must lie in [1, {n - 1}], got {m}")

    # one shared eigendecomposition; per-M bases are column slices of it
    _, eigvecs = _descending_eigh(matrix)
    gram = gram_matrix(array)
    log_n_sensors = math.log(n)

    entries = []
    for m in sorted(set(m_values)):
        try:
            basis = make_sieve(eigvecs[:, :m], gram)
            est = estimate_joint(cov, basis)
        except (CoherencyError, ConditioningError, IdentifiabilityError) as exc:
            entries.append(
                BicEntry(M=m, log_likelihood=float("nan"), bic=float("nan"),
                         error=str(exc))
            )
            continue
        score = (
            -2.0 * n_snapshots * est.log_likelihood
            + 2.0 * m * m * log_n_sensors
        )
        entries.append(BicEntry(M=m, log_likelihood=est.log_likelihood, bic=score))

    valid = [e for e in entries if e.error is None and np.isfinite(e.bic)]
    if not valid:
        raise ScanError("every scan candidate failed")
    best = min(valid, key=lambda e: (e.bic, e.M))
    return BicScanResult(entries=tuple(entries), selected_M=best.M)


def write_bic_csv(result: BicScanResult, path) -> None:
    """Export a scan as CSV with columns M, loglik, bic, selected (0/1).

    Skipped candidates keep their row with ``nan`` scores so the scan
    range stays visible.
    """
    with open(path, "w", newline="\n") as fh:
        fh.write("M,loglik,bic,selected\n")
        for e in result.entries:
            sel = 1 if e.M == result.selected_M else 0
            fh.write(f"{e.M},{e.log_likelihood:.17g},{e.bic:.17g},{sel}\n")


def write_estimate(est: KappaEstimate, csv_path, sidecar_path) -> None:
    """Export fitted coefficients as interleaved real/imag CSV plus sidecar.

    The sidecar records the sieve dimension, noise estimate, achieved
    log-likelihood, gram conditioning, and whether the noise estimate was
    clamped at zero.
    """
    m = est.R_hat.shape[0]
    header = ",".join(f"re{j},im{j}" for j in range(m))
    with open(csv_path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for row in est.R_hat:
            fields = []
            for val in row:
                fields.append(f"{val.real:.17g}")
                fields.append(f"{val.imag:.17g}")
            fh.write(",".join(fields) + "\n")
    meta = {
        "M": est.basis.M,
        "sigma_hat": est.sigma_hat,
        "log_likelihood": est.log_likelihood,
        "gram_conditioning": est.basis.gram_conditioning,
        "sigma_clamped": est.sigma_clamped,
    }
    with open(sidecar_path, "w", newline="\n") as fh:
        json.dump(meta, fh, sort_keys=True)
        fh.write("\n")
