"""Gaussian region statistics and PSD matrix powers.

Everything downstream (stylization transforms, Frechet distances) is built on
these primitives, so the conventions are fixed here once: covariances are
population covariances (divide by n, not n - 1), matrices are symmetrized
after every construction step, and eigenvalues are clamped before fractional
powers so nearly singular inputs stay finite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

# Eigenvalue floor applied before negative fractional powers.
EIG_FLOOR = 1e-8

# Tolerance for accepting a matrix as symmetric.
SYMMETRY_TOL = 1e-9


@dataclass(frozen=True)
class GaussianStats:
    """First and second moments of a pixel or feature population.

    Attributes
    ----------
    mean : (C,) float64 array
    cov : (C, C) float64 array, symmetrized on construction
    count : number of samples the moments were estimated from
    """

    mean: np.ndarray
    cov: np.ndarray
    count: int

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=np.float64)
        cov = np.asarray(self.cov, dtype=np.float64)
        if mean.ndim != 1:
            raise ValidationError(f"mean must be a vector, got shape {mean.shape}")
        if cov.shape != (mean.shape[0], mean.shape[0]):
            raise ValidationError(
                f"cov shape {cov.shape} does not match mean dimension {mean.shape[0]}"
            )
        if self.count < 0:
            raise ValidationError(f"count must be non-negative, got {self.count}")
        cov = (cov + cov.T) / 2.0
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "count", int(self.count))

    @property
    def dim(self) -> int:
        return int(self.mean.shape[0])


def region_stats(features) -> GaussianStats:
    """Mean and population covariance of a set of vectors.

    Parameters
    ----------
    features : (n, C) array, or sequence of length-C vectors

    Returns
    -------
    GaussianStats
        With ``count = n``. An empty input yields zero sentinels with
        count 0; a single vector yields a zero covariance.
    """
    if _is_ragged(features):
        raise ValidationError("inconsistent vector lengths in features")
    try:
        arr = np.asarray(features, dtype=np.float64)
    except (ValueError, TypeError) as exc:
        raise ValidationError(f"features are not numeric vectors: {exc}") from exc
    if arr.size == 0:
        dim = arr.shape[1] if arr.ndim == 2 else 0
        return GaussianStats(mean=np.zeros(dim), cov=np.zeros((dim, dim)), count=0)
    if arr.ndim != 2:
        raise ValidationError(f"features must be 2-D (n, C), got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("features contain non-finite values")
    n = arr.shape[0]
    mean = arr.mean(axis=0)
    centered = arr - mean
    cov = centered.T @ centered / n
    return GaussianStats(mean=mean, cov=cov, count=n)


def _is_ragged(features) -> bool:
    if isinstance(features, np.ndarray):
        return False
    try:
        lengths = {len(v) for v in features}
    except TypeError:
        return False
    return len(lengths) > 1


@dataclass(frozen=True)
class SymEig:
    """Eigendecomposition of a symmetric matrix.

    ``eigenvalues`` are sorted descending; ``eigenvectors`` holds the
    matching orthonormal eigenvectors as columns.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def sym_eig(matrix: np.ndarray) -> SymEig:
    """Eigendecompose a symmetric matrix, eigenvalues descending.

    The input must be square, finite, and symmetric to within 1e-9.
    """
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError("matrix contains non-finite entries")
    asym = float(np.max(np.abs(m - m.T))) if m.size else 0.0
    if asym > SYMMETRY_TOL:
        raise ValidationError(f"matrix is not symmetric (max asymmetry {asym:.3g})")
    m = (m + m.T) / 2.0
    w, v = np.linalg.eigh(m)
    order = np.argsort(w)[::-1]
    return SymEig(eigenvalues=w[order], eigenvectors=v[:, order])


def psd_power(matrix: np.ndarray, power: float) -> np.ndarray:
    """Raise a PSD matrix to the power +1/2 or -1/2 via its eigensystem.

    Eigenvalues are clamped to at least EIG_FLOOR for the inverse square
    root and to at least 0 for the square root, so slightly indefinite
    inputs (from floating-point noise) are handled without complex output.
    """
    if power not in (0.5, -0.5):
        raise ValidationError(f"power must be +0.5 or -0.5, got {power}")
    eig = sym_eig(matrix)
    if power == -0.5:
        w = np.maximum(eig.eigenvalues, EIG_FLOOR)
    else:
        w = np.maximum(eig.eigenvalues, 0.0)
    powered = (eig.eigenvectors * (w**power)) @ eig.eigenvectors.T
    return (powered + powered.T) / 2.0


def trace_sqrt_product(a: np.ndarray, b: np.ndarray) -> float:
    """Tr sqrt(A B) for PSD A, B, via the symmetric form Tr sqrt(sqrtA B sqrtA).

    The product A @ B is not symmetric in general, but sqrtA @ B @ sqrtA is,
    shares its spectrum with A @ B, and keeps the computation inside real
    symmetric routines. Result is non-negative.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValidationError(f"dimension mismatch: {a.shape} vs {b.shape}")
    sqrt_a = psd_power(a, 0.5)
    inner = sqrt_a @ b @ sqrt_a
    inner = (inner + inner.T) / 2.0
    eig = sym_eig(inner)
    w = np.maximum(eig.eigenvalues, 0.0)
    return float(np.sum(np.sqrt(w)))
