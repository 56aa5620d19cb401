"""Dense symmetric linear algebra and scalar special functions.

Everything downstream works through :class:`SymmetricOperator`: the
spectral decomposition is computed once at construction and reused for
matrix exponentials, modal closed forms and stability diagnostics.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DimensionMismatch, IndefiniteOperator, InvalidParams, NonSymmetric

#: relative symmetry tolerance, max|A - A^T| <= SYMMETRY_RTOL * max|A|
SYMMETRY_RTOL = 1e-12
#: eigenvalues in [-PSD_CLAMP_RTOL * max(1, lam_max), 0) are treated as zero
PSD_CLAMP_RTOL = 1e-10
#: switch point between the series and direct branches of :func:`phi`
PHI_SERIES_CUTOFF = 1e-4


class SymmetricOperator:
    """Symmetric positive semidefinite matrix with a cached eigendecomposition.

    Eigenvalues are sorted ascending and clamped at zero: tiny negative
    values (rounding noise on a semidefinite matrix) are treated as zero,
    anything below the clamp threshold aborts construction.  The raw
    eigenvalues stay available on ``eigenvalues_raw``.  Instances are
    immutable and safe to share between threads.
    """

    def __init__(self, entries) -> None:
        a = np.array(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise NonSymmetric(f"expected a nonempty square matrix, got shape {a.shape}")
        scale = float(np.abs(a).max())
        skew = float(np.abs(a - a.T).max())
        if skew > SYMMETRY_RTOL * scale:
            raise NonSymmetric(
                f"asymmetry {skew:.3e} exceeds {SYMMETRY_RTOL:.0e} * max|entries| = "
                f"{SYMMETRY_RTOL * scale:.3e}"
            )
        eigenvalues, eigenvectors = np.linalg.eigh(a)
        floor = -PSD_CLAMP_RTOL * max(1.0, float(eigenvalues[-1]))
        if eigenvalues[0] < floor:
            raise IndefiniteOperator(
                f"smallest eigenvalue {eigenvalues[0]:.6e} is below the clamp "
                f"threshold {floor:.3e}; operator must be positive semidefinite"
            )
        self.entries = a
        self.eigenvalues_raw = eigenvalues
        self.eigenvalues = np.maximum(eigenvalues, 0.0)
        self.eigenvectors = eigenvectors
        for arr in (self.entries, self.eigenvalues_raw, self.eigenvalues, self.eigenvectors):
            arr.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def omega(self) -> float:
        """Smallest (clamped) eigenvalue, the decay floor of the semigroup."""
        return float(self.eigenvalues[0])

    @property
    def lambda_max(self) -> float:
        """Largest eigenvalue."""
        return float(self.eigenvalues[-1])

    @property
    def norm2(self) -> float:
        """Spectral norm; equals ``lambda_max`` for a PSD symmetric matrix."""
        return self.lambda_max

    def apply(self, v: np.ndarray) -> np.ndarray:
        """Matrix-vector product, preserving the dtype of ``v``."""
        v = np.asarray(v)
        if v.shape != (self.dim,):
            raise DimensionMismatch(f"expected a vector of length {self.dim}, got shape {v.shape}")
        return self.entries @ v

    def __repr__(self) -> str:  # pragma: no cover
        return (
            f"SymmetricOperator(dim={self.dim}, omega={self.omega:.6g}, "
            f"lambda_max={self.lambda_max:.6g})"
        )


def spectral_decompose(entries) -> SymmetricOperator:
    """Validate symmetry, eigendecompose and wrap as a :class:`SymmetricOperator`."""
    return SymmetricOperator(entries)


def expm_apply(A: SymmetricOperator, t: float, v: np.ndarray) -> np.ndarray:
    """Apply the matrix exponential exp(-t*A) to a vector via the eigenbasis."""
    if t < 0:
        raise InvalidParams(f"time must be nonnegative, got {t}")
    v = np.asarray(v, dtype=float)
    if v.shape != (A.dim,):
        raise DimensionMismatch(f"expected a vector of length {A.dim}, got shape {v.shape}")
    w = A.eigenvectors.T @ v
    w = w * np.exp(-t * A.eigenvalues)
    return A.eigenvectors @ w


def phi(t: float) -> float:
    """(e^t - 1)/t, with phi(0) = 1.

    Near zero the direct quotient cancels catastrophically, so a 4-term
    Taylor series is used for |t| < 1e-4 (relative error < 1e-16 at the
    switch point).
    """
    if abs(t) < PHI_SERIES_CUTOFF:
        return 1.0 + t / 2.0 + t * t / 6.0 + t * t * t / 24.0
    return math.expm1(t) / t


def _two_norm_2x2(m: np.ndarray) -> float:
    # closed form: sigma_max^2 = (f + sqrt(f^2 - 4 g^2)) / 2 with
    # f = sum of squared entries, g = |det|; branch-free and deterministic
    f = float((m * m).sum())
    g = abs(float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]))
    s = math.sqrt(max(f * f - 4.0 * g * g, 0.0))
    return math.sqrt(0.5 * (f + s))


def two_norm(m) -> float:
    """Spectral norm (largest singular value) of a real matrix.

    2x2 inputs use a closed form; larger matrices fall back to the SVD.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.size == 0:
        raise InvalidParams(f"expected a nonempty matrix, got shape {m.shape}")
    if m.shape == (2, 2):
        return _two_norm_2x2(m)
    return float(np.linalg.norm(m, 2))
