"""Dense complex linear algebra used as the ground truth for every other module.

Everything here works on small dense matrices (desk scale, N <= 64). Spectral
quantities come from a full Hermitian eigendecomposition, and reductions use a
fixed pairwise tree so repeated runs are bitwise identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EigenDecompositionError, NonFiniteError, NonHermitianError, SparsityError

HERMITIAN_RTOL = 1e-12


def pairwise_sum(a: np.ndarray, axis: int = -1) -> np.ndarray:
    """Sum along ``axis`` by repeatedly adding adjacent pairs.

    The reduction tree depends only on the length of the axis, never on memory
    layout or threading, so results are reproducible bit for bit.
    """
    a = np.moveaxis(np.asarray(a), axis, -1)
    if a.shape[-1] == 0:
        return np.zeros(a.shape[:-1], dtype=a.dtype)
    while a.shape[-1] > 1:
        if a.shape[-1] % 2:
            pad = np.zeros(a.shape[:-1] + (1,), dtype=a.dtype)
            a = np.concatenate([a, pad], axis=-1)
        a = a[..., 0::2] + a[..., 1::2]
    return a[..., 0]


def _as_square(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFiniteError("matrix has non-finite entries")
    return m


def max_norm(m) -> float:
    return float(np.max(np.abs(np.asarray(m)))) if np.size(m) else 0.0


def row_sums(m) -> np.ndarray:
    """Absolute row sums sigma_j = sum_k |m_jk|."""
    return pairwise_sum(np.abs(np.asarray(m)), axis=1)


def induced_one_norm(m) -> float:
    """max_j sum_k |m_jk| (rows; for Hermitian input this equals the column form)."""
    return float(np.max(row_sums(m)))


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def eigendecompose(m) -> EigenDecomposition:
    """Eigenvalues ascending with orthonormal eigenvector columns."""
    m = _as_square(m)
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise EigenDecompositionError(str(exc)) from exc
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(v))):
        raise EigenDecompositionError("eigendecomposition produced non-finite values")
    return EigenDecomposition(w, v)


def spectral_norm(m) -> float:
    """Largest absolute eigenvalue of a Hermitian matrix."""
    w = eigendecompose(m).eigenvalues
    return float(np.max(np.abs(w))) if w.size else 0.0


def general_spectral_norm(m) -> float:
    """Largest singular value, for matrices that need not be Hermitian."""
    m = np.asarray(m, dtype=complex)
    if not m.size:
        return 0.0
    return float(np.sqrt(max(eigendecompose(m.conj().T @ m).eigenvalues[-1], 0.0)))


@dataclass(frozen=True)
class HermitianOperator:
    """A validated Hermitian matrix together with its cached norms.

    ``lam`` is max(induced one-norm, spectral norm); ``sigma`` holds the
    absolute row sums.
    """

    matrix: np.ndarray
    sigma: np.ndarray
    lam: float
    spectral_norm: float
    induced_one_norm: float
    max_norm: float
    eig: EigenDecomposition = field(repr=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def validate_hermitian(m, tol: float = HERMITIAN_RTOL) -> HermitianOperator:
    """Check Hermiticity, symmetrize, and cache every norm the walk needs.

    Args:
        m: square complex matrix.
        tol: allowed ``max|m - m^dag|`` relative to ``max|m|``.

    Raises:
        NonFiniteError: if any entry is NaN or infinite.
        NonHermitianError: if the deviation exceeds ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    m = _as_square(m)
    scale = max_norm(m)
    dev = max_norm(m - m.conj().T)
    if dev > tol * max(scale, np.finfo(float).tiny):
        raise NonHermitianError(
            f"matrix is not Hermitian: max|M - M^dag| = {dev:.3e} exceeds {tol:.1e} relative"
        )
    h = 0.5 * (m + m.conj().T)
    eig = eigendecompose(h)
    spectral = float(np.max(np.abs(eig.eigenvalues)))
    sigma = row_sums(h)
    one = float(np.max(sigma))
    return HermitianOperator(
        matrix=h,
        sigma=sigma,
        lam=max(one, spectral),
        spectral_norm=spectral,
        induced_one_norm=one,
        max_norm=max_norm(h),
        eig=eig,
    )


def matrix_exponential(h: HermitianOperator, t: float) -> np.ndarray:
    """exp(-i H t) assembled from the cached eigendecomposition."""
    v = h.eig.eigenvectors
    phases = np.exp(-1j * h.eig.eigenvalues * t)
    return (v * phases) @ v.conj().T


def check_sparse_norm_bound(a, d: int) -> tuple[float, float, bool]:
    """Compare ``||A||_1`` against ``sqrt(d) ||A||`` for a row-d-sparse matrix.

    Returns:
        (lhs, rhs, holds) with lhs the induced one-norm, rhs = sqrt(d) times the
        spectral norm, and holds = lhs <= rhs + 1e-12.

    Raises:
        SparsityError: some row has more than ``d`` nonzero entries.
    """
    if d < 1:
        raise ValueError("d must be a positive integer")
    a = _as_square(a)
    worst = int(np.max(np.count_nonzero(a, axis=1))) if a.size else 0
    if worst > d:
        raise SparsityError(f"a row has {worst} nonzeros, more than d={d}")
    lhs = induced_one_norm(a)
    rhs = float(np.sqrt(d)) * general_spectral_norm(a)
    return lhs, rhs, bool(lhs <= rhs + 1e-12)


def random_hermitian(n: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Gaussian Hermitian draw with complex off-diagonal entries."""
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * 0.5 * (a + a.conj().T)


def random_sparse(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """Complex matrix with exactly ``min(d, n)`` nonzeros in every row."""
    a = np.zeros((n, n), dtype=complex)
    for j in range(n):
        cols = rng.choice(n, size=min(d, n), replace=False)
        a[j, cols] = rng.normal(size=cols.size) + 1j * rng.normal(size=cols.size)
    return a


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-like unitary from the QR factorisation of a complex Gaussian matrix."""
    q, r = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))
