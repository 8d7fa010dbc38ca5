"""Dense complex linear algebra kernel.

Thin, validated wrappers around numpy/LAPACK. Every other module passes
signals and channels around as ``complex128`` ndarrays; the helpers here
add the shape and Hermitian checks the callers rely on.
"""

from __future__ import annotations

import numpy as np

from .errors import NotHermitianError, ShapeError

#: Default relative tolerance for numerical rank (relative to sigma_max).
RANK_RTOL = 1e-9

_HERMITIAN_ATOL = 1e-10


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got shape {m.shape}")
    return m


def matmul(a, b) -> np.ndarray:
    """Complex matrix product with an explicit shape check."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}: inner dimensions differ")
    return a @ b


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def numerical_rank(m, rel_tol: float = RANK_RTOL) -> int:
    """Number of singular values above ``rel_tol * sigma_max``.

    Accepts a stack of matrices (``ndim > 2``) and then returns an integer
    array of ranks, one per matrix.
    """
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim < 2:
        raise ShapeError(f"expected a matrix, got shape {m.shape}")
    if m.size == 0:
        return 0 if m.ndim == 2 else np.zeros(m.shape[:-2], dtype=int)
    sv = np.linalg.svd(m, compute_uv=False)
    smax = sv[..., :1]
    ranks = np.sum((sv > rel_tol * smax) & (smax > 0), axis=-1)
    if m.ndim == 2:
        return int(ranks)
    return ranks


def index_vectors(n: int, radix: int) -> np.ndarray:
    """All ``radix**n`` index vectors of length ``n`` in lexicographic order."""
    powers = radix ** np.arange(n - 1, -1, -1, dtype=np.int64)
    t = np.arange(radix**n, dtype=np.int64)
    return (t[:, None] // powers[None, :]) % radix


def hermitian_residual(m) -> float:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ShapeError(f"expected a square matrix, got {m.shape}")
    return float(np.max(np.abs(m - m.conj().T), initial=0.0))


def _check_hermitian(m: np.ndarray) -> None:
    scale = max(1.0, float(np.max(np.abs(m), initial=0.0)))
    res = hermitian_residual(m)
    if res > _HERMITIAN_ATOL * scale:
        raise NotHermitianError(f"matrix is not Hermitian (max asymmetry {res:.3e})")


def eigvals_hermitian(m) -> np.ndarray:
    """Real eigenvalues of a Hermitian matrix, in descending order."""
    m = as_matrix(m)
    _check_hermitian(m)
    return np.linalg.eigvalsh(m)[::-1].copy()


def psd_factor(r) -> np.ndarray:
    """Return ``B`` with ``B @ B^H == r`` for a Hermitian PSD ``r``.

    The factor is ``V sqrt(diag(lam))`` from the eigendecomposition, so it
    also exists for singular covariances, where Cholesky would fail. With
    this orientation ``h = B @ h_white`` has covariance ``r``.
    """
    r = as_matrix(r)
    _check_hermitian(r)
    r = 0.5 * (r + r.conj().T)
    lam, vec = np.linalg.eigh(r)
    scale = max(float(np.max(np.abs(lam), initial=0.0)), np.finfo(float).tiny)
    if lam.size and lam[0] < -1e-10 * scale:
        raise NotHermitianError(f"matrix is indefinite (min eigenvalue {lam[0]:.3e})")
    return vec * np.sqrt(np.clip(lam, 0.0, None))[None, :]
