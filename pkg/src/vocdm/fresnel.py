"""Discrete Fresnel transform and the structured matrices around it.

Dense constructors are cached and returned read-only so they can be shared
between threads and callers without defensive copies.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _check_size(n: int) -> None:
    if n < 1:
        raise ValueError(f"size must be >= 1, got {n}")


@lru_cache(maxsize=64)
def dfnt_matrix(n: int) -> np.ndarray:
    """Unitary size-``n`` DFnT matrix.

    ``[Phi]_{m,k} = n^{-1/2} exp(-j pi/4 + j pi/n (m - k + (n mod 2)/2)^2)``.
    The matrix is circulant and its inverse is its conjugate transpose.
    """
    _check_size(n)
    d = np.subtract.outer(np.arange(n), np.arange(n)) + (n % 2) / 2.0
    return _frozen(np.exp(-0.25j * np.pi + 1j * np.pi / n * d**2) / np.sqrt(n))


@lru_cache(maxsize=64)
def idfnt_matrix(n: int) -> np.ndarray:
    return _frozen(dfnt_matrix(n).conj().T.copy())


@lru_cache(maxsize=64)
def idfnt_first_column(n: int) -> np.ndarray:
    """First column of the IDFnT matrix; the whole matrix is ``circ`` of it."""
    return _frozen(idfnt_matrix(n)[:, 0].copy())


@lru_cache(maxsize=64)
def _idfnt_spectrum(n: int) -> np.ndarray:
    return _frozen(np.fft.fft(idfnt_first_column(n)))


def idfnt_apply(x: np.ndarray, axis: int = -1) -> np.ndarray:
    """Apply the IDFnT along ``axis`` via circular convolution (FFT)."""
    x = np.asarray(x, dtype=np.complex128)
    n = x.shape[axis]
    shape = [1] * x.ndim
    shape[axis] = n
    lam = _idfnt_spectrum(n).reshape(shape)
    return np.fft.ifft(lam * np.fft.fft(x, axis=axis), axis=axis)


def dfnt_apply(x: np.ndarray, axis: int = -1) -> np.ndarray:
    """Apply the forward DFnT along ``axis`` (adjoint of :func:`idfnt_apply`)."""
    x = np.asarray(x, dtype=np.complex128)
    n = x.shape[axis]
    shape = [1] * x.ndim
    shape[axis] = n
    lam = _idfnt_spectrum(n).conj().reshape(shape)
    return np.fft.ifft(lam * np.fft.fft(x, axis=axis), axis=axis)


def cyclic_shift_matrix(k: int, power: int = 1) -> np.ndarray:
    """``Pi_k ** power`` where ``Pi_k = circ([0, 1, 0, ..., 0])``.

    ``Pi_k`` moves entry ``i`` to ``i + 1 (mod k)``, so ``[a, b, c] -> [c, a, b]``.
    """
    _check_size(k)
    p = power % k
    return np.roll(np.eye(k, dtype=np.complex128), p, axis=0)


def phase_ramp(k: int, power: int = 1) -> np.ndarray:
    """Diagonal of ``D_k ** power``: ``exp(j 2 pi power i / k)``, i = 0..k-1."""
    _check_size(k)
    p = power % k
    i = np.arange(k)
    # (p*i) mod k keeps the phase argument in [0, 2 pi)
    return np.exp(2j * np.pi * ((p * i) % k) / k)


def phase_diag_matrix(k: int, power: int = 1) -> np.ndarray:
    return np.diag(phase_ramp(k, power))


def leading_phase_block(m: int, k: int, power: int = 1) -> np.ndarray:
    """Top-left ``m x m`` block of ``D_k ** power``, so that ``D_K = D_N kron Lambda_M``."""
    _check_size(m)
    return phase_diag_matrix(k, power)[:m, :m]


def alpha(q: int, n: int) -> complex:
    """Unit-modulus weight ``exp(j pi/n * q * ((n mod 2) - q))``."""
    _check_size(n)
    return complex(np.exp(1j * np.pi / n * q * ((n % 2) - q)))
